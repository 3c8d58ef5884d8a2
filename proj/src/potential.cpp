#include "isolab/potential.hpp"

#include "isolab/quadrature.hpp"

#include <algorithm>
#include <stdexcept>

namespace isolab {

BumpSpec::BumpSpec(double lo, double hi, double amp) : support_lo(lo), support_hi(hi), amplitude(amp) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw std::invalid_argument("bump support must satisfy lo < hi");
  if (!std::isfinite(amp) || amp < 0.0) throw std::invalid_argument("bump amplitude must be nonnegative");
}

PotentialSpec::PotentialSpec(std::vector<PlacedBump> bumps) : bumps_(std::move(bumps)) {}

double PotentialSpec::reach() const {
  double r = 0.0;
  for (const auto& b : bumps_)
    r = std::max({r, std::abs(b.bump.support_lo), std::abs(b.bump.support_hi)});
  return r;
}

std::vector<double> PotentialSpec::breakpoints() const {
  std::vector<double> out;
  for (const auto& b : bumps_) {
    double s = sign_of(b.orientation);
    out.push_back(s * b.bump.support_lo);
    out.push_back(s * b.bump.support_hi);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PotentialSpec PotentialSpec::reflected() const {
  std::vector<PlacedBump> flipped = bumps_;
  for (auto& b : flipped)
    b.orientation = b.orientation == Orientation::Plus ? Orientation::Minus : Orientation::Plus;
  return PotentialSpec(std::move(flipped));
}

bool PotentialSpec::is_even() const {
  // Even iff every active bump has a mirror twin of equal amplitude.
  std::vector<bool> used(bumps_.size(), false);
  for (std::size_t i = 0; i < bumps_.size(); ++i) {
    if (used[i] || bumps_[i].bump.amplitude == 0.0) continue;
    bool matched = false;
    for (std::size_t k = 0; k < bumps_.size() && !matched; ++k) {
      if (k == i || used[k]) continue;
      const auto& a = bumps_[i];
      const auto& b = bumps_[k];
      if (a.orientation != b.orientation && a.bump.support_lo == b.bump.support_lo &&
          a.bump.support_hi == b.bump.support_hi && a.bump.amplitude == b.bump.amplitude) {
        used[i] = used[k] = matched = true;
      }
    }
    // A bump straddling the origin symmetrically is its own mirror.
    const auto& a = bumps_[i].bump;
    if (!matched && a.support_lo == -a.support_hi) matched = used[i] = true;
    if (!matched) return false;
  }
  return true;
}

PotentialPair make_pair(const BumpSpec& alpha, const BumpSpec& beta) {
  if (!(alpha.support_lo > 1.0 && alpha.support_hi < 2.0))
    throw std::invalid_argument("alpha support must lie inside (1, 2)");
  if (!(beta.support_lo > 3.0 && beta.support_hi < 4.0))
    throw std::invalid_argument("beta support must lie inside (3, 4)");
  if (alpha.support_hi > beta.support_lo) throw std::invalid_argument("alpha and beta supports overlap");
  PotentialPair pair;
  pair.alpha = alpha;
  pair.beta = beta;
  pair.plus = PotentialSpec({{alpha, Orientation::Plus}, {beta, Orientation::Plus}});
  pair.minus = PotentialSpec({{alpha, Orientation::Plus}, {beta, Orientation::Minus}});
  return pair;
}

PotentialPair default_pair() { return make_pair(BumpSpec(1.1, 1.9, 0.5), BumpSpec(3.1, 3.9, 1.0)); }

namespace {

// int_a^b sqrt(V(side * s)) ds for 0 <= a <= b, split at bump endpoints.
ExtendedReal action_segment(const PotentialSpec& v, double side, const ExtendedReal& a, const ExtendedReal& b,
                            double tol) {
  if (!(a < b)) return ExtendedReal(0.0);
  auto integrand = [&](const ExtendedReal& s) { return sqrt(v(ExtendedReal(side * s))); };
  std::vector<ExtendedReal> cuts{a};
  for (double bp : v.breakpoints()) {
    double t = side * bp;
    if (t > a && t < b) cuts.emplace_back(t);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double share = tol / static_cast<double>(cuts.size() - 1);
  ExtendedReal total(0.0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate_adaptive(integrand, cuts[i], cuts[i + 1], share);
  return total;
}

}  // namespace

ExtendedReal tunneling_action(const PotentialSpec& v, const ExtendedReal& x, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tunneling_action: tolerance must be positive");
  double side = x < 0.0 ? -1.0 : 1.0;
  return action_segment(v, side, ExtendedReal(0.0), abs(x), tol);
}

std::vector<ExtendedReal> tunneling_action_table(const PotentialSpec& v, const std::vector<ExtendedReal>& points,
                                                 double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tunneling_action_table: tolerance must be positive");
  std::vector<ExtendedReal> out(points.size());
  // Walk each half-line outward from the origin.
  for (double side : {1.0, -1.0}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < points.size(); ++i)
      if ((side > 0.0) ? !(points[i] < 0.0) : (points[i] < 0.0)) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return abs(points[a]) < abs(points[b]); });
    double share = tol / static_cast<double>(std::max<std::size_t>(idx.size(), 1));
    ExtendedReal prev(0.0);
    ExtendedReal acc(0.0);
    for (auto i : idx) {
      ExtendedReal t = abs(points[i]);
      acc += action_segment(v, side, prev, t, share);
      prev = t;
      out[i] = acc;
    }
  }
  return out;
}

IsometryReport check_non_isometric(const PotentialSpec& v1, const PotentialSpec& v2, int samples) {
  if (samples < 100) throw std::invalid_argument("check_non_isometric needs at least 100 samples");
  double span = std::max(v1.reach(), v2.reach()) + 1.0;
  IsometryReport report;
  for (int k = 0; k < samples; ++k) {
    double x = -span + 2.0 * span * k / (samples - 1);
    double target = v2(x);
    report.max_direct_diff = std::max(report.max_direct_diff, std::abs(v1(x) - target));
    report.max_reflected_diff = std::max(report.max_reflected_diff, std::abs(v1(-x) - target));
  }
  return report;
}

}  // namespace isolab
