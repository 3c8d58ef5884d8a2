#include "isolab/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isolab {

GridSpec::GridSpec(double half_width, std::size_t n) : half_width_(half_width), n_(n) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw std::invalid_argument("grid half-width must be positive");
  if (n < 1) throw std::invalid_argument("grid needs at least one interior point");
}

GridSpec GridSpec::refined(int levels) const {
  if (levels < 0) throw std::invalid_argument("refinement levels must be nonnegative");
  return GridSpec(half_width_, ((n_ + 1) << levels) - 1);
}

template <>
Eigen::Index sturm_count<DoubleDouble>(const SymmetricTridiagonal<DoubleDouble>& t, const DoubleDouble& lambda) {
  const auto& d = t.diagonal();
  const auto& e2 = t.off_diagonal_squared();
  const Eigen::Index n = t.size();
  Eigen::Index count = 0;
  DoubleDouble q = d(0) - lambda;
  for (Eigen::Index i = 0;; ++i) {
    if (q.hi() == 0.0) q = DoubleDouble(-kZeroPivotGuard);
    if (q.hi() < 0.0) ++count;
    if (i + 1 == n) break;
    q = (d(i + 1) - lambda) - quotient_fast(e2(i), q);
  }
  return count;
}

ExtendedReal EigenfunctionSamples::value_at(const ExtendedReal& x) const {
  const ExtendedReal dx = grid.spacing<ExtendedReal>();
  // Position in units of dx measured from -L; sample i sits at i + 1.
  ExtendedReal s = (x + grid.half_width()) / dx;
  const auto n = static_cast<long long>(grid.size());
  if (!(s > 0.0) || !(s < static_cast<double>(n + 1))) return ExtendedReal(0.0);
  long long k = static_cast<long long>(std::floor(s.to_double()));
  if (ExtendedReal(static_cast<double>(k)) > s) --k;
  ExtendedReal frac = s - ExtendedReal(static_cast<double>(k));
  auto sample = [&](long long idx) {
    return (idx < 1 || idx > n) ? ExtendedReal(0.0) : values(static_cast<Eigen::Index>(idx - 1));
  };
  return sample(k) * (1.0 - frac) + sample(k + 1) * frac;
}

ExtendedReal EigenfunctionSamples::trapezoid_norm_squared() const {
  return values.squaredNorm() * grid.spacing<ExtendedReal>();
}

void normalize_samples(VectorX<ExtendedReal>& v, const GridSpec& grid) {
  ExtendedReal norm = sqrt(v.squaredNorm() * grid.spacing<ExtendedReal>());
  if (!(norm > 0.0)) throw std::runtime_error("cannot normalize a zero eigenfunction");
  Eigen::Index peak = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (abs(v(i)) > abs(v(peak))) peak = i;
  if (v(peak) < 0.0) norm = -norm;
  v /= norm;
}

EigenfunctionSamples eigenfunction(const TridiagonalOperator<ExtendedReal>& t, const ExtendedReal& energy,
                                   const SolverOptions& options) {
  InverseIterationResult info;
  // Below about eps*||T|| the residual of any representable vector is noise.
  double floor = 64.0 * kDoubleDoubleEpsilon * t.norm_inf();
  VectorX<ExtendedReal> v = inverse_iteration(t, energy, options.residual_tol, options.max_iterations, &info, floor);
  normalize_samples(v, t.grid);
  EigenfunctionSamples out;
  out.values = std::move(v);
  out.grid = t.grid;
  out.eigenvalue = energy;
  out.residual = info.residual;
  return out;
}

double roundoff_bound(const SymmetricTridiagonal<ExtendedReal>& t, const SolverOptions& options) {
  return 8.0 * kDoubleDoubleEpsilon * t.norm_inf() + options.eigen_tol;
}

RichardsonResult richardson(const std::array<ExtendedReal, 3>& e) {
  ExtendedReal r1a = (4.0 * e[1] - e[0]) / 3.0;
  ExtendedReal r1b = (4.0 * e[2] - e[1]) / 3.0;
  ExtendedReal r2 = (16.0 * r1b - r1a) / 15.0;
  return {r2, r2 - r1b};
}

ExtrapolatedEigenvalue extrapolate(const LevelEigenvalues& levels) {
  ExtrapolatedEigenvalue out;
  out.levels = levels;
  auto r = richardson(levels.values);
  out.value = r.value;
  // The Richardson weights sum to 85/45 < 2 in absolute value.
  out.error_estimate = abs(r.last_correction) + 2.0 * levels.roundoff;
  return out;
}

EigenfunctionSamples combine_levels(const std::array<EigenfunctionSamples, 3>& levels, const GridSpec& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::array<VectorX<ExtendedReal>, 3> shared;
  std::array<ExtendedReal, 3> energies;
  for (std::size_t level = 0; level < 3; ++level) {
    if (levels[level].grid.size() != grid.refined(static_cast<int>(level)).size())
      throw std::invalid_argument("combine_levels: grids are not nested refinements");
    const Eigen::Index stride = Eigen::Index{1} << level;
    shared[level].resize(n);
    for (Eigen::Index i = 0; i < n; ++i) shared[level](i) = levels[level].values((i + 1) * stride - 1);
    // Align signs with the coarse level before combining.
    if (level > 0 && shared[level].dot(shared[0]) < 0.0) shared[level] = -shared[level];
    energies[level] = levels[level].eigenvalue;
  }
  VectorX<ExtendedReal> r1a = (4.0 * shared[1] - shared[0]) / 3.0;
  VectorX<ExtendedReal> r1b = (4.0 * shared[2] - shared[1]) / 3.0;
  VectorX<ExtendedReal> combined = (16.0 * r1b - r1a) / 15.0;
  normalize_samples(combined, grid);

  EigenfunctionSamples out;
  out.values = std::move(combined);
  out.grid = grid;
  out.eigenvalue = richardson(energies).value;
  out.residual = std::max({levels[0].residual, levels[1].residual, levels[2].residual});
  return out;
}

double truncation_estimate_log10(const PotentialSpec& v, double h, double half_width) {
  constexpr double kDelta = 0.2;
  double phi = std::min(tunneling_action(v, ExtendedReal(half_width)), tunneling_action(v, ExtendedReal(-half_width)))
                   .to_double();
  return -2.0 * (1.0 - kDelta) * (1.0 - kDelta) * phi / h / std::log(10.0);
}

GridSpec choose_domain(const PotentialSpec& v, double h, Eigen::Index j, double target, std::size_t n) {
  if (!(target > 0.0)) throw std::invalid_argument("choose_domain: target must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("choose_domain: h must be positive");
  // Harmonic turning point sqrt(h(2j+1)); the candidate must clear it twice over.
  double turning = std::sqrt(h * (2.0 * static_cast<double>(j) + 1.0));
  for (double L : kDomainCandidates) {
    if (L < 2.0 * turning) continue;
    if (truncation_estimate_log10(v, h, L) <= std::log10(target)) return GridSpec(L, n);
  }
  throw std::runtime_error("no domain half-width in {6, 8, 10, 12} meets the truncation target");
}

}  // namespace isolab
