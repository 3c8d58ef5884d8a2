#include "isolab/agmon.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace isolab {

AgmonWindow::AgmonWindow(double r_, double R_, double delta_) : r(r_), R(R_), delta(delta_) {
  if (!(r > 0.0 && r < R)) throw std::invalid_argument("Agmon window needs 0 < r < R");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("Agmon window needs 0 < delta < 1");
}

ExtendedReal turning_point(const ExtendedReal& energy) {
  if (energy < 0.0) throw std::domain_error("turning_point: negative energy");
  return sqrt(energy);
}

std::vector<Eigen::Index> window_indices(const EigenfunctionSamples& psi, const AgmonWindow& w) {
  if (w.R > psi.grid.half_width()) throw std::invalid_argument("Agmon window extends past the grid");
  std::vector<Eigen::Index> out;
  for (double side : {-1.0, 1.0}) {
    int sign = 0;
    for (Eigen::Index i = 0; i < psi.values.size(); ++i) {
      double x = psi.x(i).to_double();
      double ax = std::abs(x);
      if (!(ax > w.r && ax < w.R) || (x < 0.0) != (side < 0.0)) continue;
      const ExtendedReal& value = psi.values(i);
      int s = value > 0.0 ? 1 : (value < 0.0 ? -1 : 0);
      if (s == 0 || (sign != 0 && s != sign))
        throw std::invalid_argument("eigenfunction has a node inside the Agmon window");
      sign = s;
      out.push_back(i);
    }
  }
  return out;
}

namespace {

std::vector<ExtendedReal> window_actions(const EigenfunctionSamples& psi, const PotentialSpec& v,
                                         const std::vector<Eigen::Index>& idx) {
  std::vector<ExtendedReal> points;
  points.reserve(idx.size());
  for (auto i : idx) points.push_back(psi.x(i));
  return tunneling_action_table(v, points);
}

}  // namespace

EnvelopeRow envelope_constants(const EigenfunctionSamples& psi, const PotentialSpec& v, double h,
                               const AgmonWindow& w) {
  if (!(h > 0.0)) throw std::invalid_argument("envelope constants need h > 0");
  EnvelopeRow row;
  row.h = h;
  bool all_zero = true;
  for (Eigen::Index i = 0; i < psi.values.size() && all_zero; ++i) all_zero = psi.values(i) == 0.0;
  if (all_zero) return row;
  auto idx = window_indices(psi, w);
  if (idx.empty()) throw std::invalid_argument("Agmon window contains no grid points");
  auto phi = window_actions(psi, v, idx);
  const double up = (1.0 - w.delta) * (1.0 - w.delta) / h;
  const double down = (1.0 + w.delta) * (1.0 + w.delta) / h;
  bool first = true;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    ExtendedReal a = abs(psi.values(idx[k]));
    ExtendedReal c = a * exp(up * phi[k]);
    ExtendedReal d = a * exp(down * phi[k]);
    if (first || c > row.c_req) row.c_req = c;
    if (first || d < row.d_req) row.d_req = d;
    first = false;
  }
  return row;
}

ExtendedReal upper_envelope_constant(const EigenfunctionSamples& psi, const PotentialSpec& v, double h,
                                     const AgmonWindow& w) {
  return envelope_constants(psi, v, h, w).c_req;
}

ExtendedReal lower_envelope_constant(const EigenfunctionSamples& psi, const PotentialSpec& v, double h,
                                     const AgmonWindow& w) {
  return envelope_constants(psi, v, h, w).d_req;
}

const EnvelopeRow& EnvelopeReport::reference() const {
  if (rows.empty()) throw std::logic_error("empty envelope report");
  return *std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.h < b.h; });
}

ExtendedReal EnvelopeReport::max_c() const {
  ExtendedReal m = reference().c_req;
  for (const auto& r : rows) m = max(m, r.c_req);
  return m;
}

ExtendedReal EnvelopeReport::min_d() const {
  ExtendedReal m = reference().d_req;
  for (const auto& r : rows) m = min(m, r.d_req);
  return m;
}

bool EnvelopeReport::bounded(double factor) const {
  const auto& ref = reference();
  return max_c() <= factor * ref.c_req && min_d() >= ref.d_req / factor && min_d() > 0.0;
}

BoundaryValues boundary_value_scaled(const EigenfunctionSamples& psi, const ExtendedReal& energy, double h) {
  ExtendedReal x = turning_point(energy);
  if (!(x < psi.grid.half_width())) throw std::invalid_argument("turning point outside the grid");
  ExtendedReal scale = sqrt(sqrt(ExtendedReal(h)));
  return {scale * abs(psi.value_at(-x)), scale * abs(psi.value_at(x))};
}

BarrierReport barrier_comparison_check(const EigenfunctionSamples& psi, const PotentialSpec& v,
                                       const ExtendedReal& energy, double h, double x1, double x2, double eps,
                                       double side) {
  if (!(h > 0.0)) throw std::invalid_argument("barrier check needs h > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("barrier check needs eps > 0");
  if (!(x1 < x2)) throw std::invalid_argument("barrier check needs x1 < x2");
  // x1 usually arrives as sqrt(E) rounded to double.
  const ExtendedReal tp = turning_point(energy);
  if (ExtendedReal(x1) < tp - 1e-12 * max(tp, ExtendedReal(1.0)))
    throw std::invalid_argument("barrier check needs x1 at or beyond the turning point");
  const double far = x2 * (1.0 + eps);
  if (!(far <= psi.grid.half_width())) throw std::invalid_argument("barrier interval extends past the grid");
  if (side != 1.0 && side != -1.0) throw std::invalid_argument("side must be +1 or -1");

  // Sample the interval at the grid spacing, endpoints included.
  const double dx = psi.grid.spacing();
  const long count = std::max(2L, static_cast<long>(std::ceil((far - x1) / dx)) + 1);
  ExtendedReal vmax(0.0);
  for (long k = 0; k < count; ++k) {
    ExtendedReal t = ExtendedReal(x1) + (ExtendedReal(far) - x1) * (static_cast<double>(k) / (count - 1));
    vmax = max(vmax, v(side * t));
  }
  BarrierReport out;
  out.v = sqrt(vmax);
  ExtendedReal psi1 = abs(psi.value_at(ExtendedReal(side * x1)));
  out.lhs = abs(psi.value_at(ExtendedReal(side * x2)));
  out.rhs = exp(-out.v * (x2 - x1) / h) * (1.0 - exp(-2.0 * eps * out.v * x2 / h)) * psi1;
  out.holds = out.lhs >= out.rhs;
  out.margin = psi1 > 0.0 ? (out.lhs - out.rhs) / psi1 : ExtendedReal(0.0);
  return out;
}

PowerLawFit fit_power_law(const std::vector<double>& h, const std::vector<double>& y) {
  if (h.size() != y.size() || h.size() < 2) throw std::invalid_argument("power-law fit needs two or more points");
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixX2d a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(h[static_cast<std::size_t>(i)] > 0.0) || !(y[static_cast<std::size_t>(i)] > 0.0))
      throw std::invalid_argument("power-law fit needs positive data");
    a(i, 0) = 1.0;
    a(i, 1) = std::log(h[static_cast<std::size_t>(i)]);
    b(i) = std::log(y[static_cast<std::size_t>(i)]);
  }
  Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  double mean = b.mean();
  double ss_tot = (b.array() - mean).square().sum();
  double ss_res = (a * coef - b).squaredNorm();
  PowerLawFit fit;
  fit.log_prefactor = coef(0);
  fit.exponent = coef(1);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace isolab
