#pragma once

// Empirical checks of the eigenfunction decay estimates: two-sided Agmon
// envelopes on an annulus r < |x| < R, the scaled value at the turning
// points, and the barrier comparison inequality.

#include "isolab/potential.hpp"
#include "isolab/schrodinger.hpp"

#include <utility>
#include <vector>

namespace isolab {

struct AgmonWindow {
  double r = 2.5;
  double R = 4.5;
  double delta = 0.2;

  AgmonWindow() = default;
  AgmonWindow(double r_, double R_, double delta_);
};

/// sqrt(E). Throws std::domain_error for E < 0.
ExtendedReal turning_point(const ExtendedReal& energy);

/// Grid indices with r < |x| < R. Throws std::invalid_argument if R exceeds
/// the grid half-width or if psi vanishes or changes sign among the samples
/// on either side (the window must avoid nodes; r beyond the turning point
/// guarantees this).
std::vector<Eigen::Index> window_indices(const EigenfunctionSamples& psi, const AgmonWindow& w);

/// max over window samples of |psi(x)| exp((1-delta)^2 Phi(x)/h). A zero
/// eigenfunction gives 0.
ExtendedReal upper_envelope_constant(const EigenfunctionSamples& psi, const PotentialSpec& v, double h,
                                     const AgmonWindow& w);

/// min over window samples of |psi(x)| exp((1+delta)^2 Phi(x)/h).
ExtendedReal lower_envelope_constant(const EigenfunctionSamples& psi, const PotentialSpec& v, double h,
                                     const AgmonWindow& w);

struct EnvelopeRow {
  double h = 0.0;
  ExtendedReal c_req;
  ExtendedReal d_req;
};

struct EnvelopeReport {
  AgmonWindow window;
  Eigen::Index j = 0;
  std::vector<EnvelopeRow> rows;

  /// Row with the largest h.
  const EnvelopeRow& reference() const;
  ExtendedReal max_c() const;
  ExtendedReal min_d() const;
  /// max C <= factor * C(ref) and min D >= D(ref) / factor.
  bool bounded(double factor = 3.0) const;
};

/// Both constants for one eigenfunction in a single pass over the window.
EnvelopeRow envelope_constants(const EigenfunctionSamples& psi, const PotentialSpec& v, double h,
                               const AgmonWindow& w);

struct BoundaryValues {
  ExtendedReal left;
  ExtendedReal right;
};

/// h^{1/4} |psi(-sqrt(E))| and h^{1/4} |psi(+sqrt(E))|, interpolating
/// linearly between neighbouring samples.
BoundaryValues boundary_value_scaled(const EigenfunctionSamples& psi, const ExtendedReal& energy, double h);

struct BarrierReport {
  ExtendedReal lhs;
  ExtendedReal rhs;
  ExtendedReal v;  // sup of sqrt(V) over [x1, x2(1+eps)]
  bool holds = false;
  /// lhs - rhs relative to |psi(x1)|.
  ExtendedReal margin;
};

/// |psi(x2)| >= exp(-v(x2-x1)/h) (1 - exp(-2 eps v x2/h)) |psi(x1)| on the
/// half-line selected by `side` (+1 or -1). Requires sqrt(E) <= x1 < x2,
/// eps > 0 and x2(1+eps) inside the grid; throws std::invalid_argument
/// otherwise.
BarrierReport barrier_comparison_check(const EigenfunctionSamples& psi, const PotentialSpec& v,
                                       const ExtendedReal& energy, double h, double x1, double x2, double eps,
                                       double side = 1.0);

struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
};

/// Least squares fit of log y = log_prefactor + exponent * log h.
PowerLawFit fit_power_law(const std::vector<double>& h, const std::vector<double>& y);

}  // namespace isolab
