#pragma once

// h-sweeps of the V+- spectra, superpolynomial-agreement diagnostics, gap
// rate fits against the action bracket, Hadamard's variational formula and
// convergence of the rescaled eigenfunctions to Hermite functions.

#include "isolab/potential.hpp"
#include "isolab/schrodinger.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace isolab {

/// A solver failure tagged with the (h, j) it happened at.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(double h, Eigen::Index j, const std::string& what);
  double h;
  Eigen::Index j;
};

/// Raised when the rate fit is handed a gap that is not strictly positive and
/// above the noise floor.
class FitRefused : public std::runtime_error {
 public:
  FitRefused(double h, Eigen::Index j, const std::string& what);
  double h;
  Eigen::Index j;
};

inline constexpr double kNoiseFactor = 10.0;
inline constexpr Eigen::Index kMaxSweepIndex = 5;

struct SweepOptions {
  std::size_t n = 16384;
  double truncation_target = 1e-30;
  std::optional<double> half_width;  // overrides choose_domain
  SolverOptions solver;
  unsigned jobs = 0;                 // 0: hardware concurrency
};

struct SweepRecord {
  double h = 0.0;
  Eigen::Index j = 0;
  double half_width = 0.0;
  ExtendedReal e_plus;
  ExtendedReal e_minus;
  ExtendedReal gap;  // E_minus - E_plus, Richardson applied to the gap sequence
  ExtendedReal harmonic_ref;
  ExtendedReal err_plus;
  ExtendedReal err_minus;
  ExtendedReal gap_error;

  /// |gap| above kNoiseFactor times its error estimate.
  bool usable() const { return abs(gap) > kNoiseFactor * gap_error; }
};

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// The default h grid: `count` points log-spaced from `hi` down to `lo`.
std::vector<double> log_spaced_descending(double hi, double lo, std::size_t count);

/// One record per (h, j), j = 0..j_max, ordered as h_grid then j. Both
/// potentials use the identical grid at each h. Throws std::invalid_argument
/// on bad input and SolverFailure on a solver error.
std::vector<SweepRecord> sweep(const PotentialPair& pair, const std::vector<double>& h_grid, Eigen::Index j_max,
                               const SweepOptions& options = {});

/// One record from the level eigenvalues of both potentials.
SweepRecord make_record(double h, Eigen::Index j, double half_width, const LevelEigenvalues& plus,
                        const LevelEigenvalues& minus);

struct LocalOrder {
  double h_hi = 0.0;
  double h_lo = 0.0;
  double order = 0.0;
};

struct AgreementSeries {
  Eigen::Index j = 0;
  std::vector<LocalOrder> gap;
  std::vector<LocalOrder> plus_vs_harmonic;
  std::vector<LocalOrder> minus_vs_harmonic;
  std::vector<double> skipped_h;  // points under the noise floor

  /// Local orders of the gap strictly increase as h decreases.
  bool gap_order_increasing() const;
};

/// log(D_k / D_{k+1}) / log(h_k / h_{k+1}) between consecutive h values.
/// Pairs touching a value under the noise floor are skipped.
std::vector<LocalOrder> local_orders(const std::vector<double>& h, const std::vector<ExtendedReal>& values,
                                     const std::vector<ExtendedReal>& errors);

/// Diagnostics per j present in `records`. Needs at least 4 h values.
std::vector<AgreementSeries> superpoly_agreement(const std::vector<SweepRecord>& records);

struct ActionBracket {
  double c_lo = 0.0;  // 2 Phi(V-) up to where beta begins
  double c_hi = 0.0;  // 2 Phi(V+) through supp beta, every bump at full strength
  double minus_through_beta = 0.0;  // 2 Phi(V-) through supp beta at full strength
  double plus_alpha_only = 0.0;     // 2 Phi through supp beta with alpha and no beta
};

/// Quadrature values of the exponents bracketing the gap decay rate.
ActionBracket action_bracket(const PotentialPair& pair);

struct RateFit {
  Eigen::Index j = 0;
  double slope = 0.0;      // c-hat: minus the slope of log(gap) against 1/h
  double intercept = 0.0;  // log prefactor
  double r_squared = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  std::size_t points = 0;
  ActionBracket bracket;

  bool in_bracket(double low_factor = 0.8, double high_factor = 1.2) const {
    return slope >= low_factor * bracket.c_lo && slope <= high_factor * bracket.c_hi;
  }
};

/// Least squares log(gap) = intercept - slope / h. Needs at least 5 records
/// with one j; throws FitRefused naming the first bad (h, j) if a gap is not
/// positive and usable.
RateFit fit_rate(const std::vector<SweepRecord>& records, const ActionBracket& bracket);

/// x^2 + alpha(x) + t beta(+-x).
struct VariationFamily {
  BumpSpec alpha;
  BumpSpec beta;
  Orientation orientation = Orientation::Plus;

  PotentialSpec at(double t) const;
};

struct HadamardReport {
  ExtendedReal fd_derivative;
  ExtendedReal quadrature_derivative;
  double rel_err = 0.0;
};

/// Trapezoid sum of beta(+-x) psi(x)^2 over the grid.
ExtendedReal hadamard_integral(const VariationFamily& fam, const EigenfunctionSamples& psi);

/// Central difference of E_j(t) against the Hadamard integral at t.
HadamardReport hadamard_check(const VariationFamily& fam, double h, Eigen::Index j, double t, double dt,
                              const GridSpec& grid, const SolverOptions& options = {});

struct FundamentalTheoremReport {
  ExtendedReal direct;      // E(1) - E(0)
  ExtendedReal integrated;  // Gauss-Legendre integral of the Hadamard derivative
  double rel_err = 0.0;
};

/// Compares E(1) - E(0) with the s-integral of the Hadamard derivative using
/// `n_steps` Gauss-Legendre nodes (8, 16 or 32).
FundamentalTheoremReport fundamental_theorem_check(const VariationFamily& fam, double h, Eigen::Index j,
                                                   int n_steps, const GridSpec& grid,
                                                   const SolverOptions& options = {}, unsigned jobs = 1);

struct RescalingRow {
  double h = 0.0;
  double l2_diff = 0.0;
  double linf_diff = 0.0;
};

/// h^{1/4} psi_j(sqrt(h) y) against the Hermite function kappa_j(y) on
/// [lo, hi], for each h. Grids come from choose_domain at each h.
std::vector<RescalingRow> rescaling_convergence(const PotentialSpec& v, Eigen::Index j,
                                                const std::vector<double>& h_grid, double lo, double hi,
                                                const SweepOptions& options = {});

/// Differences for one eigenfunction.
RescalingRow rescaled_difference(const EigenfunctionSamples& psi, Eigen::Index j, double h, double lo, double hi);

}  // namespace isolab
