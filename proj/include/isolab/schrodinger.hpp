#pragma once

// Finite-difference discretization of H = -h^2 d^2/dx^2 + V on a Dirichlet
// box, Sturm-sequence bisection for eigenvalues, inverse iteration for
// eigenvectors, and Richardson extrapolation in the grid spacing.

#include "isolab/potential.hpp"
#include "isolab/scalar.hpp"

#include <Eigen/Core>

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace isolab {

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform interior grid x_i = -L + i*dx, i = 1..n, dx = 2L/(n+1).
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(double half_width, std::size_t n);

  double half_width() const { return half_width_; }
  std::size_t size() const { return n_; }

  template <class Scalar = double>
  Scalar spacing() const {
    return Scalar(2.0 * half_width_) / Scalar(static_cast<double>(n_ + 1));
  }

  /// Point i in 1..n. Written as L(2i-n-1)/(n+1) so mirrored points are exact
  /// negatives of each other.
  template <class Scalar = double>
  Scalar point(std::size_t i) const {
    double numerator = 2.0 * static_cast<double>(i) - static_cast<double>(n_) - 1.0;
    return Scalar(half_width_) * Scalar(numerator) / Scalar(static_cast<double>(n_ + 1));
  }

  /// The grid with spacing divided by 2^levels; every point of this grid is
  /// also a point of the refined one.
  GridSpec refined(int levels) const;

 private:
  double half_width_ = 1.0;
  std::size_t n_ = 1;
};

template <class Scalar>
class SymmetricTridiagonal {
 public:
  using Vector = VectorX<Scalar>;

  SymmetricTridiagonal() = default;
  SymmetricTridiagonal(Vector diag, Vector offdiag) : diag_(std::move(diag)), offdiag_(std::move(offdiag)) {
    if (diag_.size() < 1) throw std::invalid_argument("tridiagonal matrix must be nonempty");
    if (offdiag_.size() != diag_.size() - 1) throw std::invalid_argument("off-diagonal must have n-1 entries");
    offdiag_sq_ = offdiag_.cwiseProduct(offdiag_);
  }

  Eigen::Index size() const { return diag_.size(); }
  const Vector& diagonal() const { return diag_; }
  const Vector& off_diagonal() const { return offdiag_; }
  const Vector& off_diagonal_squared() const { return offdiag_sq_; }

  /// Radius of Gershgorin disc i.
  Scalar radius(Eigen::Index i) const {
    using std::abs;
    Scalar r(0.0);
    if (i > 0) r += abs(offdiag_(i - 1));
    if (i + 1 < size()) r += abs(offdiag_(i));
    return r;
  }

  /// [min_i (d_i - r_i), max_i (d_i + r_i)], containing every eigenvalue.
  std::pair<Scalar, Scalar> gershgorin_bounds() const {
    Scalar lo = diag_(0) - radius(0);
    Scalar hi = diag_(0) + radius(0);
    for (Eigen::Index i = 1; i < size(); ++i) {
      Scalar r = radius(i);
      if (diag_(i) - r < lo) lo = diag_(i) - r;
      if (diag_(i) + r > hi) hi = diag_(i) + r;
    }
    return {lo, hi};
  }

  double norm_inf() const {
    using std::abs;
    double best = 0.0;
    for (Eigen::Index i = 0; i < size(); ++i) best = std::max(best, to_double(abs(diag_(i)) + radius(i)));
    return best;
  }

  Vector apply(const Vector& v) const {
    Vector out = diag_.cwiseProduct(v);
    const Eigen::Index n = size();
    if (n > 1) {
      out.head(n - 1) += offdiag_.cwiseProduct(v.tail(n - 1));
      out.tail(n - 1) += offdiag_.cwiseProduct(v.head(n - 1));
    }
    return out;
  }

  template <class Other>
  SymmetricTridiagonal<Other> cast() const {
    return SymmetricTridiagonal<Other>(diag_.template cast<Other>(), offdiag_.template cast<Other>());
  }

 private:
  Vector diag_;
  Vector offdiag_;
  Vector offdiag_sq_;
};

/// The discretized Hamiltonian with the parameters it was built from.
template <class Scalar>
struct TridiagonalOperator : SymmetricTridiagonal<Scalar> {
  TridiagonalOperator() = default;
  TridiagonalOperator(SymmetricTridiagonal<Scalar> matrix, double h_, GridSpec grid_)
      : SymmetricTridiagonal<Scalar>(std::move(matrix)), h(h_), grid(grid_) {}

  double h = 1.0;
  GridSpec grid;
};

/// diag_i = 2h^2/dx^2 + V(x_i), offdiag_i = -h^2/dx^2. `v` is any callable
/// Scalar -> Scalar; normally a PotentialSpec.
template <class Scalar, class Potential>
TridiagonalOperator<Scalar> discretize(const Potential& v, double h, const GridSpec& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("discretize: h must be positive");
  const auto n = static_cast<Eigen::Index>(grid.size());
  // h^2/dx^2 = h^2 (n+1)^2 / (4 L^2)
  Scalar np1(static_cast<double>(grid.size() + 1));
  Scalar kinetic = Scalar(h) * Scalar(h) * np1 * np1 / (Scalar(4.0) * Scalar(grid.half_width()) * Scalar(grid.half_width()));
  VectorX<Scalar> diag(n);
  VectorX<Scalar> off = VectorX<Scalar>::Constant(n - 1, -kinetic);
  for (Eigen::Index i = 0; i < n; ++i) diag(i) = 2.0 * kinetic + v(grid.point<Scalar>(static_cast<std::size_t>(i + 1)));
  return TridiagonalOperator<Scalar>(SymmetricTridiagonal<Scalar>(std::move(diag), std::move(off)), h, grid);
}

inline constexpr double kZeroPivotGuard = 1e-60;

/// Number of eigenvalues strictly below `lambda`: the count of negative
/// pivots in the LDL^T factorization of T - lambda.
template <class Scalar>
Eigen::Index sturm_count(const SymmetricTridiagonal<Scalar>& t, const Scalar& lambda) {
  const auto& d = t.diagonal();
  const auto& e2 = t.off_diagonal_squared();
  const Eigen::Index n = t.size();
  Eigen::Index count = 0;
  Scalar q = d(0) - lambda;
  for (Eigen::Index i = 0;; ++i) {
    if (q == Scalar(0.0)) q = Scalar(-kZeroPivotGuard);
    if (q < Scalar(0.0)) ++count;
    if (i + 1 == n) break;
    q = (d(i + 1) - lambda) - e2(i) / q;
  }
  return count;
}

template <>
Eigen::Index sturm_count<DoubleDouble>(const SymmetricTridiagonal<DoubleDouble>& t, const DoubleDouble& lambda);

namespace detail {

template <class Scalar>
Scalar bisect(const SymmetricTridiagonal<Scalar>& t, Eigen::Index j, Scalar lo, Scalar hi, const Scalar& tol) {
  while (hi - lo > tol) {
    Scalar mid = (lo + hi) * 0.5;
    if (!(mid > lo && mid < hi)) break;  // bracket is one ulp wide
    if (sturm_count(t, mid) > j)
      hi = mid;
    else
      lo = mid;
  }
  return (lo + hi) * 0.5;
}

}  // namespace detail

/// Eigenvalue j (0-based, ascending) by bisection on the Sturm count to a
/// bracket of width <= tol. Extended-precision inputs are first localized in
/// double precision, then the bracket is verified and refined in Scalar.
/// Throws std::runtime_error if the Sturm counts are inconsistent.
template <class Scalar>
Scalar eigenvalue(const SymmetricTridiagonal<Scalar>& t, Eigen::Index j, const Scalar& tol) {
  if (j < 0 || j >= t.size()) throw std::out_of_range("eigenvalue index outside [0, n)");
  if (!(tol > Scalar(0.0))) throw std::invalid_argument("eigenvalue tolerance must be positive");

  const double norm = t.norm_inf();
  auto [lo, hi] = t.gershgorin_bounds();
  Scalar slack(4.0 * ScalarTraits<Scalar>::epsilon() * norm + kZeroPivotGuard);
  lo -= slack;
  hi += slack;
  if (sturm_count(t, lo) != 0 || sturm_count(t, hi) != t.size())
    throw std::runtime_error("inconsistent Sturm counts at the Gershgorin bounds");

  if constexpr (!std::is_same_v<Scalar, double>) {
    SymmetricTridiagonal<double> shadow = t.template cast<double>();
    double estimate = detail::bisect<double>(shadow, j, to_double(lo), to_double(hi), 0.0);
    // Double-precision counts are exact for a matrix within a few ulps of T.
    double width = 16.0 * ScalarTraits<double>::epsilon() * norm;
    Scalar a = Scalar(estimate) - Scalar(width);
    Scalar b = Scalar(estimate) + Scalar(width);
    for (int grow = 0; grow < 60 && !(a <= lo) && sturm_count(t, a) > j; ++grow) {
      width *= 2.0;
      a = Scalar(estimate) - Scalar(width);
    }
    for (int grow = 0; grow < 60 && !(b >= hi) && sturm_count(t, b) <= j; ++grow) {
      width *= 2.0;
      b = Scalar(estimate) + Scalar(width);
    }
    // Keep the Gershgorin end when the shadow bracket fails to verify.
    if (a > lo && sturm_count(t, a) <= j) lo = a;
    if (b < hi && sturm_count(t, b) > j) hi = b;
    if (sturm_count(t, lo) > j || sturm_count(t, hi) <= j)
      throw std::runtime_error("could not bracket eigenvalue " + std::to_string(j));
  }
  return detail::bisect(t, j, lo, hi, tol);
}

/// Pivoted LU of a tridiagonal T - shift (the LAPACK gttrf layout), used for
/// inverse iteration. Exact zero pivots are replaced by eps*||T||.
template <class Scalar>
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(const SymmetricTridiagonal<Scalar>& t, const Scalar& shift) {
    using std::abs;
    const Eigen::Index n = t.size();
    d_ = t.diagonal().array() - shift;
    dl_ = t.off_diagonal();
    du_ = t.off_diagonal();
    du2_ = VectorX<Scalar>::Zero(std::max<Eigen::Index>(n - 2, 0));
    swapped_.assign(static_cast<std::size_t>(n), false);
    const Scalar tiny(ScalarTraits<Scalar>::epsilon() * std::max(t.norm_inf(), 1.0));
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (abs(d_(i)) >= abs(dl_(i))) {
        if (d_(i) == Scalar(0.0)) d_(i) = tiny;
        Scalar factor = dl_(i) / d_(i);
        dl_(i) = factor;
        d_(i + 1) -= factor * du_(i);
      } else {
        Scalar factor = d_(i) / dl_(i);
        d_(i) = dl_(i);
        dl_(i) = factor;
        Scalar temp = du_(i);
        du_(i) = d_(i + 1);
        d_(i + 1) = temp - factor * d_(i + 1);
        if (i + 2 < n) {
          du2_(i) = du_(i + 1);
          du_(i + 1) = -factor * du_(i + 1);
        }
        swapped_[static_cast<std::size_t>(i)] = true;
      }
    }
    if (d_(n - 1) == Scalar(0.0)) d_(n - 1) = tiny;
  }

  VectorX<Scalar> solve(VectorX<Scalar> b) const {
    const Eigen::Index n = d_.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      if (!swapped_[static_cast<std::size_t>(i)]) {
        b(i + 1) -= dl_(i) * b(i);
      } else {
        Scalar temp = b(i);
        b(i) = b(i + 1);
        b(i + 1) = temp - dl_(i) * b(i);
      }
    }
    b(n - 1) /= d_(n - 1);
    if (n > 1) b(n - 2) = (b(n - 2) - du_(n - 2) * b(n - 1)) / d_(n - 2);
    for (Eigen::Index i = n - 3; i >= 0; --i) b(i) = (b(i) - du_(i) * b(i + 1) - du2_(i) * b(i + 2)) / d_(i);
    return b;
  }

 private:
  VectorX<Scalar> d_, dl_, du_, du2_;
  std::vector<bool> swapped_;
};

struct InverseIterationResult {
  double residual = 0.0;  // ||(T - E)v|| / ||v||
  int iterations = 0;
};

/// Unit-2-norm eigenvector for the eigenvalue nearest `shift`. Iterates until
/// the residual reaches `residual_tol`; once the residual stops improving, a
/// value at most `accept_tol` (the rounding floor of large operators) is also
/// accepted. Throws std::runtime_error when neither happens within
/// `max_iterations` solves (a bad shift).
template <class Scalar>
VectorX<Scalar> inverse_iteration(const SymmetricTridiagonal<Scalar>& t, const Scalar& shift, double residual_tol,
                                  int max_iterations = 50, InverseIterationResult* info = nullptr,
                                  double accept_tol = 0.0) {
  using std::sqrt;
  accept_tol = std::max(accept_tol, residual_tol);
  ShiftedTridiagonalLU<Scalar> lu(t, shift);
  const Eigen::Index n = t.size();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  VectorX<Scalar> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Scalar(unif(rng));
  v /= sqrt(v.squaredNorm());
  double residual = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= max_iterations; ++iter) {
    v = lu.solve(std::move(v));
    v /= sqrt(v.squaredNorm());
    VectorX<Scalar> r = t.apply(v) - shift * v;
    residual = to_double(sqrt(r.squaredNorm()));
    bool stalled = iter > 2 && residual > 0.5 * previous;
    if (residual <= residual_tol || (stalled && residual <= accept_tol)) {
      if (info) *info = {residual, iter};
      return v;
    }
    previous = residual;
  }
  throw std::runtime_error("inverse iteration did not converge (residual " + std::to_string(residual) + ")");
}

enum class SignConvention { LargestMagnitudePositive };

/// Grid samples of an eigenfunction, normalized so the trapezoid rule gives
/// unit L^2 norm (the Dirichlet end values are zero).
struct EigenfunctionSamples {
  VectorX<ExtendedReal> values;
  GridSpec grid;
  ExtendedReal eigenvalue;
  SignConvention sign = SignConvention::LargestMagnitudePositive;
  double residual = 0.0;

  ExtendedReal x(Eigen::Index i) const { return grid.point<ExtendedReal>(static_cast<std::size_t>(i + 1)); }

  /// Linear interpolation between neighbouring samples; zero outside (-L, L).
  ExtendedReal value_at(const ExtendedReal& x) const;

  ExtendedReal trapezoid_norm_squared() const;
};

/// Scales `v` to unit trapezoid norm on `grid` and applies the sign
/// convention.
void normalize_samples(VectorX<ExtendedReal>& v, const GridSpec& grid);

struct SolverOptions {
  double eigen_tol = 1e-28;      // absolute bisection width
  double residual_tol = 1e-25;   // inverse-iteration residual target
  int max_iterations = 50;
  int refinements = 2;           // Richardson levels beyond the base grid
};

/// Eigenfunction of `t` for eigenvalue estimate `energy`.
EigenfunctionSamples eigenfunction(const TridiagonalOperator<ExtendedReal>& t, const ExtendedReal& energy,
                                   const SolverOptions& options = {});

/// Error bound for a bisected eigenvalue of `t` coming from rounding alone:
/// Sturm counts in floating point are exact for a matrix perturbed entrywise
/// by a few ulps.
double roundoff_bound(const SymmetricTridiagonal<ExtendedReal>& t, const SolverOptions& options);

struct RichardsonResult {
  ExtendedReal value;
  ExtendedReal last_correction;
};

/// Two Richardson steps for an even expansion in the spacing: values at
/// dx, dx/2, dx/4 combine to orders 2 -> 4 -> 6.
RichardsonResult richardson(const std::array<ExtendedReal, 3>& levels);

/// Raw eigenvalues at dx, dx/2, dx/4 plus the roundoff bound on the finest.
struct LevelEigenvalues {
  std::array<ExtendedReal, 3> values;
  double roundoff = 0.0;
};

template <class Potential>
LevelEigenvalues solve_levels(const Potential& v, double h, Eigen::Index j, const GridSpec& grid,
                              const SolverOptions& options = {}) {
  LevelEigenvalues out;
  const ExtendedReal tol(options.eigen_tol);
  for (int level = 0; level < 3; ++level) {
    auto t = discretize<ExtendedReal>(v, h, grid.refined(level));
    out.values[static_cast<std::size_t>(level)] = eigenvalue(t, j, tol);
    if (level == 2) out.roundoff = roundoff_bound(t, options);
  }
  return out;
}

struct ExtrapolatedEigenvalue {
  ExtendedReal value;
  ExtendedReal error_estimate;  // |last Richardson correction| + rounding bound
  LevelEigenvalues levels;
};

ExtrapolatedEigenvalue extrapolate(const LevelEigenvalues& levels);

template <class Potential>
ExtrapolatedEigenvalue solve_extrapolated(const Potential& v, double h, Eigen::Index j, const GridSpec& grid,
                                          const SolverOptions& options = {}) {
  return extrapolate(solve_levels(v, h, j, grid, options));
}

/// Combines eigenvectors from the three nested grids at the points they share.
EigenfunctionSamples combine_levels(const std::array<EigenfunctionSamples, 3>& levels, const GridSpec& grid);

/// Eigenfunction on `grid` with the same Richardson combination applied to
/// the samples shared by the three nested grids.
template <class Potential>
EigenfunctionSamples eigenfunction_extrapolated(const Potential& v, double h, Eigen::Index j, const GridSpec& grid,
                                                const SolverOptions& options = {}) {
  const ExtendedReal tol(options.eigen_tol);
  std::array<EigenfunctionSamples, 3> levels;
  for (int level = 0; level < 3; ++level) {
    auto t = discretize<ExtendedReal>(v, h, grid.refined(level));
    levels[static_cast<std::size_t>(level)] = eigenfunction(t, eigenvalue(t, j, tol), options);
  }
  return combine_levels(levels, grid);
}

struct SpectrumEntry {
  Eigen::Index j = 0;
  ExtendedReal eigenvalue;
  ExtendedReal error_estimate;
};

struct Spectrum {
  double h = 0.0;
  GridSpec grid;
  std::vector<SpectrumEntry> entries;
};

/// Extrapolated eigenvalues 0..j_max. Throws std::runtime_error if they fail
/// to come out strictly increasing.
template <class Potential>
Spectrum solve_spectrum(const Potential& v, double h, Eigen::Index j_max, const GridSpec& grid,
                        const SolverOptions& options = {}) {
  Spectrum s;
  s.h = h;
  s.grid = grid;
  for (Eigen::Index j = 0; j <= j_max; ++j) {
    auto e = solve_extrapolated(v, h, j, grid, options);
    if (!s.entries.empty() && !(e.value > s.entries.back().eigenvalue))
      throw std::runtime_error("eigenvalues not strictly increasing at j=" + std::to_string(j));
    s.entries.push_back({j, e.value, e.error_estimate});
  }
  return s;
}

inline constexpr std::array<double, 4> kDomainCandidates{6.0, 8.0, 10.0, 12.0};

/// Smallest half-width L in {6, 8, 10, 12} whose Agmon truncation estimate
/// exp(-2(1-delta)^2 Phi(L)/h), delta = 0.2, is at most `target`, and which
/// also clears the turning point of level j by a wide margin.
GridSpec choose_domain(const PotentialSpec& v, double h, Eigen::Index j, double target, std::size_t n = 16384);

/// log10 of the truncation estimate used by choose_domain.
double truncation_estimate_log10(const PotentialSpec& v, double h, double half_width);

}  // namespace isolab
