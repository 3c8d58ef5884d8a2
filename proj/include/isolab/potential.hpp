#pragma once

#include "isolab/scalar.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace isolab {

/// Smooth compactly supported bump A*exp(-1/(1-u^2)), u the position rescaled
/// so the support (lo, hi) maps onto (-1, 1).
struct BumpSpec {
  double support_lo = 0.0;
  double support_hi = 1.0;
  double amplitude = 0.0;

  BumpSpec() = default;
  BumpSpec(double lo, double hi, double amp);

  template <class Scalar>
  Scalar operator()(const Scalar& x) const {
    using std::exp;
    Scalar u = (2.0 * x - (support_lo + support_hi)) / (support_hi - support_lo);
    Scalar one_minus = 1.0 - u * u;
    if (!(one_minus > 0.0) || amplitude == 0.0) return Scalar(0.0);
    return amplitude * exp(-1.0 / one_minus);
  }

  bool active_at(double x) const { return x > support_lo && x < support_hi; }
};

enum class Orientation : int { Plus = 1, Minus = -1 };

inline double sign_of(Orientation o) { return static_cast<double>(static_cast<int>(o)); }

/// A bump placed as b(s*x), s = +1 or -1.
struct PlacedBump {
  BumpSpec bump;
  Orientation orientation = Orientation::Plus;

  template <class Scalar>
  Scalar operator()(const Scalar& x) const {
    return orientation == Orientation::Plus ? bump(x) : bump(Scalar(-x));
  }
};

/// V(x) = x^2 + sum of placed bumps. Immutable once built.
class PotentialSpec {
 public:
  PotentialSpec() = default;
  explicit PotentialSpec(std::vector<PlacedBump> bumps);

  template <class Scalar>
  Scalar operator()(const Scalar& x) const {
    Scalar v = x * x;
    for (const auto& b : bumps_) v += b(x);
    return v;
  }

  const std::vector<PlacedBump>& bumps() const { return bumps_; }

  /// Largest |x| touched by any bump; V(x) = x^2 beyond it.
  double reach() const;

  /// Support endpoints of all bumps, mapped to the x axis and sorted.
  std::vector<double> breakpoints() const;

  /// x -> V(-x).
  PotentialSpec reflected() const;

  bool is_even() const;

 private:
  std::vector<PlacedBump> bumps_;
};

struct PotentialPair {
  PotentialSpec minus;  // x^2 + alpha(x) + beta(-x)
  PotentialSpec plus;   // x^2 + alpha(x) + beta(x)
  BumpSpec alpha;
  BumpSpec beta;
};

/// Builds V^(+-)(x) = x^2 + alpha(x) + beta(+-x). Requires supp(alpha) inside
/// (1,2) and supp(beta) inside (3,4); throws std::invalid_argument otherwise.
PotentialPair make_pair(const BumpSpec& alpha, const BumpSpec& beta);

/// The default pair: alpha on (1.1, 1.9) with amplitude 0.5 and beta on
/// (3.1, 3.9) with amplitude 1.0.
PotentialPair default_pair();

/// Tunneling action |int_0^x sqrt(V(t)) dt| to absolute error `tol`.
ExtendedReal tunneling_action(const PotentialSpec& v, const ExtendedReal& x, double tol = 1e-20);

/// Tunneling action at each of `points` (any order), sharing the cumulative
/// integral between consecutive points on each side of the origin.
std::vector<ExtendedReal> tunneling_action_table(const PotentialSpec& v, const std::vector<ExtendedReal>& points,
                                                 double tol = 1e-20);

struct IsometryReport {
  double max_direct_diff = 0.0;     // max |V1(x) - V2(x)|
  double max_reflected_diff = 0.0;  // max |V1(-x) - V2(x)|
  bool non_isometric() const { return max_direct_diff > 0.0 && max_reflected_diff > 0.0; }
};

/// Compares two potentials on `samples` uniform points covering every bump.
/// The only isometries of the line preserving the x^2 tail are x -> x and
/// x -> -x, so both differences being positive certifies non-isometry.
IsometryReport check_non_isometric(const PotentialSpec& v1, const PotentialSpec& v2, int samples);

}  // namespace isolab
