#pragma once

// Physicist's Hermite polynomials P_j, the normalized Hermite functions and
// the symmetric companion matrix whose eigenvalues are the roots of P_j.

#include "isolab/scalar.hpp"
#include "isolab/schrodinger.hpp"

#include <vector>

namespace isolab {

inline constexpr int kMaxHermiteFunctionOrder = 60;

/// P_j(x) by the forward recurrence P_{k+1} = 2x P_k - 2k P_{k-1}.
ExtendedReal hermite_poly(int j, const ExtendedReal& x);

/// (2^j j! sqrt(pi))^{-1/2} P_j(x) e^{-x^2/2}, evaluated through the
/// normalized three-term recurrence. Throws std::out_of_range for j outside
/// [0, 60].
ExtendedReal hermite_function(int j, const ExtendedReal& x);

/// Zero diagonal, off-diagonal sqrt(k/2) for k = 1..j-1; 2^j det(x - C_j) = P_j.
class CompanionMatrix {
 public:
  explicit CompanionMatrix(int j);

  int order() const { return j_; }
  const SymmetricTridiagonal<ExtendedReal>& matrix() const { return matrix_; }

  /// det(x - C_j) by the continuant recurrence.
  ExtendedReal characteristic(const ExtendedReal& x) const;

 private:
  int j_;
  SymmetricTridiagonal<ExtendedReal> matrix_;
};

/// The j roots of P_j, ascending, as Sturm-bisected eigenvalues of C_j.
std::vector<ExtendedReal> companion_roots(int j, double tol = 1e-28);

/// Roots of P_j located by sign changes of the recurrence on a uniform scan of
/// [-sqrt(2j-2)-1, sqrt(2j-2)+1] and refined by bisection. Independent of the
/// companion matrix; used as a cross-check.
std::vector<ExtendedReal> bisection_roots(int j, double scan_step = 1e-3, double tol = 1e-26);

/// sqrt((j-2)/2) + sqrt((j-1)/2). Throws std::domain_error for j < 2.
ExtendedReal root_bound(int j);

/// sqrt(2j-2).
ExtendedReal loose_root_bound(int j);

}  // namespace isolab
