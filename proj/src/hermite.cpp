#include "isolab/hermite.hpp"

#include <cmath>
#include <stdexcept>

namespace isolab {

ExtendedReal hermite_poly(int j, const ExtendedReal& x) {
  if (j < 0) throw std::invalid_argument("hermite_poly: negative order");
  ExtendedReal previous(1.0);
  if (j == 0) return previous;
  ExtendedReal current = 2.0 * x;
  for (int k = 1; k < j; ++k) {
    ExtendedReal next = 2.0 * x * current - (2.0 * k) * previous;
    previous = current;
    current = next;
  }
  return current;
}

ExtendedReal hermite_function(int j, const ExtendedReal& x) {
  if (j < 0 || j > kMaxHermiteFunctionOrder)
    throw std::out_of_range("hermite_function: order outside [0, 60]");
  ExtendedReal previous = exp(-0.5 * x * x) / sqrt(sqrt(constants::pi));
  if (j == 0) return previous;
  ExtendedReal current = sqrt(ExtendedReal(2.0)) * x * previous;
  for (int k = 1; k < j; ++k) {
    ExtendedReal kp1(static_cast<double>(k + 1));
    ExtendedReal next = sqrt(2.0 / kp1) * x * current - sqrt(ExtendedReal(static_cast<double>(k)) / kp1) * previous;
    previous = current;
    current = next;
  }
  return current;
}

CompanionMatrix::CompanionMatrix(int j) : j_(j) {
  if (j < 1) throw std::invalid_argument("companion matrix needs order >= 1");
  VectorX<ExtendedReal> diag = VectorX<ExtendedReal>::Zero(j);
  VectorX<ExtendedReal> off(j - 1);
  for (int k = 1; k < j; ++k) off(k - 1) = sqrt(ExtendedReal(static_cast<double>(k)) / 2.0);
  matrix_ = SymmetricTridiagonal<ExtendedReal>(std::move(diag), std::move(off));
}

ExtendedReal CompanionMatrix::characteristic(const ExtendedReal& x) const {
  ExtendedReal previous(1.0);
  ExtendedReal current = x;
  for (int k = 1; k < j_; ++k) {
    ExtendedReal next = x * current - (k / 2.0) * previous;
    previous = current;
    current = next;
  }
  return current;
}

std::vector<ExtendedReal> companion_roots(int j, double tol) {
  CompanionMatrix c(j);
  std::vector<ExtendedReal> roots;
  roots.reserve(static_cast<std::size_t>(j));
  for (int i = 0; i < j; ++i) roots.push_back(eigenvalue(c.matrix(), i, ExtendedReal(tol)));
  return roots;
}

std::vector<ExtendedReal> bisection_roots(int j, double scan_step, double tol) {
  if (j < 1) return {};
  if (!(scan_step > 0.0) || !(tol > 0.0)) throw std::invalid_argument("bisection_roots: step and tol must be positive");
  const double reach = std::sqrt(2.0 * j - 2.0) + 1.0;
  const long steps = static_cast<long>(std::ceil(2.0 * reach / scan_step));
  std::vector<ExtendedReal> roots;
  ExtendedReal a(-reach);
  ExtendedReal pa = hermite_poly(j, a);
  for (long s = 1; s <= steps; ++s) {
    ExtendedReal b(-reach + 2.0 * reach * static_cast<double>(s) / static_cast<double>(steps));
    ExtendedReal pb = hermite_poly(j, b);
    if (pb == 0.0) {
      roots.push_back(b);
    } else if (pa != 0.0 && signbit(pa) != signbit(pb)) {
      ExtendedReal lo = a, hi = b;
      const bool lo_negative = signbit(pa);
      while (hi - lo > tol) {
        ExtendedReal mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        ExtendedReal pm = hermite_poly(j, mid);
        if (pm == 0.0) {
          lo = hi = mid;
          break;
        }
        (signbit(pm) == lo_negative ? lo : hi) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    pa = pb;
  }
  return roots;
}

ExtendedReal root_bound(int j) {
  if (j < 2) throw std::domain_error("root_bound: defined for j >= 2");
  return sqrt(ExtendedReal(j - 2.0) / 2.0) + sqrt(ExtendedReal(j - 1.0) / 2.0);
}

ExtendedReal loose_root_bound(int j) {
  if (j < 1) throw std::domain_error("loose_root_bound: defined for j >= 1");
  return sqrt(ExtendedReal(2.0 * j - 2.0));
}

}  // namespace isolab
