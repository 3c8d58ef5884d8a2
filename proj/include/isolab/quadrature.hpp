#pragma once

#include "isolab/scalar.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace isolab {

template <class Scalar, int Points>
struct GaussLegendreRule {
  Eigen::Matrix<Scalar, Points, 1> nodes;
  Eigen::Matrix<Scalar, Points, 1> weights;
};

namespace detail {

// P_n(x) and P_n'(x) by the three-term recurrence.
template <class Scalar>
std::pair<Scalar, Scalar> legendre_with_derivative(int n, const Scalar& x) {
  Scalar p0(1.0);
  Scalar p1 = x;
  for (int k = 2; k <= n; ++k) {
    Scalar p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = p2;
  }
  Scalar dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

template <class Scalar, int Points>
GaussLegendreRule<Scalar, Points> build_gauss_legendre() {
  using std::abs;
  GaussLegendreRule<Scalar, Points> rule;
  const double tol = 8.0 * ScalarTraits<Scalar>::epsilon();
  for (int i = 0; i < (Points + 1) / 2; ++i) {
    Scalar x(std::cos(M_PI * (i + 0.75) / (Points + 0.5)));
    Scalar dp;
    for (int iter = 0; iter < 100; ++iter) {
      auto [p, d] = legendre_with_derivative(Points, x);
      dp = d;
      Scalar dx = p / d;
      x -= dx;
      if (to_double(abs(dx)) <= tol) break;
    }
    dp = legendre_with_derivative(Points, x).second;
    Scalar w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = -x;
    rule.nodes(Points - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(Points - 1 - i) = w;
  }
  if (Points % 2 == 1) rule.nodes(Points / 2) = Scalar(0.0);
  return rule;
}

}  // namespace detail

// Nodes and weights on [-1, 1], computed once per scalar type.
template <class Scalar, int Points>
const GaussLegendreRule<Scalar, Points>& gauss_legendre() {
  static const GaussLegendreRule<Scalar, Points> rule = detail::build_gauss_legendre<Scalar, Points>();
  return rule;
}

template <int Points, class Scalar, class F>
Scalar integrate_gauss_legendre(F&& f, const Scalar& a, const Scalar& b) {
  const auto& rule = gauss_legendre<Scalar, Points>();
  Scalar half = (b - a) * 0.5;
  Scalar mid = (b + a) * 0.5;
  Scalar sum(0.0);
  for (int i = 0; i < Points; ++i) sum += rule.weights(i) * f(mid + half * rule.nodes(i));
  return sum * half;
}

namespace detail {

template <class Scalar, class F>
Scalar adaptive_panel(F& f, const Scalar& a, const Scalar& b, const Scalar& whole, double tol, int depth) {
  using std::abs;
  Scalar mid = (a + b) * 0.5;
  Scalar left = integrate_gauss_legendre<15>(f, a, mid);
  Scalar right = integrate_gauss_legendre<15>(f, mid, b);
  Scalar refined = left + right;
  if (to_double(abs(refined - whole)) <= tol) return refined;
  if (depth == 0) throw std::runtime_error("adaptive quadrature: recursion limit reached");
  return adaptive_panel(f, a, mid, left, tol * 0.5, depth - 1) +
         adaptive_panel(f, mid, b, right, tol * 0.5, depth - 1);
}

}  // namespace detail

/// Adaptive 15-point Gauss-Legendre with recursive bisection. A panel is
/// accepted when its two halves agree with the whole to the panel's share of
/// `tol`; the returned value is the refined (halved) estimate.
template <class Scalar, class F>
Scalar integrate_adaptive(F&& f, const Scalar& a, const Scalar& b, double tol, int max_depth = 40) {
  if (!(tol > 0.0)) throw std::invalid_argument("integrate_adaptive: tolerance must be positive");
  if (a == b) return Scalar(0.0);
  Scalar whole = integrate_gauss_legendre<15>(f, a, b);
  return detail::adaptive_panel(f, a, b, whole, tol, max_depth);
}

}  // namespace isolab
