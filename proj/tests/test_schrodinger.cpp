#include "doctest.h"

#include "isolab/schrodinger.hpp"

#include <cmath>

using namespace isolab;

namespace {

struct Zero {
  template <class Scalar>
  Scalar operator()(const Scalar&) const {
    return Scalar(0.0);
  }
};

const GridSpec kBox(M_PI / 2.0, 4095);

// Exact Dirichlet eigenvalue (k pi / 2L)^2 for the box (-L, L).
ExtendedReal box_eigenvalue(int k, double half_width) {
  ExtendedReal w = ExtendedReal(static_cast<double>(k)) * constants::pi / (2.0 * ExtendedReal(half_width));
  return w * w;
}

SymmetricTridiagonal<ExtendedReal> diagonal_matrix(std::initializer_list<double> d) {
  VectorX<ExtendedReal> diag(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) diag(i++) = ExtendedReal(x);
  return {diag, VectorX<ExtendedReal>::Zero(diag.size() - 1)};
}

}  // namespace

TEST_CASE("grid geometry") {
  GridSpec g(1.0, 1);
  CHECK(g.spacing() == 1.0);
  CHECK(g.point(1) == 0.0);
  GridSpec h(12.0, 16384);
  for (std::size_t i = 1; i <= h.size(); i += 97) CHECK(h.point(i) == -h.point(h.size() + 1 - i));
  auto r = h.refined(2);
  CHECK(r.size() == 65539);
  CHECK(r.spacing<ExtendedReal>() * 4.0 == h.spacing<ExtendedReal>());
  CHECK(r.point<ExtendedReal>(4) == h.point<ExtendedReal>(1));
  CHECK_THROWS_AS(GridSpec(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1.0, 0), std::invalid_argument);
}

TEST_CASE("discretize") {
  PotentialSpec harmonic;
  auto t = discretize<ExtendedReal>(harmonic, 1.0, GridSpec(1.0, 1));
  REQUIRE(t.size() == 1);
  CHECK(t.diagonal()(0) == 2.0);
  CHECK_THROWS_AS(discretize<double>(harmonic, 0.0, GridSpec(1.0, 4)), std::invalid_argument);

  auto pair = default_pair();
  GridSpec g(6.0, 600);
  auto op = discretize<ExtendedReal>(pair.minus, 0.7, g);
  ExtendedReal kinetic = square(ExtendedReal(0.7) / g.spacing<ExtendedReal>());
  ExtendedReal vmin(1e300), vmax(0.0);
  for (std::size_t i = 1; i <= g.size(); ++i) {
    ExtendedReal vi = pair.minus(g.point<ExtendedReal>(i));
    vmin = min(vmin, vi);
    vmax = max(vmax, vi);
    CHECK(abs(op.diagonal()(static_cast<Eigen::Index>(i - 1)) - 2.0 * kinetic - vi).to_double() <= 1e-25);
  }
  CHECK(abs(op.off_diagonal()(0) + kinetic).to_double() <= 1e-25);
  auto [lo, hi] = op.gershgorin_bounds();
  CHECK(lo >= vmin - 1e-25);
  CHECK(hi <= 4.0 * kinetic + vmax + 1e-25);
}

TEST_CASE("sturm count") {
  auto d = diagonal_matrix({1.0, 2.0, 3.0});
  CHECK(sturm_count(d, ExtendedReal(2.5)) == 2);
  CHECK(sturm_count(d, ExtendedReal(2.0) - 1e-25) == 1);
  CHECK(sturm_count(d, ExtendedReal(2.0) + 1e-25) == 2);
  CHECK(sturm_count(d.cast<double>(), 2.5) == 2);

  auto t = discretize<ExtendedReal>(default_pair().plus, 0.5, GridSpec(6.0, 2047));
  auto [lo, hi] = t.gershgorin_bounds();
  CHECK(sturm_count(t, lo - 1.0) == 0);
  CHECK(sturm_count(t, hi + 1.0) == t.size());
  Eigen::Index previous = 0;
  for (int k = 0; k <= 200; ++k) {
    ExtendedReal lambda = lo + (hi - lo) * (k / 200.0);
    Eigen::Index c = sturm_count(t, lambda);
    CHECK(c >= previous);
    previous = c;
  }
  // Extended and double counts agree away from eigenvalues.
  CHECK(sturm_count(t, ExtendedReal(3.3)) == sturm_count(t.cast<double>(), 3.3));
}

TEST_CASE("eigenvalue bisection") {
  auto d = diagonal_matrix({3.0, 1.0, 2.0});
  CHECK(abs(eigenvalue(d, 0, ExtendedReal(1e-28)) - 1.0).to_double() <= 1e-28);
  CHECK(abs(eigenvalue(d, 2, ExtendedReal(1e-28)) - 3.0).to_double() <= 1e-28);
  CHECK_THROWS_AS(eigenvalue(d, 3, ExtendedReal(1e-28)), std::out_of_range);
  CHECK_THROWS_AS(eigenvalue(d, 0, ExtendedReal(0.0)), std::invalid_argument);

  auto t = discretize<ExtendedReal>(default_pair().minus, 0.5, GridSpec(6.0, 1023));
  ExtendedReal previous(-1.0);
  for (Eigen::Index j = 0; j < 8; ++j) {
    ExtendedReal e = eigenvalue(t, j, ExtendedReal(1e-28));
    CHECK(e > previous);
    CHECK(sturm_count(t, e - 1e-20) == j);
    CHECK(sturm_count(t, e + 1e-20) == j + 1);
    previous = e;
  }
}

TEST_CASE("box spectrum") {
  auto t = discretize<ExtendedReal>(Zero{}, 1.0, kBox);
  ExtendedReal e0 = eigenvalue(t, 0, ExtendedReal(1e-28));
  // Leading discretization error k^4 dx^2 / 12.
  double dx = kBox.spacing();
  CHECK(std::abs((e0 - 1.0).to_double()) <= dx * dx / 12.0 * 1.01);

  for (int k = 1; k <= 5; ++k) {
    auto e = solve_extrapolated(Zero{}, 1.0, k - 1, kBox);
    ExtendedReal exact = box_eigenvalue(k, kBox.half_width());
    CHECK(abs(e.value - exact).to_double() / exact.to_double() <= 1e-12);
    CHECK(std::abs(exact.to_double() - k * k) <= 1e-14 * k * k);
  }
}

TEST_CASE("harmonic oscillator eigenvalues") {
  PotentialSpec harmonic;
  auto e0 = solve_extrapolated(harmonic, 1.0, 0, GridSpec(8.0, 8192));
  CHECK(abs(e0.value - 1.0).to_double() <= 1e-10);
  CHECK(e0.error_estimate.to_double() <= 1e-12);
  CHECK(abs(e0.value - 1.0) < abs(e0.levels.values[2] - 1.0));

  auto e2 = solve_extrapolated(harmonic, 0.5, 2, GridSpec(8.0, 8192));
  CHECK(abs(e2.value - 2.5).to_double() <= 1e-10);
  CHECK(abs(e2.value - 2.5) < abs(e2.levels.values[2] - 2.5));

  auto spectrum = solve_spectrum(harmonic, 0.3, 4, GridSpec(6.0, 1023));
  REQUIRE(spectrum.entries.size() == 5);
  for (const auto& entry : spectrum.entries) {
    CHECK(abs(entry.eigenvalue - 0.3 * (2.0 * static_cast<double>(entry.j) + 1.0)).to_double() <= 1e-9);
    CHECK(entry.error_estimate >= 0.0);
  }
}

TEST_CASE("extrapolated convergence order") {
  PotentialSpec harmonic;
  for (Eigen::Index j : {0, 3}) {
    double exact = 2.0 * static_cast<double>(j) + 1.0;
    double coarse = std::abs((solve_extrapolated(harmonic, 1.0, j, GridSpec(8.0, 127)).value - exact).to_double());
    double fine = std::abs((solve_extrapolated(harmonic, 1.0, j, GridSpec(8.0, 255)).value - exact).to_double());
    CAPTURE(j);
    CHECK(std::log2(coarse / fine) >= 4.0);
  }
}

TEST_CASE("richardson on polynomial data") {
  // E(dx) = 2 + 3dx^2 - 5dx^4 + 7dx^6 at dx = 1, 1/2, 1/4.
  auto e = [](double dx) { return ExtendedReal(2.0 + 3.0 * dx * dx - 5.0 * std::pow(dx, 4) + 7.0 * std::pow(dx, 6)); };
  auto r = richardson({e(1.0), e(0.5), e(0.25)});
  // Only the dx^6 term survives: 7 * (1 * 1 - 20 * 2^-6 + 64 * 2^-12) / 45.
  double residual6 = 7.0 * (1.0 - 20.0 / 64.0 + 64.0 / 4096.0) / 45.0;
  CHECK(abs(r.value - 2.0 - residual6).to_double() <= 1e-15);
}

TEST_CASE("eigenfunctions") {
  PotentialSpec harmonic;
  GridSpec g(8.0, 8191);
  auto t = discretize<ExtendedReal>(harmonic, 1.0, g);

  auto psi0 = eigenfunction(t, eigenvalue(t, 0, ExtendedReal(1e-28)));
  CHECK(abs(psi0.trapezoid_norm_squared() - 1.0).to_double() <= 1e-20);
  CHECK(psi0.residual <= 1e-25);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < psi0.values.size(); ++i) {
    double x = psi0.x(i).to_double();
    if (std::abs(x) > 3.0) continue;
    double exact = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    worst = std::max(worst, std::abs(psi0.values(i).to_double() - exact));
  }
  CHECK(worst <= 1e-6);

  auto psi1 = eigenfunction(t, eigenvalue(t, 1, ExtendedReal(1e-28)));
  CHECK(abs(psi1.trapezoid_norm_squared() - 1.0).to_double() <= 1e-20);
  CHECK(psi1.residual <= 1e-25);
  Eigen::Index centre = static_cast<Eigen::Index>(g.size() / 2);
  REQUIRE(psi1.x(centre) == 0.0);
  CHECK(abs(psi1.values(centre)).to_double() <= 1e-6);
  Eigen::Index peak = 0;
  psi1.values.unaryExpr([](const ExtendedReal& v) { return abs(v); }).maxCoeff(&peak);
  CHECK(psi1.values(peak) > 0.0);
  CHECK(abs(psi0.values.dot(psi1.values)).to_double() * g.spacing() <= 1e-20);

  // Odd symmetry of the samples themselves.
  for (Eigen::Index i = 0; i < 100; ++i)
    CHECK(abs(psi1.values(i) + psi1.values(psi1.values.size() - 1 - i)).to_double() <= 1e-18);
}

TEST_CASE("extrapolated eigenfunction") {
  PotentialSpec harmonic;
  GridSpec g(8.0, 1023);
  auto psi = eigenfunction_extrapolated(harmonic, 1.0, 0, g);
  CHECK(abs(psi.trapezoid_norm_squared() - 1.0).to_double() <= 1e-20);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < psi.values.size(); ++i) {
    double x = psi.x(i).to_double();
    double exact = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    worst = std::max(worst, std::abs(psi.values(i).to_double() - exact));
  }
  CHECK(worst <= 1e-8);
  CHECK(psi.value_at(ExtendedReal(0.0)).to_double() == doctest::Approx(std::pow(M_PI, -0.25)).epsilon(1e-5));
  CHECK(psi.value_at(ExtendedReal(9.0)) == 0.0);
}

TEST_CASE("gap discretization error cancels") {
  auto pair = default_pair();
  GridSpec g(6.0, 1023);
  auto minus = solve_levels(pair.minus, 0.5, 0, g);
  auto plus = solve_levels(pair.plus, 0.5, 0, g);
  auto em = extrapolate(minus);
  auto ep = extrapolate(plus);
  ExtendedReal gap = em.value - ep.value;
  ExtendedReal raw_gap = minus.values[0] - plus.values[0];
  CHECK(gap > 0.0);
  CHECK(abs(raw_gap - gap) < abs(minus.values[0] - em.value));
  CHECK(abs(raw_gap - gap) < abs(plus.values[0] - ep.value));
}

TEST_CASE("choose_domain") {
  PotentialSpec harmonic;
  CHECK(choose_domain(harmonic, 1.0, 0, 1e-30).half_width() == 12.0);
  CHECK(choose_domain(harmonic, 0.25, 0, 1e-30).half_width() == 6.0);
  CHECK(choose_domain(harmonic, 1.0, 0, 1.0).half_width() == 6.0);
  CHECK(choose_domain(harmonic, 1.0, 0, 1.0).size() == 16384);
  CHECK(truncation_estimate_log10(harmonic, 1.0, 10.0) == doctest::Approx(-64.0 / std::log(10.0)));
  CHECK_THROWS_AS(choose_domain(harmonic, 5.0, 0, 1e-30), std::runtime_error);
  CHECK_THROWS_AS(choose_domain(harmonic, 1.0, 0, 0.0), std::invalid_argument);
}
