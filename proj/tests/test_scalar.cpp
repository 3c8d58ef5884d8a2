#include "doctest.h"

#include "isolab/scalar.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <random>
#include <stdexcept>

using isolab::DoubleDouble;
namespace mp = boost::multiprecision;

namespace {

// Exact value of a double-double as a rational number.
mp::cpp_rational exact(const DoubleDouble& x) {
  return mp::cpp_rational(x.hi()) + mp::cpp_rational(x.lo());
}

using Wide = mp::cpp_bin_float_100;

Wide wide(const DoubleDouble& x) { return Wide(x.hi()) + Wide(x.lo()); }

double relative_error(const mp::cpp_rational& got, const mp::cpp_rational& want) {
  if (want == 0) return static_cast<double>(mp::abs(got));
  return static_cast<double>(mp::abs(got - want) / mp::abs(want));
}

double relative_error(const Wide& got, const Wide& want) {
  return static_cast<double>(mp::abs(got - want) / mp::abs(want));
}

DoubleDouble random_dd(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::uniform_real_distribution<double> tail(-0.5, 0.5);
  double h = u(rng);
  return DoubleDouble::from_pair(h, tail(rng) * std::abs(h) * 0x1p-53);
}

}  // namespace

TEST_CASE("exact identities") {
  CHECK(isolab::sqrt(DoubleDouble(4.0)) == DoubleDouble(2.0));
  CHECK(isolab::exp(DoubleDouble(0.0)) == DoubleDouble(1.0));
  CHECK(isolab::log(DoubleDouble(1.0)) == DoubleDouble(0.0));
  CHECK(isolab::sqrt(DoubleDouble(0.0)) == DoubleDouble(0.0));
}

TEST_CASE("product of 1 +- 2^-54 is 1 - 2^-108 to full precision") {
  DoubleDouble a = DoubleDouble(1.0) + 0x1p-54;
  DoubleDouble b = DoubleDouble(1.0) - 0x1p-54;
  mp::cpp_rational want = mp::cpp_rational(1) - mp::cpp_rational(1) / (mp::cpp_rational(mp::cpp_int(1) << 108));
  CHECK(exact(a * b) == want);
}

TEST_CASE("add and mul stay within 1e-30 relative of exact rational arithmetic") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 2000; ++k) {
    DoubleDouble a = random_dd(rng, -1e10, 1e10);
    DoubleDouble b = random_dd(rng, -1e10, 1e10);
    auto sum = exact(a) + exact(b);
    // Cancellation is measured against operand size, as for any floating sum.
    double scale = std::max(std::abs(a.hi()), std::abs(b.hi()));
    CHECK(static_cast<double>(mp::abs(exact(a + b) - sum)) <= 1e-30 * scale);
    CHECK(relative_error(exact(a * b), exact(a) * exact(b)) <= 1e-30);
    CHECK(relative_error(exact(a / b), exact(a) / exact(b)) <= 1e-30);
  }
}

TEST_CASE("sqrt exp log against a 100-digit oracle") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 500; ++k) {
    DoubleDouble x = random_dd(rng, 1e-3, 1e3);
    CHECK(relative_error(wide(isolab::sqrt(x)), mp::sqrt(wide(x))) <= 1e-28);
    CHECK(relative_error(wide(isolab::log(x)), mp::log(wide(x))) <= 1e-28);
    // Below ~1e-292 the low word goes subnormal and precision degrades.
    DoubleDouble y = random_dd(rng, -650.0, 700.0);
    CHECK(relative_error(wide(isolab::exp(y)), mp::exp(wide(y))) <= 1e-28);
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(isolab::sqrt(DoubleDouble(-1.0)), std::domain_error);
  CHECK_THROWS_AS(isolab::log(DoubleDouble(0.0)), std::domain_error);
  CHECK_THROWS_AS(isolab::log(DoubleDouble(-2.0)), std::domain_error);
}

TEST_CASE("addition is associative to 29 digits") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5000; ++k) {
    DoubleDouble a = random_dd(rng, -1e10, 1e10);
    DoubleDouble b = random_dd(rng, -1e10, 1e10);
    DoubleDouble c = random_dd(rng, -1e10, 1e10);
    DoubleDouble left = (a + b) + c;
    DoubleDouble right = a + (b + c);
    double scale = std::abs(a.hi()) + std::abs(b.hi()) + std::abs(c.hi());
    CHECK(isolab::abs(left - right).to_double() <= 1e-29 * scale);
  }
}

TEST_CASE("exp inverts log to 28 digits on [1e-20, 1e20]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> decade(-20.0, 20.0);
  for (int k = 0; k < 2000; ++k) {
    DoubleDouble x(std::pow(10.0, decade(rng)));
    DoubleDouble back = isolab::exp(isolab::log(x));
    CHECK((isolab::abs(back - x) / x).to_double() <= 1e-28);
  }
}

TEST_CASE("total order agrees with exact comparison") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 1000; ++k) {
    DoubleDouble a = random_dd(rng, -1.0, 1.0);
    DoubleDouble b = a + DoubleDouble(0x1p-100) * (k % 2 ? 1.0 : -1.0);
    CHECK((a < b) == (exact(a) < exact(b)));
    CHECK((b < a) == (exact(b) < exact(a)));
  }
}

TEST_CASE("decimal serialization keeps 32 digits") {
  DoubleDouble third = DoubleDouble(1.0) / 3.0;
  CHECK(isolab::to_string(third) == "3.3333333333333333333333333333333e-01");
  CHECK(isolab::to_string(DoubleDouble(0.0)) == "0.0000000000000000000000000000000e+00");
  CHECK(isolab::to_string(DoubleDouble(-2.5)) == "-2.5000000000000000000000000000000e+00");
  CHECK(isolab::to_string(DoubleDouble(1e-300), 5) == "1.0000e-300");

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> decade(-30.0, 30.0);
  for (int k = 0; k < 500; ++k) {
    DoubleDouble x = random_dd(rng, 1.0, 10.0) * std::pow(10.0, std::floor(decade(rng)));
    DoubleDouble back = DoubleDouble::parse(isolab::to_string(x));
    CHECK((isolab::abs(back - x) / x).to_double() <= 1e-30);
  }
}

TEST_CASE("parse reads full-precision literals") {
  DoubleDouble pi = DoubleDouble::parse("3.1415926535897932384626433832795");
  CHECK(isolab::abs(pi - isolab::constants::pi).to_double() <= 1e-31);
  CHECK(DoubleDouble::parse("-1.5e2") == DoubleDouble(-150.0));
  CHECK_THROWS_AS(DoubleDouble::parse("abc"), std::invalid_argument);
  CHECK_THROWS_AS(DoubleDouble::parse("1.0x"), std::invalid_argument);
}

TEST_CASE("Eigen vectors of double-double") {
  Eigen::Matrix<DoubleDouble, Eigen::Dynamic, 1> v(3);
  v << DoubleDouble(1.0), DoubleDouble(2.0), DoubleDouble(2.0);
  CHECK(v.squaredNorm() == DoubleDouble(9.0));
  CHECK(v.norm() == DoubleDouble(3.0));
}
