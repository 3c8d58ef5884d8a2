#pragma once

// Double-double real: an unevaluated sum hi + lo of two doubles with
// |lo| <= ulp(hi)/2, giving roughly 31 significant decimal digits.

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>

namespace isolab {

namespace detail {

inline double quick_two_sum(double a, double b, double& err) {
  double s = a + b;
  err = b - (s - a);
  return s;
}

inline double two_sum(double a, double b, double& err) {
  double s = a + b;
  double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
  return s;
}

inline double two_prod(double a, double b, double& err) {
  double p = a * b;
  err = std::fma(a, b, -p);
  return p;
}

}  // namespace detail

class DoubleDouble {
 public:
  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double x) : hi_(x) {}  // NOLINT: implicit by design of a numeric type
  constexpr DoubleDouble(int x) : hi_(x) {}     // NOLINT
  constexpr DoubleDouble(long x) : hi_(static_cast<double>(x)) {
    lo_ = static_cast<double>(x - static_cast<long>(hi_));
  }
  constexpr DoubleDouble(long long x) : hi_(static_cast<double>(x)) {
    lo_ = static_cast<double>(x - static_cast<long long>(hi_));
  }
  constexpr DoubleDouble(unsigned long x) : DoubleDouble(static_cast<long long>(x)) {}

  // Renormalizes an arbitrary pair.
  static DoubleDouble from_pair(double hi, double lo) {
    double err;
    double s = detail::two_sum(hi, lo, err);
    return raw(s, err);
  }

  // Trusts that the pair is already normalized.
  static constexpr DoubleDouble raw(double hi, double lo) {
    DoubleDouble r;
    r.hi_ = hi;
    r.lo_ = lo;
    return r;
  }

  // Parses a decimal literal such as "-1.25e-3" to full precision.
  static DoubleDouble parse(std::string_view text);

  constexpr double hi() const { return hi_; }
  constexpr double lo() const { return lo_; }
  explicit constexpr operator double() const { return hi_ + lo_; }
  double to_double() const { return hi_ + lo_; }

  DoubleDouble operator-() const { return raw(-hi_, -lo_); }

  DoubleDouble& operator+=(const DoubleDouble& b) {
    double t1, t2;
    double s1 = detail::two_sum(hi_, b.hi_, t1);
    double s2 = detail::two_sum(lo_, b.lo_, t2);
    t1 += s2;
    s1 = detail::quick_two_sum(s1, t1, t1);
    t1 += t2;
    hi_ = detail::quick_two_sum(s1, t1, lo_);
    return *this;
  }

  DoubleDouble& operator+=(double b) {
    double e;
    double s = detail::two_sum(hi_, b, e);
    e += lo_;
    hi_ = detail::quick_two_sum(s, e, lo_);
    return *this;
  }

  DoubleDouble& operator-=(const DoubleDouble& b) { return *this += -b; }
  DoubleDouble& operator-=(double b) { return *this += -b; }

  DoubleDouble& operator*=(const DoubleDouble& b) {
    double e;
    double p = detail::two_prod(hi_, b.hi_, e);
    e += hi_ * b.lo_ + lo_ * b.hi_ + lo_ * b.lo_;
    hi_ = detail::quick_two_sum(p, e, lo_);
    return *this;
  }

  DoubleDouble& operator*=(double b) {
    double e;
    double p = detail::two_prod(hi_, b, e);
    e += lo_ * b;
    hi_ = detail::quick_two_sum(p, e, lo_);
    return *this;
  }

  DoubleDouble& operator/=(const DoubleDouble& b) {
    // Three-term long division; relative error a few units of 2^-106.
    double q1 = hi_ / b.hi_;
    DoubleDouble r = *this - b * q1;
    double q2 = r.hi_ / b.hi_;
    r -= b * q2;
    double q3 = r.hi_ / b.hi_;
    double e;
    q1 = detail::quick_two_sum(q1, q2, e);
    *this = raw(q1, e) + q3;
    return *this;
  }

  DoubleDouble& operator/=(double b) { return *this /= DoubleDouble(b); }

  friend DoubleDouble operator+(DoubleDouble a, const DoubleDouble& b) { return a += b; }
  friend DoubleDouble operator+(DoubleDouble a, double b) { return a += b; }
  friend DoubleDouble operator+(double a, DoubleDouble b) { return b += a; }
  friend DoubleDouble operator-(DoubleDouble a, const DoubleDouble& b) { return a -= b; }
  friend DoubleDouble operator-(DoubleDouble a, double b) { return a -= b; }
  friend DoubleDouble operator-(double a, const DoubleDouble& b) { return -b + a; }
  friend DoubleDouble operator*(DoubleDouble a, const DoubleDouble& b) { return a *= b; }
  friend DoubleDouble operator*(DoubleDouble a, double b) { return a *= b; }
  friend DoubleDouble operator*(double a, DoubleDouble b) { return b *= a; }
  friend DoubleDouble operator/(DoubleDouble a, const DoubleDouble& b) { return a /= b; }
  friend DoubleDouble operator/(DoubleDouble a, double b) { return a /= b; }
  friend DoubleDouble operator/(double a, const DoubleDouble& b) { return DoubleDouble(a) /= b; }

  friend bool operator==(const DoubleDouble& a, const DoubleDouble& b) {
    return a.hi_ == b.hi_ && a.lo_ == b.lo_;
  }
  friend std::partial_ordering operator<=>(const DoubleDouble& a, const DoubleDouble& b) {
    if (auto c = a.hi_ <=> b.hi_; c != 0) return c;
    return a.lo_ <=> b.lo_;
  }
  friend bool operator==(const DoubleDouble& a, double b) { return a == DoubleDouble(b); }
  friend std::partial_ordering operator<=>(const DoubleDouble& a, double b) {
    return a <=> DoubleDouble(b);
  }

 private:
  double hi_ = 0.0;
  double lo_ = 0.0;
};

using ExtendedReal = DoubleDouble;

// Unit roundoff of the double-double format.
inline constexpr double kDoubleDoubleEpsilon = 1.232595164407831e-32;  // 2^-106

inline DoubleDouble abs(const DoubleDouble& a) { return a.hi() < 0.0 ? -a : a; }
inline DoubleDouble fabs(const DoubleDouble& a) { return abs(a); }
inline bool isfinite(const DoubleDouble& a) { return std::isfinite(a.hi()); }
inline bool isnan(const DoubleDouble& a) { return std::isnan(a.hi()); }
inline bool isinf(const DoubleDouble& a) { return std::isinf(a.hi()); }
inline bool signbit(const DoubleDouble& a) { return std::signbit(a.hi()); }

DoubleDouble ldexp(const DoubleDouble& a, int e);
DoubleDouble floor(const DoubleDouble& a);
DoubleDouble round(const DoubleDouble& a);
DoubleDouble square(const DoubleDouble& a);
DoubleDouble pow(const DoubleDouble& a, int n);

// Transcendentals; throw std::domain_error outside their real domain.
DoubleDouble sqrt(const DoubleDouble& a);
DoubleDouble exp(const DoubleDouble& a);
DoubleDouble log(const DoubleDouble& a);

// Two-term quotient: relative error a few units of 2^-104, about half the
// cost of operator/. Used in the Sturm recurrence.
inline DoubleDouble quotient_fast(const DoubleDouble& a, const DoubleDouble& b) {
  double q1 = a.hi() / b.hi();
  double e;
  double p = detail::two_prod(q1, b.hi(), e);
  e += q1 * b.lo();
  double s2;
  double s1 = detail::two_sum(a.hi(), -p, s2);
  s2 += a.lo() - e;
  double q2 = (s1 + s2) / b.hi();
  double lo;
  double hi = detail::quick_two_sum(q1, q2, lo);
  return DoubleDouble::raw(hi, lo);
}

inline DoubleDouble min(const DoubleDouble& a, const DoubleDouble& b) { return b < a ? b : a; }
inline DoubleDouble max(const DoubleDouble& a, const DoubleDouble& b) { return a < b ? b : a; }

// Scientific notation with `digits` significant decimal digits (default 32).
std::string to_string(const DoubleDouble& a, int digits = 32);
std::ostream& operator<<(std::ostream& os, const DoubleDouble& a);

namespace constants {
inline constexpr DoubleDouble pi = DoubleDouble::raw(3.141592653589793116e+00, 1.224646799147353207e-16);
inline constexpr DoubleDouble ln2 = DoubleDouble::raw(6.931471805599452862e-01, 2.319046813846299558e-17);
inline constexpr DoubleDouble e = DoubleDouble::raw(2.718281828459045091e+00, 1.445646891729250158e-16);
}  // namespace constants

// Scalar-generic helpers so templated code reads the same for double and
// DoubleDouble.
template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static double pi() { return 3.14159265358979323846; }
  static double epsilon() { return std::numeric_limits<double>::epsilon() / 2; }
  static double to_double(double x) { return x; }
};

template <>
struct ScalarTraits<DoubleDouble> {
  static DoubleDouble pi() { return constants::pi; }
  static double epsilon() { return kDoubleDoubleEpsilon; }
  static double to_double(const DoubleDouble& x) { return x.to_double(); }
};

template <class Scalar>
double to_double(const Scalar& x) {
  return ScalarTraits<Scalar>::to_double(x);
}

}  // namespace isolab

namespace Eigen {

template <>
struct NumTraits<isolab::DoubleDouble> : GenericNumTraits<isolab::DoubleDouble> {
  using Real = isolab::DoubleDouble;
  using NonInteger = isolab::DoubleDouble;
  using Nested = isolab::DoubleDouble;
  using Literal = isolab::DoubleDouble;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 10
  };
  static inline Real epsilon() { return Real(isolab::kDoubleDoubleEpsilon); }
  static inline Real dummy_precision() { return Real(1e-28); }
  static inline Real highest() { return Real(std::numeric_limits<double>::max()); }
  static inline Real lowest() { return Real(-std::numeric_limits<double>::max()); }
  static inline int digits10() { return 31; }
};

}  // namespace Eigen
