#include "isolab/scalar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace isolab {

namespace {

// 1/k! for k = 3..kTaylorTerms+2, rounded to double-double.
constexpr int kTaylorTerms = 15;

const std::array<DoubleDouble, kTaylorTerms>& inverse_factorials() {
  static const std::array<DoubleDouble, kTaylorTerms> table = [] {
    std::array<DoubleDouble, kTaylorTerms> t{};
    DoubleDouble fact(2.0);
    for (int k = 0; k < kTaylorTerms; ++k) {
      fact *= static_cast<double>(k + 3);
      t[k] = DoubleDouble(1.0) / fact;
    }
    return t;
  }();
  return table;
}

DoubleDouble pow10(int e) {
  if (e >= 0) return pow(DoubleDouble(10.0), e);
  return DoubleDouble(1.0) / pow(DoubleDouble(10.0), -e);
}

}  // namespace

DoubleDouble ldexp(const DoubleDouble& a, int e) {
  return DoubleDouble::raw(std::ldexp(a.hi(), e), std::ldexp(a.lo(), e));
}

DoubleDouble floor(const DoubleDouble& a) {
  double hi = std::floor(a.hi());
  double lo = 0.0;
  if (hi == a.hi()) lo = std::floor(a.lo());
  return DoubleDouble::from_pair(hi, lo);
}

DoubleDouble round(const DoubleDouble& a) { return floor(a + 0.5); }

DoubleDouble square(const DoubleDouble& a) {
  double e;
  double p = detail::two_prod(a.hi(), a.hi(), e);
  e += 2.0 * a.hi() * a.lo();
  e += a.lo() * a.lo();
  double lo;
  double hi = detail::quick_two_sum(p, e, lo);
  return DoubleDouble::raw(hi, lo);
}

DoubleDouble pow(const DoubleDouble& a, int n) {
  if (n == 0) return DoubleDouble(1.0);
  DoubleDouble base = a;
  DoubleDouble acc(1.0);
  unsigned m = static_cast<unsigned>(n < 0 ? -n : n);
  while (m > 0) {
    if (m & 1u) acc *= base;
    m >>= 1;
    if (m > 0) base = square(base);
  }
  return n < 0 ? DoubleDouble(1.0) / acc : acc;
}

DoubleDouble sqrt(const DoubleDouble& a) {
  if (a.hi() == 0.0) return DoubleDouble();
  if (a.hi() < 0.0) throw std::domain_error("sqrt of negative double-double");
  // One Newton step on 1/sqrt from the double estimate (Karp's trick).
  double x = 1.0 / std::sqrt(a.hi());
  double ax = a.hi() * x;
  DoubleDouble residual = a - square(DoubleDouble(ax));
  double lo;
  double hi = detail::two_sum(ax, residual.hi() * x * 0.5, lo);
  return DoubleDouble::raw(hi, lo);
}

DoubleDouble exp(const DoubleDouble& a) {
  constexpr double kScaleLog2 = 9;  // r is scaled by 2^-9 before the series
  constexpr double kScale = 512.0;
  if (a.hi() <= -745.0) return DoubleDouble();
  if (a.hi() >= 709.8) return DoubleDouble(std::numeric_limits<double>::infinity());
  if (a.hi() == 0.0 && a.lo() == 0.0) return DoubleDouble(1.0);
  if (a == DoubleDouble(1.0)) return constants::e;

  double m = std::floor(a.hi() / constants::ln2.hi() + 0.5);
  DoubleDouble r = ldexp(a - constants::ln2 * m, -static_cast<int>(kScaleLog2));
  const double threshold = kDoubleDoubleEpsilon / kScale;

  // s = exp(r) - 1 by Taylor series.
  DoubleDouble p = square(r);
  DoubleDouble s = r + ldexp(p, -1);
  const auto& inv_fact = inverse_factorials();
  for (int k = 0; k < kTaylorTerms; ++k) {
    p *= r;
    DoubleDouble t = p * inv_fact[k];
    s += t;
    if (std::abs(t.hi()) <= threshold) break;
  }
  // (1 + s)^2 - 1 = 2s + s^2, applied once per halving.
  for (int k = 0; k < static_cast<int>(kScaleLog2); ++k) s = ldexp(s, 1) + square(s);
  s += 1.0;
  return ldexp(s, static_cast<int>(m));
}

DoubleDouble log(const DoubleDouble& a) {
  if (a.hi() <= 0.0) throw std::domain_error("log of nonpositive double-double");
  if (a == DoubleDouble(1.0)) return DoubleDouble();
  // Newton on exp(x) = a from the double estimate; each step doubles digits.
  DoubleDouble x(std::log(a.hi()));
  x = x + a * exp(-x) - 1.0;
  return x;
}

std::string to_string(const DoubleDouble& a, int digits) {
  if (digits < 1) digits = 1;
  if (isnan(a)) return "nan";
  if (isinf(a)) return a.hi() < 0 ? "-inf" : "inf";

  std::string out;
  if (signbit(a) && !(a.hi() == 0.0)) out.push_back('-');
  DoubleDouble r = abs(a);

  int e = 0;
  std::vector<int> d(static_cast<std::size_t>(digits) + 1, 0);
  if (r.hi() != 0.0) {
    e = static_cast<int>(std::floor(std::log10(r.hi())));
    // Scale in two steps so 10^e never overflows near the range limits.
    if (e < -300) {
      r = r * pow10(300);
      r = r / pow10(e + 300);
    } else {
      r = r / pow10(e);
    }
    if (r >= 10.0) {
      r /= 10.0;
      ++e;
    } else if (r < 1.0) {
      r *= 10.0;
      --e;
    }
    for (auto& digit : d) {
      double q = std::floor(r.hi());
      digit = static_cast<int>(q);
      r = (r - q) * 10.0;
    }
    // Repair digits pushed out of [0, 9] by cancellation.
    for (std::size_t i = d.size() - 1; i > 0; --i) {
      while (d[i] < 0) {
        d[i] += 10;
        d[i - 1] -= 1;
      }
      while (d[i] > 9) {
        d[i] -= 10;
        d[i - 1] += 1;
      }
    }
    // Round on the guard digit.
    if (d.back() >= 5) {
      std::size_t i = d.size() - 2;
      d[i] += 1;
      while (i > 0 && d[i] > 9) {
        d[i] -= 10;
        d[--i] += 1;
      }
    }
    d.pop_back();
    if (d[0] > 9) {
      std::rotate(d.rbegin(), d.rbegin() + 1, d.rend());
      d[0] = 1;
      d[1] = 0;
      ++e;
    }
  } else {
    d.pop_back();
  }

  out.push_back(static_cast<char>('0' + d[0]));
  if (digits > 1) {
    out.push_back('.');
    for (std::size_t i = 1; i < d.size(); ++i) out.push_back(static_cast<char>('0' + d[i]));
  }
  out.push_back('e');
  out.push_back(e < 0 ? '-' : '+');
  int ae = e < 0 ? -e : e;
  if (ae < 10) out.push_back('0');
  out += std::to_string(ae);
  return out;
}

std::ostream& operator<<(std::ostream& os, const DoubleDouble& a) {
  auto prec = os.precision();
  return os << to_string(a, prec > 0 && prec < 32 ? static_cast<int>(prec) : 32);
}

DoubleDouble DoubleDouble::parse(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';

  DoubleDouble value;
  int scale = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      value = value * 10.0 + static_cast<double>(c - '0');
      if (seen_point) --scale;
      seen_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw std::invalid_argument("not a decimal number: " + std::string(text));
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    std::size_t used = 0;
    int exponent = std::stoi(std::string(text.substr(i)), &used);
    scale += exponent;
    i += used;
  }
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i != text.size()) throw std::invalid_argument("trailing characters in number: " + std::string(text));

  if (scale != 0) value = scale > 0 ? value * pow10(scale) : value / pow10(-scale);
  return negative ? -value : value;
}

}  // namespace isolab
