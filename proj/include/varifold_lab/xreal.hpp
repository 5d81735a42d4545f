#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace vl {

// Nonnegative-or-signed real with a double mantissa in [0.5, 1) and an int64
// binary exponent. Covers magnitudes like 2^-400000 that appear at the finest
// scales of the sparse cube families.
class XReal {
 public:
  XReal() = default;
  XReal(double v) { set(v, 0); }

  static XReal from_log(double ln_value) {
    if (ln_value == -std::numeric_limits<double>::infinity()) return XReal();
    constexpr double kLn2 = 0.69314718055994530942;
    double e = std::floor(ln_value / kLn2);
    XReal x;
    x.set(std::exp(ln_value - e * kLn2), static_cast<int64_t>(e));
    return x;
  }
  static XReal pow2(int64_t e) {
    XReal x;
    x.m_ = 0.5;
    x.e_ = e + 1;
    return x;
  }

  bool is_zero() const { return m_ == 0.0; }
  int sign() const { return m_ > 0 ? 1 : (m_ < 0 ? -1 : 0); }
  double mantissa() const { return m_; }
  int64_t exponent() const { return e_; }

  double log() const {
    if (m_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::fabs(m_)) + static_cast<double>(e_) * 0.69314718055994530942;
  }
  double log2() const {
    if (m_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log2(std::fabs(m_)) + static_cast<double>(e_);
  }
  double to_double() const {
    if (m_ == 0.0) return 0.0;
    if (e_ > 1100) return m_ > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    if (e_ < -1100) return 0.0;
    return std::ldexp(m_, static_cast<int>(e_));
  }

  XReal operator-() const {
    XReal x = *this;
    x.m_ = -x.m_;
    return x;
  }
  friend XReal operator*(const XReal& a, const XReal& b) {
    XReal x;
    x.set(a.m_ * b.m_, a.e_ + b.e_);
    return x;
  }
  friend XReal operator/(const XReal& a, const XReal& b) {
    XReal x;
    x.set(a.m_ / b.m_, a.e_ - b.e_);
    return x;
  }
  friend XReal operator+(const XReal& a, const XReal& b) {
    if (a.m_ == 0.0) return b;
    if (b.m_ == 0.0) return a;
    const XReal& hi = a.e_ >= b.e_ ? a : b;
    const XReal& lo = a.e_ >= b.e_ ? b : a;
    int64_t d = hi.e_ - lo.e_;
    if (d > 80) return hi;
    XReal x;
    x.set(hi.m_ + std::ldexp(lo.m_, -static_cast<int>(d)), hi.e_);
    return x;
  }
  friend XReal operator-(const XReal& a, const XReal& b) { return a + (-b); }
  XReal& operator+=(const XReal& o) { return *this = *this + o; }
  XReal& operator-=(const XReal& o) { return *this = *this - o; }
  XReal& operator*=(const XReal& o) { return *this = *this * o; }
  XReal& operator/=(const XReal& o) { return *this = *this / o; }

  friend int compare(const XReal& a, const XReal& b) {
    XReal d = a - b;
    return d.sign();
  }
  friend bool operator<(const XReal& a, const XReal& b) { return compare(a, b) < 0; }
  friend bool operator>(const XReal& a, const XReal& b) { return compare(a, b) > 0; }
  friend bool operator<=(const XReal& a, const XReal& b) { return compare(a, b) <= 0; }
  friend bool operator>=(const XReal& a, const XReal& b) { return compare(a, b) >= 0; }

  XReal sqrt() const {
    if (m_ <= 0.0) return XReal();
    XReal x;
    if (e_ % 2 == 0)
      x.set(std::sqrt(m_), e_ / 2);
    else
      x.set(std::sqrt(2.0 * m_), (e_ - 1) / 2);
    return x;
  }
  XReal pow(double p) const {
    if (m_ <= 0.0) return XReal();
    return from_log(p * log());
  }

  std::string str() const;

 private:
  void set(double m, int64_t e) {
    if (m == 0.0 || !std::isfinite(m)) {
      m_ = std::isfinite(m) ? 0.0 : m;
      e_ = 0;
      return;
    }
    int k = 0;
    m_ = std::frexp(m, &k);
    e_ = e + k;
  }
  double m_ = 0.0;
  int64_t e_ = 0;
};

inline XReal max(const XReal& a, const XReal& b) { return a >= b ? a : b; }
inline XReal min(const XReal& a, const XReal& b) { return a <= b ? a : b; }

}  // namespace vl
