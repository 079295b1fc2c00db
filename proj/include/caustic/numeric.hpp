#pragma once

// Scalar plumbing shared by every module. All generic code is written
// against the overload set in caustic::num so the same templates run in
// double and in __float128.

#include <quadmath.h>

#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace caustic {

using quad = __float128;

namespace num {

inline double sqrt(double x) { return std::sqrt(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double atan(double x) { return std::atan(x); }
inline double atan2(double y, double x) { return std::atan2(y, x); }
inline double log(double x) { return std::log(x); }
inline double exp(double x) { return std::exp(x); }
inline double pow(double x, double e) { return std::pow(x, e); }
inline double abs(double x) { return std::fabs(x); }
inline double floor(double x) { return std::floor(x); }
inline bool isfinite(double x) { return std::isfinite(x); }

inline quad sqrt(quad x) { return sqrtq(x); }
inline quad sin(quad x) { return sinq(x); }
inline quad cos(quad x) { return cosq(x); }
inline quad atan(quad x) { return atanq(x); }
inline quad atan2(quad y, quad x) { return atan2q(y, x); }
inline quad log(quad x) { return logq(x); }
inline quad exp(quad x) { return expq(x); }
inline quad pow(quad x, quad e) { return powq(x, e); }
inline quad abs(quad x) { return fabsq(x); }
inline quad floor(quad x) { return floorq(x); }
inline bool isfinite(quad x) { return finiteq(x) != 0; }

template <class Real>
constexpr Real pi() {
  if constexpr (std::is_same_v<Real, quad>) {
    return M_PIq;
  } else {
    return static_cast<Real>(3.14159265358979323846264338327950288);
  }
}

template <class Real>
constexpr Real two_pi() {
  return 2 * pi<Real>();
}

template <class Real>
constexpr Real epsilon() {
  if constexpr (std::is_same_v<Real, quad>) {
    return FLT128_EPSILON;
  } else {
    return std::numeric_limits<Real>::epsilon();
  }
}

template <class Real>
Real max(Real a, Real b) {
  return a < b ? b : a;
}

template <class Real>
Real min(Real a, Real b) {
  return b < a ? b : a;
}

// std::abs/std::exp on std::complex<__float128> silently fall back to double
// in libstdc++, so complex helpers are spelled out here.
template <class Real>
Real cabs(const std::complex<Real>& z) {
  return num::sqrt(z.real() * z.real() + z.imag() * z.imag());
}

template <class Real>
std::complex<Real> expi(Real phase) {
  return {num::cos(phase), num::sin(phase)};
}

inline double to_double(double x) { return x; }
inline double to_double(quad x) { return static_cast<double>(x); }

inline std::string to_string(quad x) {
  char buf[64];
  quadmath_snprintf(buf, sizeof buf, "%.36Qg", x);
  return buf;
}

}  // namespace num
}  // namespace caustic
