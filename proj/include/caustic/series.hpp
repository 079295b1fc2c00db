#pragma once

// Truncated power series a_0 + a_1 x + ... + a_n x^n with the handful of
// operations needed to expand the billiard map and the normal form in the
// reflection angle: products, quotients, real powers, arctangent,
// composition and reversion.

#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace caustic {

template <class Real>
class Series {
 public:
  Series() = default;
  explicit Series(int order) : c_(static_cast<std::size_t>(order) + 1, Real(0)) {}
  Series(int order, std::vector<Real> coeffs) : c_(std::move(coeffs)) { c_.resize(static_cast<std::size_t>(order) + 1, Real(0)); }

  static Series constant(int order, Real a) {
    Series s(order);
    s.c_[0] = a;
    return s;
  }
  /// The series of the variable itself (x), optionally scaled.
  static Series variable(int order, Real scale = Real(1)) {
    Series s(order);
    if (order >= 1) s.c_[1] = scale;
    return s;
  }

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  const Real& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  Real& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }

  Real operator()(Real x) const {
    Real v = 0;
    for (int k = order(); k >= 0; --k) v = v * x + c_[static_cast<std::size_t>(k)];
    return v;
  }

  Series& operator+=(const Series& b) {
    for (int k = 0; k <= order(); ++k) (*this)[k] += b[k];
    return *this;
  }
  Series& operator-=(const Series& b) {
    for (int k = 0; k <= order(); ++k) (*this)[k] -= b[k];
    return *this;
  }
  Series& operator*=(Real s) {
    for (auto& a : c_) a *= s;
    return *this;
  }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(Real s, Series a) { return a *= s; }
  friend Series operator-(Series a) { return a *= Real(-1); }

  friend Series operator*(const Series& a, const Series& b) {
    Series r(a.order());
    for (int i = 0; i <= a.order(); ++i) {
      if (a[i] == Real(0)) continue;
      for (int j = 0; i + j <= a.order(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
  }

  friend Series operator/(const Series& a, const Series& b) {
    if (b[0] == Real(0)) throw DomainError("series division by a series with zero constant term", 0.0);
    Series r(a.order());
    for (int k = 0; k <= a.order(); ++k) {
      Real s = a[k];
      for (int j = 1; j <= k; ++j) s -= b[j] * r[k - j];
      r[k] = s / b[0];
    }
    return r;
  }

  /// x -> f(-x).
  Series reflected() const {
    Series r = *this;
    for (int k = 1; k <= order(); k += 2) r[k] = -r[k];
    return r;
  }

  /// Antiderivative vanishing at 0 (the top coefficient is dropped).
  Series integral() const {
    Series r(order());
    for (int k = order(); k >= 1; --k) r[k] = c_[static_cast<std::size_t>(k - 1)] / static_cast<Real>(k);
    return r;
  }

  Series derivative() const {
    Series r(order());
    for (int k = 0; k < order(); ++k) r[k] = static_cast<Real>(k + 1) * c_[static_cast<std::size_t>(k + 1)];
    return r;
  }

 private:
  std::vector<Real> c_;
};

/// a^e for a real exponent; requires a_0 > 0.
template <class Real>
Series<Real> pow(const Series<Real>& a, Real e) {
  if (!(a[0] > Real(0))) throw DomainError("series power needs a positive constant term", num::to_double(a[0]));
  // r' a = e a' r, solved order by order.
  const int n = a.order();
  Series<Real> r(n);
  r[0] = num::pow(a[0], e);
  for (int k = 1; k <= n; ++k) {
    Real s = 0;
    for (int j = 1; j <= k; ++j) {
      s += (e * static_cast<Real>(j) - static_cast<Real>(k - j)) * a[j] * r[k - j];
    }
    r[k] = s / (static_cast<Real>(k) * a[0]);
  }
  return r;
}

template <class Real>
Series<Real> sqrt(const Series<Real>& a) {
  return pow(a, Real(0.5));
}

/// atan(a) with the branch fixed by atan(a_0).
template <class Real>
Series<Real> atan(const Series<Real>& a) {
  // d/dx atan(a) = a' / (1 + a^2)
  const auto one = Series<Real>::constant(a.order(), Real(1));
  Series<Real> r = (a.derivative() / (one + a * a)).integral();
  r[0] = num::atan(a[0]);
  return r;
}

/// f(g(x)) for g_0 = 0 (Horner in the series ring).
template <class Real>
Series<Real> compose(const Series<Real>& f, const Series<Real>& g) {
  if (g[0] != Real(0)) throw DomainError("series composition needs an inner series without constant term", num::to_double(g[0]));
  const int n = g.order();
  Series<Real> r(n);
  for (int k = std::min(f.order(), n); k >= 0; --k) {
    r = r * g;
    r[0] += f[k];
  }
  return r;
}

/// Compositional inverse of f with f_0 = 0, f_1 != 0: the series g with
/// f(g(x)) = x.
template <class Real>
Series<Real> revert(const Series<Real>& f) {
  if (f[0] != Real(0) || f[1] == Real(0)) throw DomainError("series reversion needs f(0) = 0 and f'(0) != 0", 0.0);
  const int n = f.order();
  // Fixed point g <- g - (f(g) - x)/f_1; each pass fixes one more order.
  Series<Real> g = Series<Real>::variable(n, Real(1) / f[1]);
  const auto x = Series<Real>::variable(n);
  for (int it = 0; it < n; ++it) {
    Series<Real> defect = compose(f, g) - x;
    defect *= Real(1) / f[1];
    g -= defect;
  }
  return g;
}

/// Integer power by repeated multiplication.
template <class Real>
Series<Real> ipow(const Series<Real>& a, int m) {
  auto r = Series<Real>::constant(a.order(), Real(1));
  for (int i = 0; i < m; ++i) r = r * a;
  return r;
}

}  // namespace caustic
