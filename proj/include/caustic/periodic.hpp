#pragma once

// Real 1-periodic functions sampled on the uniform grid theta_j = j/N, with
// exact grid-shift operators (resonant projection, forward/backward
// differences and their inverses) and spectral calculus.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "numeric.hpp"

namespace caustic {

enum class Direction { forward, backward };

/// Samples of a real periodic function on theta_j = j/N. Immutable once
/// constructed; every operation returns a new value.
template <class Real>
class BasicGridFn {
 public:
  using value_type = Real;

  BasicGridFn() = default;

  explicit BasicGridFn(std::vector<Real> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigurationError("grid function needs at least one sample");
    for (const Real& v : values_) {
      if (!num::isfinite(v)) throw DomainError("grid function sample is not finite", 0.0);
    }
  }

  template <class F>
  static BasicGridFn sample(std::size_t n, F&& f) {
    std::vector<Real> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = f(static_cast<Real>(j) / static_cast<Real>(n));
    return BasicGridFn(std::move(v));
  }

  static BasicGridFn constant(std::size_t n, Real c) { return BasicGridFn(std::vector<Real>(n, c)); }
  static BasicGridFn zeros(std::size_t n) { return constant(n, Real(0)); }

  std::size_t size() const noexcept { return values_.size(); }
  const Real& operator[](std::size_t j) const { return values_[j]; }
  std::span<const Real> values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  /// Sample value with cyclic index.
  const Real& cyclic(std::ptrdiff_t j) const {
    const auto n = static_cast<std::ptrdiff_t>(values_.size());
    return values_[static_cast<std::size_t>(((j % n) + n) % n)];
  }

  Real theta(std::size_t j) const { return static_cast<Real>(j) / static_cast<Real>(size()); }

  Real sup_norm() const {
    Real m = 0;
    for (const Real& v : values_) m = num::max(m, num::abs(v));
    return m;
  }

  Real mean() const {
    Real s = 0;
    for (const Real& v : values_) s += v;
    return s / static_cast<Real>(size());
  }

  Real min() const { return *std::min_element(values_.begin(), values_.end()); }
  Real max() const { return *std::max_element(values_.begin(), values_.end()); }

  template <class F>
  BasicGridFn map(F&& f) const {
    std::vector<Real> v(size());
    for (std::size_t j = 0; j < size(); ++j) v[j] = f(values_[j]);
    return BasicGridFn(std::move(v));
  }

  friend BasicGridFn operator+(const BasicGridFn& a, const BasicGridFn& b) {
    return zip(a, b, [](Real x, Real y) { return x + y; });
  }
  friend BasicGridFn operator-(const BasicGridFn& a, const BasicGridFn& b) {
    return zip(a, b, [](Real x, Real y) { return x - y; });
  }
  friend BasicGridFn operator*(const BasicGridFn& a, const BasicGridFn& b) {
    return zip(a, b, [](Real x, Real y) { return x * y; });
  }
  friend BasicGridFn operator/(const BasicGridFn& a, const BasicGridFn& b) {
    return zip(a, b, [](Real x, Real y) { return x / y; });
  }
  friend BasicGridFn operator*(Real s, const BasicGridFn& a) {
    return a.map([s](Real x) { return s * x; });
  }
  friend BasicGridFn operator+(const BasicGridFn& a, Real s) {
    return a.map([s](Real x) { return x + s; });
  }
  friend BasicGridFn operator-(const BasicGridFn& a) {
    return a.map([](Real x) { return -x; });
  }

 private:
  template <class Op>
  static BasicGridFn zip(const BasicGridFn& a, const BasicGridFn& b, Op op) {
    if (a.size() != b.size()) throw ConfigurationError("grid size mismatch in pointwise operation");
    std::vector<Real> v(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) v[j] = op(a.values_[j], b.values_[j]);
    return BasicGridFn(std::move(v));
  }

  std::vector<Real> values_;
};

using GridFn = BasicGridFn<double>;

/// sup |a - b| over the grid.
template <class Real>
Real sup_distance(const BasicGridFn<Real>& a, const BasicGridFn<Real>& b) {
  return (a - b).sup_norm();
}

// ---------------------------------------------------------------------------
// Spectral view

template <class Real>
std::vector<std::complex<Real>> spectrum(const BasicGridFn<Real>& g) {
  return fft::rfft<Real>(g.values());
}

template <class Real>
BasicGridFn<Real> from_spectrum(std::span<const std::complex<Real>> coeffs, std::size_t n) {
  return BasicGridFn<Real>(fft::irfft<Real>(coeffs, n));
}

/// Trigonometric interpolant of a grid function, evaluable anywhere together
/// with its derivatives. Caches the spectrum.
template <class Real>
class Interpolant {
 public:
  explicit Interpolant(const BasicGridFn<Real>& g) : n_(g.size()), coeffs_(spectrum(g)) {
    // Evaluation cost is linear in the number of modes kept; modes at the
    // round-off level are dropped.
    Real peak = 0;
    for (const auto& c : coeffs_) peak = num::max(peak, num::cabs(c));
    kmax_ = (n_ - 1) / 2;
    while (kmax_ > 0 && num::cabs(coeffs_[kmax_]) <= num::epsilon<Real>() * peak / 16) --kmax_;
    nyquist_ = n_ % 2 == 0 && num::cabs(coeffs_[n_ / 2]) > num::epsilon<Real>() * peak / 16;
  }

  Real operator()(Real theta) const { return derivative(theta, 0); }

  Real derivative(Real theta, int order) const {
    const auto base = num::expi<Real>(num::two_pi<Real>() * theta);
    std::complex<Real> e{Real(1), Real(0)};
    Real v = order == 0 ? coeffs_[0].real() : Real(0);
    for (std::size_t k = 1; k <= kmax_; ++k) {
      e *= base;
      std::complex<Real> term = coeffs_[k] * e;
      const std::complex<Real> ik{Real(0), num::two_pi<Real>() * static_cast<Real>(k)};
      for (int i = 0; i < order; ++i) term *= ik;
      v += 2 * term.real();
    }
    if (nyquist_ && order == 0) {
      v += coeffs_[n_ / 2].real() * num::cos(num::pi<Real>() * static_cast<Real>(n_) * theta);
    }
    return v;
  }

  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<std::complex<Real>> coeffs_;
  std::size_t kmax_ = 0;
  bool nyquist_ = false;
};

/// Evaluate the trigonometric interpolant of g at an arbitrary point.
template <class Real>
Real interpolate(const BasicGridFn<Real>& g, Real theta) {
  return Interpolant<Real>(g)(theta);
}

/// Trigonometric interpolant of g resampled on a grid of size m.
template <class Real>
BasicGridFn<Real> resample(const BasicGridFn<Real>& g, std::size_t m) {
  if (m == g.size()) return g;
  auto c = spectrum(g);
  const std::size_t n = g.size();
  std::vector<std::complex<Real>> d(m / 2 + 1);
  const std::size_t keep = std::min((n - 1) / 2, (m - 1) / 2);
  for (std::size_t k = 0; k <= keep; ++k) d[k] = c[k];
  if (n % 2 == 0 && m > n) {
    // Split the Nyquist term evenly between +-N/2 so the interpolant stays real.
    d[n / 2] = c[n / 2] * Real(0.5);
  }
  return from_spectrum<Real>(d, m);
}

/// Drops the trailing Fourier modes below rel * max(largest mode, floor),
/// so that round-off in the tail is not amplified by differentiation.
template <class Real>
BasicGridFn<Real> trim_spectrum(const BasicGridFn<Real>& g, Real rel, Real floor = Real(0)) {
  auto c = spectrum(g);
  Real peak = floor;
  for (const auto& z : c) peak = num::max(peak, num::cabs(z));
  std::size_t k = c.size();
  while (k > 1 && num::cabs(c[k - 1]) <= rel * peak) c[--k] = {};
  return from_spectrum<Real>(c, g.size());
}

/// Largest mode magnitude in the upper half of the resolved band, relative
/// to the largest mode overall (or to `floor` when that is larger, so that
/// functions at round-off level count as resolved).
template <class Real>
Real spectral_tail(const BasicGridFn<Real>& g, Real floor = Real(0)) {
  const auto c = spectrum(g);
  Real peak = 0, tail = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    peak = num::max(peak, num::cabs(c[k]));
    if (4 * k >= g.size()) tail = num::max(tail, num::cabs(c[k]));
  }
  peak = num::max(peak, floor);
  return peak > Real(0) ? tail / peak : Real(0);
}

// ---------------------------------------------------------------------------
// Grid shifts and the resonant decomposition

inline std::size_t cells_per_rotation(std::size_t n, int q) {
  if (q < 1) throw ConfigurationError("resonance order must be positive");
  if (n % static_cast<std::size_t>(q) != 0) {
    std::ostringstream os;
    os << "grid size " << n << " is not a multiple of q = " << q;
    throw ConfigurationError(os.str());
  }
  return n / static_cast<std::size_t>(q);
}

/// g(theta + cells/N): cyclic rotation of the samples.
template <class Real>
BasicGridFn<Real> shift(const BasicGridFn<Real>& g, std::ptrdiff_t cells) {
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  std::vector<Real> v(g.size());
  for (std::ptrdiff_t j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = g.cyclic(j + cells);
  return BasicGridFn<Real>(std::move(v));
}

/// g(theta + numerator/denominator); the offset must be a whole number of cells.
template <class Real>
BasicGridFn<Real> shift(const BasicGridFn<Real>& g, long numerator, long denominator) {
  if (denominator == 0) throw ConfigurationError("shift offset has zero denominator");
  const long long scaled = static_cast<long long>(numerator) * static_cast<long long>(g.size());
  if (scaled % denominator != 0) {
    std::ostringstream os;
    os << "offset " << numerator << "/" << denominator << " is not a whole number of cells on a grid of "
       << g.size();
    throw ConfigurationError(os.str());
  }
  return shift(g, static_cast<std::ptrdiff_t>(scaled / denominator));
}

/// [g]_q = (1/q) sum_{i=1}^q g(theta + i/q), by exact grid shifts.
template <class Real>
BasicGridFn<Real> resonant_part(const BasicGridFn<Real>& g, int q) {
  const std::size_t step = cells_per_rotation(g.size(), q);
  std::vector<Real> v(g.size(), Real(0));
  for (std::size_t j = 0; j < step; ++j) {
    Real s = 0;
    for (int i = 0; i < q; ++i) s += g[j + static_cast<std::size_t>(i) * step];
    s /= static_cast<Real>(q);
    for (int i = 0; i < q; ++i) v[j + static_cast<std::size_t>(i) * step] = s;
  }
  return BasicGridFn<Real>(std::move(v));
}

/// Same projection computed as the Fourier filter keeping modes k in qZ.
template <class Real>
BasicGridFn<Real> resonant_part_spectral(const BasicGridFn<Real>& g, int q) {
  cells_per_rotation(g.size(), q);
  auto c = spectrum(g);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k % static_cast<std::size_t>(q) != 0) c[k] = {};
  }
  return from_spectrum<Real>(c, g.size());
}

template <class Real>
BasicGridFn<Real> nonresonant_part(const BasicGridFn<Real>& g, int q) {
  return g - resonant_part(g, q);
}

/// Forward: g(theta + 1/q) - g(theta). Backward: g(theta) - g(theta - 1/q).
template <class Real>
BasicGridFn<Real> difference(const BasicGridFn<Real>& g, int q, Direction dir) {
  const auto step = static_cast<std::ptrdiff_t>(cells_per_rotation(g.size(), q));
  return dir == Direction::forward ? shift(g, step) - g : g - shift(g, -step);
}

/// Default admissible size of [g]_q when inverting a difference operator.
template <class Real>
Real default_resonance_tolerance(const BasicGridFn<Real>& g) {
  return Real(1e-9) * num::max(Real(1), g.sup_norm());
}

/// The unique phi with [phi]_q = 0 and difference(phi, q, dir) = g.
///
/// Uses the telescoping sum phi(theta) = (1/q) sum_{j=1}^q j g(theta + (j-1)/q)
/// for the forward operator, which also gives |phi| <= q |g| pointwise-sup.
/// The resonant part of g must vanish to `resonance_tol`; whatever remains
/// below that tolerance is discarded.
template <class Real>
BasicGridFn<Real> invert_difference(const BasicGridFn<Real>& g, int q, Direction dir, Real resonance_tol) {
  const std::size_t step = cells_per_rotation(g.size(), q);
  const auto resonant = resonant_part(g, q);
  const Real measured = resonant.sup_norm();
  if (measured > resonance_tol) {
    std::ostringstream os;
    os << "cannot invert difference operator: resonant part has sup-norm " << num::to_double(measured)
       << " > tolerance " << num::to_double(resonance_tol);
    throw DomainError(os.str(), num::to_double(measured));
  }
  // Backward difference of phi at theta is the forward one at theta - 1/q.
  const auto source = dir == Direction::forward ? g - resonant
                                                : shift(g - resonant, static_cast<std::ptrdiff_t>(step));
  const std::size_t n = g.size();
  std::vector<Real> phi(n, Real(0));
  for (std::size_t j = 0; j < n; ++j) {
    Real s = 0;
    for (int i = 1; i <= q; ++i) {
      s += static_cast<Real>(i) * source[(j + static_cast<std::size_t>(i - 1) * step) % n];
    }
    phi[j] = s / static_cast<Real>(q);
  }
  return BasicGridFn<Real>(std::move(phi));
}

template <class Real>
BasicGridFn<Real> invert_difference(const BasicGridFn<Real>& g, int q, Direction dir) {
  return invert_difference(g, q, dir, default_resonance_tolerance(g));
}

// ---------------------------------------------------------------------------
// Spectral calculus

/// d^order g / d theta^order in Fourier space. The Nyquist mode of an even
/// grid is dropped for odd orders.
template <class Real>
BasicGridFn<Real> spectral_derivative(const BasicGridFn<Real>& g, int order = 1) {
  if (order < 0) throw ConfigurationError("derivative order must be non-negative");
  if (order == 0) return g;
  auto c = spectrum(g);
  const std::size_t n = g.size();
  for (std::size_t k = 0; k < c.size(); ++k) {
    const std::complex<Real> ik{Real(0), num::two_pi<Real>() * static_cast<Real>(k)};
    std::complex<Real> f{Real(1), Real(0)};
    for (int i = 0; i < order; ++i) f *= ik;
    c[k] *= f;
  }
  if (n % 2 == 0 && order % 2 == 1) c[n / 2] = {};
  return from_spectrum<Real>(c, n);
}

template <class Real>
struct Antiderivative {
  BasicGridFn<Real> values;  ///< theta -> integral_0^theta g, at the grid points.
  Real mean = 0;             ///< mean of g; the slope of the secular part.
  bool periodic = true;      ///< false when the mean is non-negligible.
};

/// theta -> integral_0^theta g. The mean-free part is integrated spectrally;
/// the mean contributes the secular term mean * theta.
template <class Real>
Antiderivative<Real> antiderivative_from_zero(const BasicGridFn<Real>& g) {
  auto c = spectrum(g);
  const std::size_t n = g.size();
  const Real mean = c[0].real();
  c[0] = {};
  for (std::size_t k = 1; k < c.size(); ++k) {
    c[k] /= std::complex<Real>{Real(0), num::two_pi<Real>() * static_cast<Real>(k)};
  }
  if (n % 2 == 0) c[n / 2] = {};
  auto periodic_part = from_spectrum<Real>(c, n);
  const Real at_zero = periodic_part[0];
  std::vector<Real> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = periodic_part[j] - at_zero + mean * g.theta(j);
  const Real scale = num::max(g.sup_norm(), Real(1e-300));
  return {BasicGridFn<Real>(std::move(v)), mean, num::abs(mean) <= Real(64) * num::epsilon<Real>() * scale};
}

/// Empirical exponential decay rate of the Fourier coefficients: minus the
/// least-squares slope of log|g_k| against 2 pi k over the modes that stand
/// above round-off. Returns +infinity when fewer than two modes are resolved.
inline double decay_width_estimate(const GridFn& g) {
  const auto c = spectrum(g);
  const std::size_t n = g.size();
  const std::size_t kmax = (n - 1) / 2;
  double peak = 0;
  for (std::size_t k = 1; k <= kmax; ++k) peak = std::max(peak, std::abs(c[k]));
  if (peak == 0) return std::numeric_limits<double>::infinity();
  const double floor = std::max(peak * 1e-13, 1e-300);
  std::vector<double> xs, ys;
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double a = std::abs(c[k]);
    if (a > floor) {
      xs.push_back(2 * M_PI * static_cast<double>(k));
      ys.push_back(std::log(a));
    }
  }
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return std::max(0.0, -sxy / sxx);
}

// ---------------------------------------------------------------------------
// Circle maps

/// Degree-one lift u(theta) = theta + v(theta), stored through its periodic
/// displacement v on the grid.
class CircleMap {
 public:
  CircleMap() = default;

  explicit CircleMap(GridFn displacement) : displacement_(std::move(displacement)) {
    const double slope_min = derivative().min();
    if (!(slope_min > 0)) {
      std::ostringstream os;
      os << "circle map is not orientation preserving: min u' = " << slope_min;
      throw DomainError(os.str(), slope_min);
    }
  }

  static CircleMap identity(std::size_t n) { return CircleMap(GridFn::zeros(n)); }

  const GridFn& displacement() const noexcept { return displacement_; }
  std::size_t size() const noexcept { return displacement_.size(); }

  /// u(theta_j), unreduced.
  double operator[](std::size_t j) const { return displacement_.theta(j) + displacement_[j]; }

  /// u evaluated at an arbitrary point through the trigonometric interpolant of v.
  double operator()(double theta) const { return theta + interpolate(displacement_, theta); }

  /// u_theta = 1 + v'.
  GridFn derivative() const { return spectral_derivative(displacement_) + 1.0; }

 private:
  GridFn displacement_;
};

}  // namespace caustic
