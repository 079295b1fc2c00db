#pragma once

// Closed convex curves stored as truncated Fourier series of both
// coordinates, and the geometry the rest of the library needs: derivatives,
// curvature, arclength normalization, radial scaling, composition with
// circle maps, reconstruction from curvature and a parametrization-free
// distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "numeric.hpp"
#include "periodic.hpp"

namespace caustic {

template <class Real>
struct Vec2 {
  Real x = 0, y = 0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(Real s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator/(Vec2 a, Real s) { return {a.x / s, a.y / s}; }
};

template <class Real>
Real dot(Vec2<Real> a, Vec2<Real> b) {
  return a.x * b.x + a.y * b.y;
}
template <class Real>
Real cross(Vec2<Real> a, Vec2<Real> b) {
  return a.x * b.y - a.y * b.x;
}
template <class Real>
Real norm(Vec2<Real> a) {
  return num::sqrt(dot(a, a));
}

enum class ParamKind { general, arclength_unit };

/// Thresholds standing in for the a priori bounds on speed and curvature.
struct ConvexityThresholds {
  double min_speed = 1e-3;
  double min_curvature = 1e-3;
};

/// Options for every operation that resamples a curve and refits it.
struct RefitOptions {
  double tail_tol = 1e-14;          ///< admissible relative size of the upper quarter of the spectrum
  std::size_t max_samples = 1 << 16;
};

/// r(s) = sum_{|k| <= K} c_k e^{2 pi i k s} for both coordinates; only
/// k >= 0 is stored, c_{-k} = conj(c_k).
template <class Real>
class BasicFourierCurve {
 public:
  using complex_t = std::complex<Real>;

  BasicFourierCurve() = default;
  BasicFourierCurve(std::vector<complex_t> cx, std::vector<complex_t> cy, ParamKind kind = ParamKind::general)
      : cx_(std::move(cx)), cy_(std::move(cy)), kind_(kind) {
    if (cx_.empty()) throw InputError("curve needs at least the mean coefficient");
    const std::size_t n = std::max(cx_.size(), cy_.size());
    cx_.resize(n);
    cy_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      if (!num::isfinite(cx_[k].real()) || !num::isfinite(cx_[k].imag()) || !num::isfinite(cy_[k].real()) ||
          !num::isfinite(cy_[k].imag())) {
        throw InputError("curve coefficient is not finite");
      }
    }
    // A real curve has real mean.
    cx_[0] = {cx_[0].real(), Real(0)};
    cy_[0] = {cy_[0].real(), Real(0)};
  }

  std::size_t modes() const noexcept { return cx_.size() - 1; }
  const std::vector<complex_t>& coeff_x() const noexcept { return cx_; }
  const std::vector<complex_t>& coeff_y() const noexcept { return cy_; }
  ParamKind param_kind() const noexcept { return kind_; }
  double width_estimate() const noexcept { return width_; }
  void set_width_estimate(double w) { width_ = w; }

  /// r^{(0)}..r^{(upto)} at s.
  template <std::size_t M>
  std::array<Vec2<Real>, M> jet(Real s) const {
    std::array<Vec2<Real>, M> out{};
    jet_into(s, static_cast<int>(M) - 1, out.data());
    return out;
  }

  void jet_into(Real s, int upto, Vec2<Real>* out) const {
    for (int m = 0; m <= upto; ++m) out[m] = {};
    out[0] = {cx_[0].real(), cy_[0].real()};
    const complex_t base = num::expi<Real>(num::two_pi<Real>() * s);
    complex_t e{Real(1), Real(0)};
    for (std::size_t k = 1; k < cx_.size(); ++k) {
      e *= base;
      complex_t ex = cx_[k] * e, ey = cy_[k] * e;
      const complex_t ik{Real(0), num::two_pi<Real>() * static_cast<Real>(k)};
      for (int m = 0; m <= upto; ++m) {
        out[m].x += 2 * ex.real();
        out[m].y += 2 * ey.real();
        ex *= ik;
        ey *= ik;
      }
    }
  }

  /// Any derivative of r at s.
  Vec2<Real> derivative(Real s, int order) const {
    if (order < 0) throw ConfigurationError("negative derivative order");
    std::vector<Vec2<Real>> out(static_cast<std::size_t>(order) + 1);
    jet_into(s, order, out.data());
    return out.back();
  }

  /// r(s) or one of its first three derivatives.
  Vec2<Real> evaluate(Real s, int order = 0) const {
    if (order < 0 || order > 3) throw ConfigurationError("evaluate supports derivative orders 0..3");
    return derivative(s, order);
  }

  Vec2<Real> operator()(Real s) const { return derivative(s, 0); }

  /// r(s + h) - r(s) without cancellation for small h:
  /// e^{2 pi i k h} - 1 = 2i sin(pi k h) e^{i pi k h}.
  Vec2<Real> chord(Real s, Real h) const {
    const complex_t base = num::expi<Real>(num::two_pi<Real>() * (s + h / 2));
    const complex_t w = num::expi<Real>(num::pi<Real>() * h);
    complex_t e{Real(1), Real(0)}, z{Real(1), Real(0)};
    Vec2<Real> d{};
    for (std::size_t k = 1; k < cx_.size(); ++k) {
      e *= base;
      z *= w;
      const complex_t f = complex_t{Real(0), 2 * z.imag()} * e;
      d.x += 2 * (cx_[k] * f).real();
      d.y += 2 * (cy_[k] * f).real();
    }
    return d;
  }

  /// r(s + h) - r(s) - h r'(s), accurate relative to its own size for small
  /// h; small-angle cross products against the tangent use this.
  Vec2<Real> chord_remainder(Real s, Real h) const {
    const complex_t base = num::expi<Real>(num::two_pi<Real>() * s);
    complex_t e{Real(1), Real(0)};
    Vec2<Real> d{};
    for (std::size_t k = 1; k < cx_.size(); ++k) {
      e *= base;
      const complex_t f = expm1_minus_linear(num::two_pi<Real>() * static_cast<Real>(k) * h) * e;
      d.x += 2 * (cx_[k] * f).real();
      d.y += 2 * (cy_[k] * f).real();
    }
    return d;
  }

  /// e^{iz} - 1 - iz.
  static complex_t expm1_minus_linear(Real z) {
    if (num::abs(z) > Real(1)) {
      return num::expi<Real>(z) - complex_t{Real(1), z};
    }
    // Horner on sum_{n >= 2} (iz)^n / n!.
    const complex_t iz{Real(0), z};
    int terms = 2;
    Real mag = z * z / 2;
    while (mag > num::epsilon<Real>() * Real(1e-3) * z * z && terms < 40) {
      ++terms;
      mag *= num::abs(z) / static_cast<Real>(terms);
    }
    complex_t acc{Real(1), Real(0)};
    for (int n = terms; n > 2; --n) acc = complex_t{Real(1), Real(0)} + iz * acc / static_cast<Real>(n);
    return iz * iz * acc / Real(2);
  }

  template <class T>
  BasicFourierCurve<T> cast() const {
    std::vector<std::complex<T>> x(cx_.size()), y(cy_.size());
    for (std::size_t k = 0; k < cx_.size(); ++k) {
      x[k] = {static_cast<T>(cx_[k].real()), static_cast<T>(cx_[k].imag())};
      y[k] = {static_cast<T>(cy_[k].real()), static_cast<T>(cy_[k].imag())};
    }
    BasicFourierCurve<T> c(std::move(x), std::move(y), kind_);
    c.set_width_estimate(width_);
    return c;
  }

  /// Largest |c_k| over k >= 1, both coordinates.
  Real leading() const {
    Real m = 0;
    for (std::size_t k = 1; k < cx_.size(); ++k) m = num::max(m, num::max(num::cabs(cx_[k]), num::cabs(cy_[k])));
    return m;
  }

 private:
  std::vector<complex_t> cx_, cy_;
  ParamKind kind_ = ParamKind::general;
  double width_ = std::numeric_limits<double>::infinity();
};

using FourierCurve = BasicFourierCurve<double>;

// ---------------------------------------------------------------------------
// Pointwise geometry

template <class Real>
Real speed_of(const BasicFourierCurve<Real>& c, Real s) {
  return norm(c.derivative(s, 1));
}

/// Signed curvature cross(r', r'') / |r'|^3, positive for counterclockwise
/// convex curves.
template <class Real>
Real curvature_of(const BasicFourierCurve<Real>& c, Real s, double min_speed = 1e-3) {
  const auto j = c.template jet<3>(s);
  const Real v = norm(j[1]);
  if (v < Real(min_speed)) {
    std::ostringstream os;
    os << "speed " << num::to_double(v) << " below threshold at s = " << num::to_double(s);
    throw DegenerateSpeedError(os.str());
  }
  return cross(j[1], j[2]) / (v * v * v);
}

/// Default number of dense samples for checks on a curve with K modes.
inline std::size_t dense_samples(std::size_t modes) {
  return std::max<std::size_t>(1024, 16 * (2 * modes + 1));
}

template <class Real>
Real perimeter(const BasicFourierCurve<Real>& c) {
  // The speed is analytic and periodic: the trapezoid rule is spectrally
  // accurate once the grid resolves a few times the bandwidth.
  const std::size_t n = dense_samples(c.modes());
  Real sum = 0;
  for (std::size_t j = 0; j < n; ++j) sum += speed_of(c, static_cast<Real>(j) / static_cast<Real>(n));
  return sum / static_cast<Real>(n);
}

/// Checks speed, curvature, the winding of the tangent and that the origin
/// is strictly inside. Throws on the first violation.
template <class Real>
void validate(const BasicFourierCurve<Real>& c, const ConvexityThresholds& th = {}) {
  const std::size_t n = dense_samples(c.modes());
  Real min_speed = std::numeric_limits<double>::max(), min_kappa = std::numeric_limits<double>::max();
  Real tangent_turn = 0, position_turn = 0;
  Vec2<Real> t_prev{}, p_prev{};
  for (std::size_t j = 0; j <= n; ++j) {
    const auto jt = c.template jet<3>(static_cast<Real>(j % n) / static_cast<Real>(n));
    if (j > 0) {
      tangent_turn += num::atan2(cross(t_prev, jt[1]), dot(t_prev, jt[1]));
      position_turn += num::atan2(cross(p_prev, jt[0]), dot(p_prev, jt[0]));
    }
    t_prev = jt[1];
    p_prev = jt[0];
    if (j == n) break;
    const Real v = norm(jt[1]);
    min_speed = num::min(min_speed, v);
    if (v > Real(0)) min_kappa = num::min(min_kappa, cross(jt[1], jt[2]) / (v * v * v));
  }
  if (min_speed < Real(th.min_speed)) {
    std::ostringstream os;
    os << "curve speed drops to " << num::to_double(min_speed) << " (threshold " << th.min_speed << ")";
    throw DegenerateSpeedError(os.str());
  }
  if (min_kappa < Real(th.min_curvature)) {
    std::ostringstream os;
    os << "curvature drops to " << num::to_double(min_kappa) << " (threshold " << th.min_curvature << ")";
    throw ConvexityLossError(os.str());
  }
  const double turns = num::to_double(tangent_turn) / (2 * M_PI);
  if (std::abs(turns - 1) > 1e-6) {
    std::ostringstream os;
    os << "tangent winding number is " << turns << ", expected 1";
    throw ConvexityLossError(os.str());
  }
  const double around = num::to_double(position_turn) / (2 * M_PI);
  if (std::abs(around - 1) > 1e-6) {
    std::ostringstream os;
    os << "origin is not strictly inside the curve (winding " << around << ")";
    throw InputError(os.str());
  }
}

// ---------------------------------------------------------------------------
// Resampling and refitting

namespace detail {

/// Fit a curve to samples of both coordinates on a uniform grid; report the
/// relative size of the upper quarter of the spectrum.
template <class Real>
BasicFourierCurve<Real> fit_samples(const std::vector<Real>& xs, const std::vector<Real>& ys, ParamKind kind,
                                    double tol, double* tail) {
  const std::size_t m = xs.size();
  auto cx = fft::rfft<Real>(xs);
  auto cy = fft::rfft<Real>(ys);
  const std::size_t kmax = (m - 1) / 2;  // no Nyquist term
  Real lead = 0, upper = 0;
  for (std::size_t k = 1; k <= kmax; ++k) {
    const Real a = num::max(num::cabs(cx[k]), num::cabs(cy[k]));
    lead = num::max(lead, a);
    if (k > m / 4) upper = num::max(upper, a);
  }
  *tail = lead > Real(0) ? num::to_double(upper / lead) : 0.0;
  // Trim the round-off plateau; anything this small is below what the
  // refit promises anyway.
  const Real floor = Real(tol / 10) * lead;
  std::size_t keep = kmax;
  while (keep > 1 && num::max(num::cabs(cx[keep]), num::cabs(cy[keep])) <= floor) --keep;
  cx.resize(keep + 1);
  cy.resize(keep + 1);
  return BasicFourierCurve<Real>(std::move(cx), std::move(cy), kind);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Tail tolerance for a refit: the configured value, but never tighter than
/// what the scalar type can resolve.
template <class Real>
double effective_tail_tol(const RefitOptions& opt) {
  if constexpr (std::is_same_v<Real, double>) return std::max(opt.tail_tol, 50 * num::epsilon<double>());
  return std::max(opt.tail_tol * 1e-16, 50 * num::to_double(num::epsilon<Real>()));
}

/// Sample `point(theta)` on successively finer grids until the refitted
/// series has a negligible tail.
template <class Real, class PointFn>
BasicFourierCurve<Real> refit(PointFn&& point, std::size_t start, ParamKind kind, const RefitOptions& opt,
                              const char* what) {
  const double tol = effective_tail_tol<Real>(opt);
  double tail = 0;
  for (std::size_t m = next_pow2(std::max<std::size_t>(start, 64)); m <= opt.max_samples; m *= 2) {
    std::vector<Real> xs(m), ys(m);
    for (std::size_t j = 0; j < m; ++j) {
      const Vec2<Real> p = point(static_cast<Real>(j) / static_cast<Real>(m), m);
      xs[j] = p.x;
      ys[j] = p.y;
    }
    auto c = fit_samples(xs, ys, kind, tol, &tail);
    if (tail <= tol) return c;
  }
  std::ostringstream os;
  os << what << ": spectral tail " << tail << " still above " << tol << " at " << opt.max_samples << " samples";
  throw ResolutionError(os.str());
}

}  // namespace detail

/// The same curve traversed at unit speed, scaled to unit perimeter.
template <class Real>
BasicFourierCurve<Real> reparametrize_arclength(const BasicFourierCurve<Real>& c, const RefitOptions& opt = {}) {
  const Real length = perimeter(c);
  if (!(length > Real(0))) throw DegenerateSpeedError("curve has zero length");
  // sigma(t) = t + p(t) is the normalized cumulative length.
  std::size_t n = detail::next_pow2(dense_samples(c.modes()));
  auto speed = BasicGridFn<Real>::sample(n, [&](Real t) { return speed_of(c, t) / length; });
  const auto cumulative = antiderivative_from_zero(speed - BasicGridFn<Real>::constant(n, speed.mean()));
  const Interpolant<Real> p(cumulative.values);

  const Real tol = 64 * num::epsilon<Real>();
  auto point = [&](Real s, std::size_t) {
    Real t = s;
    for (int it = 0;; ++it) {
      const Real f = t + p(t) - s;
      const Real df = speed_of(c, t) / length;
      const Real step = f / df;
      t -= step;
      if (num::abs(step) <= tol) break;
      if (it == 60 || !num::isfinite(t)) {
        std::ostringstream os;
        os << "arclength inversion did not converge at s = " << num::to_double(s);
        throw DegenerateSpeedError(os.str());
      }
    }
    return c(t) / length;
  };
  auto out = detail::refit<Real>(point, 4 * (2 * c.modes() + 1), ParamKind::arclength_unit, opt,
                                 "arclength reparametrization");
  out.set_width_estimate(c.width_estimate());
  return out;
}

/// s -> e^{a(s)} r(s), with a given on a grid in the curve's parameter.
template <class Real>
BasicFourierCurve<Real> radial_scale(const BasicFourierCurve<Real>& c, const BasicGridFn<Real>& a,
                                     const RefitOptions& opt = {}, const ConvexityThresholds& th = {}) {
  const Interpolant<Real> ai(a);
  auto point = [&](Real s, std::size_t) { return num::exp(ai(s)) * c(s); };
  auto out = detail::refit<Real>(point, 2 * std::max(a.size(), 2 * c.modes() + 1), ParamKind::general, opt,
                                 "radial scaling");
  try {
    validate(out, th);
  } catch (const DegenerateSpeedError& e) {
    throw ConvexityLossError(std::string("radial scaling: ") + e.what());
  }
  return out;
}

/// theta -> r(u(theta)).
inline FourierCurve compose_with_map(const FourierCurve& c, const CircleMap& u, const RefitOptions& opt = {}) {
  const Interpolant<double> v(u.displacement());
  auto point = [&](double t, std::size_t) { return c(t + v(t)); };
  return detail::refit<double>(point, 2 * std::max(u.size(), 2 * c.modes() + 1), ParamKind::general, opt,
                               "composition with circle map");
}

// ---------------------------------------------------------------------------
// Curvature profiles

/// Radius of curvature as a function of the normalized tangent angle psi,
/// the tangent being (cos 2 pi psi, sin 2 pi psi).
template <class Real>
struct BasicCurvatureProfile {
  BasicGridFn<Real> rho;

  /// Relative size of the first harmonic of rho, which closure forbids.
  Real closure_defect() const {
    const auto c = spectrum(rho);
    return c.size() > 1 ? num::cabs(c[1]) / num::abs(c[0].real()) : Real(0);
  }

  void check(double tol = 1e-12) const {
    if (!(rho.min() > Real(0))) throw DomainError("radius of curvature must be positive", num::to_double(rho.min()));
    const Real d = closure_defect();
    if (d > Real(tol)) {
      std::ostringstream os;
      os << "curvature profile does not close: relative first harmonic " << num::to_double(d);
      throw DomainError(os.str(), num::to_double(d));
    }
  }
};

using CurvatureProfile = BasicCurvatureProfile<double>;

/// The closed curve with the given radius of curvature, parametrized by the
/// tangent angle, with its Steiner point at the origin.
template <class Real>
BasicFourierCurve<Real> curve_from_curvature(const BasicCurvatureProfile<Real>& p, double closure_tol = 1e-12) {
  p.check(closure_tol);
  const auto r = spectrum(p.rho);
  const std::size_t n = p.rho.size();
  const std::size_t kr = (n - 1) / 2;  // the Nyquist mode of an even grid is dropped
  auto rho_hat = [&](std::ptrdiff_t k) -> std::complex<Real> {
    const std::size_t a = static_cast<std::size_t>(k < 0 ? -k : k);
    if (a > kr) return {};
    return k < 0 ? std::conj(r[a]) : r[a];
  };
  // x' = 2 pi rho cos(2 pi psi), y' = 2 pi rho sin(2 pi psi).
  const std::size_t K = kr + 1;
  std::vector<std::complex<Real>> cx(K + 1), cy(K + 1);
  const Real pi = num::pi<Real>();
  for (std::size_t k = 1; k <= K; ++k) {
    const auto kk = static_cast<std::ptrdiff_t>(k);
    const std::complex<Real> dx = pi * (rho_hat(kk - 1) + rho_hat(kk + 1));
    const std::complex<Real> dy = std::complex<Real>{Real(0), -pi} * (rho_hat(kk - 1) - rho_hat(kk + 1));
    const std::complex<Real> ik{Real(0), num::two_pi<Real>() * static_cast<Real>(k)};
    cx[k] = dx / ik;
    cy[k] = dy / ik;
  }
  return BasicFourierCurve<Real>(std::move(cx), std::move(cy), ParamKind::general);
}

/// Samples the radius of curvature of c against its tangent angle.
inline CurvatureProfile curvature_profile_of(const FourierCurve& c, std::size_t n) {
  const std::size_t dense = dense_samples(c.modes());
  // Unwrapped tangent angle on a dense grid, for seeding.
  std::vector<double> ts(dense + 1), psis(dense + 1);
  Vec2<double> prev = c.derivative(0.0, 1);
  double acc = std::atan2(prev.y, prev.x) / (2 * M_PI);
  for (std::size_t j = 0; j <= dense; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(dense);
    const auto d = c.derivative(t, 1);
    if (j > 0) acc += std::atan2(cross(prev, d), dot(prev, d)) / (2 * M_PI);
    prev = d;
    ts[j] = t;
    psis[j] = acc;
  }
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    double target = static_cast<double>(i) / static_cast<double>(n);
    while (target < psis[0]) target += 1;
    while (target >= psis[0] + 1) target -= 1;
    const auto it = std::upper_bound(psis.begin(), psis.end(), target);
    const std::size_t j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - psis.begin() - 1));
    double t = ts[j];
    double psi = psis[j];
    for (int k = 0; k < 50; ++k) {
      const auto jt = c.jet<3>(t);
      const double v = norm(jt[1]);
      const double dpsi = cross(jt[1], jt[2]) / (v * v) / (2 * M_PI);
      const double step = (psi - target) / dpsi;
      // Track the unwrapped angle through the step.
      const auto d_new = c.derivative(t - step, 1);
      psi += std::atan2(cross(jt[1], d_new), dot(jt[1], d_new)) / (2 * M_PI);
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    rho[i] = 1 / curvature_of(c, t);
  }
  return {GridFn(std::move(rho))};
}

/// C-infinity low-pass multiplier: 1 for |k| <= cutoff, 0 for |k| >= 2 cutoff.
inline double smooth_cutoff(double k, double cutoff) {
  const double x = std::abs(k) / cutoff;
  if (x <= 1) return 1;
  if (x >= 2) return 0;
  auto f = [](double t) { return t > 0 ? std::exp(-1 / t) : 0.0; };
  return f(2 - x) / (f(2 - x) + f(x - 1));
}

/// Spectral mollification of rho followed by removal of the first harmonic.
inline CurvatureProfile smooth_profile(const CurvatureProfile& p, double cutoff) {
  if (!(cutoff > 0)) throw ConfigurationError("smoothing cutoff must be positive");
  auto c = spectrum(p.rho);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= smooth_cutoff(static_cast<double>(k), cutoff);
  if (c.size() > 1) c[1] = {};
  if (p.rho.size() % 2 == 0) c.back() = {};
  auto rho = from_spectrum<double>(c, p.rho.size());
  if (!(rho.min() > 0)) throw DomainError("smoothed radius of curvature is not positive", rho.min());
  return {std::move(rho)};
}

// ---------------------------------------------------------------------------
// Distance

namespace detail {

/// Distance from p to the curve, starting the projection near parameter t0.
inline double distance_to_curve(const FourierCurve& c, Vec2<double> p, double t0) {
  double t = t0;
  for (int it = 0; it < 30; ++it) {
    const auto j = c.jet<3>(t);
    const Vec2<double> d = j[0] - p;
    const double f = dot(d, j[1]);
    const double df = dot(j[1], j[1]) + dot(d, j[2]);
    if (!(df > 0)) break;
    const double step = f / df;
    t -= step;
    if (std::abs(step) < 1e-16) break;
  }
  return norm(c(t) - p);
}

inline double one_sided_distance(const FourierCurve& a, const FourierCurve& b, std::size_t n) {
  std::vector<Vec2<double>> pb(n);
  for (std::size_t j = 0; j < n; ++j) pb[j] = b(static_cast<double>(j) / static_cast<double>(n));
  double worst = 0;
  std::size_t hint = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = a(static_cast<double>(i) / static_cast<double>(n));
    // Nearest dense sample; the previous winner is a good start.
    double best = norm(pb[hint] - p);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = norm(pb[j] - p);
      if (d < best) best = d, hint = j;
    }
    worst = std::max(worst, distance_to_curve(b, p, static_cast<double>(hint) / static_cast<double>(n)));
  }
  return worst;
}

}  // namespace detail

/// Symmetric sup of point-to-curve distances over dense samples.
inline double geometric_distance(const FourierCurve& a, const FourierCurve& b) {
  const std::size_t n = std::max<std::size_t>(512, 4 * (2 * std::max(a.modes(), b.modes()) + 1));
  return std::max(detail::one_sided_distance(a, b, n), detail::one_sided_distance(b, a, n));
}

}  // namespace caustic
