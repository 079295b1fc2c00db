#pragma once

// The chord-length generating function, the defect functionals E and F,
// the billiard map and its Taylor expansion in the reflection angle.
//
// Angle conventions. For a state (s, theta) the outgoing chord makes the
// angle theta with the positive tangent r'(s), so cos(theta) = -d1 L(s, s+h)
// and cos(theta+) = d2 L(s, s+h) at the next impact. Both directions of the
// map are solved as small-angle equations so that relative accuracy is kept
// down to grazing chords.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "curve.hpp"
#include "errors.hpp"
#include "numeric.hpp"
#include "periodic.hpp"
#include "series.hpp"

namespace caustic {

template <class Real>
struct BasicChordState {
  Real s = 0;      ///< boundary parameter, reduced to [0, 1)
  Real theta = 0;  ///< angle to the positive tangent, in (0, pi)
};

using ChordState = BasicChordState<double>;

template <class Real>
struct ChordData {
  Real L = 0;    ///< |r(s') - r(s)|
  Real d1 = 0;   ///< dL/ds
  Real d2 = 0;   ///< dL/ds'
  Real d12 = 0;  ///< d2L/ds ds'
};

template <class Real>
Real reduce_unit(Real s) {
  s -= num::floor(s);
  return s >= Real(1) ? s - Real(1) : s;
}

/// L(s, s') and its first and mixed second partials.
template <class Real>
ChordData<Real> chord_data(const BasicFourierCurve<Real>& c, Real s, Real s2) {
  const auto d = c.chord(s, s2 - s);
  const Real L = norm(d);
  if (!(L > Real(1e3) * num::epsilon<Real>() * c.leading())) {
    throw SingularChordError("coincident chord endpoints");
  }
  const auto n = d / L;
  const auto t1 = c.derivative(s, 1), t2 = c.derivative(s2, 1);
  ChordData<Real> out;
  out.L = L;
  out.d1 = -dot(n, t1);
  out.d2 = dot(n, t2);
  // d/ds of the unit chord is (-t1 + n <n, t1>) / L.
  out.d12 = -cross(n, t1) * cross(n, t2) / L;
  return out;
}

// ---------------------------------------------------------------------------
// Defects along a grid family of chords

namespace detail {

struct ChordFamily {
  std::vector<double> u;               // u(theta_j), unreduced
  std::vector<Vec2<double>> unit;      // unit chord from u_j to u_{j+step}
  std::vector<double> length;
  std::size_t step = 0;
};

inline ChordFamily chord_family(const FourierCurve& c, const CircleMap& u, int q) {
  ChordFamily f;
  const std::size_t n = u.size();
  f.step = cells_per_rotation(n, q);
  f.u.resize(n);
  for (std::size_t j = 0; j < n; ++j) f.u[j] = u[j];
  f.unit.resize(n);
  f.length.resize(n);
  const double floor = 1e-12 * c.leading();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = j + f.step;
    const double next = k < n ? f.u[k] : f.u[k - n] + 1;
    const auto d = c.chord(f.u[j], next - f.u[j]);
    const double L = norm(d);
    if (!(L > floor)) {
      std::ostringstream os;
      os << "chord from u(" << u.displacement().theta(j) << ") degenerates (length " << L << ")";
      throw SingularChordError(os.str());
    }
    f.length[j] = L;
    f.unit[j] = d / L;
  }
  return f;
}

template <class Weight>
GridFn defect(const FourierCurve& c, const CircleMap& u, int q, Weight weight) {
  const auto f = chord_family(c, u, q);
  const std::size_t n = u.size();
  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t prev = (j + n - f.step) % n;
    e[j] = dot(f.unit[prev] - f.unit[j], weight(f.u[j]));
  }
  return GridFn(std::move(e));
}

}  // namespace detail

/// E(r, u) = < dr-/|dr-| - dr/|dr|, r'(u) > on the grid of u.
inline GridFn defect_E(const FourierCurve& c, const CircleMap& u, int q) {
  return detail::defect(c, u, q, [&](double s) { return c.derivative(s, 1); });
}

/// F(r, u) = < dr-/|dr-| - dr/|dr|, r(u) >.
inline GridFn defect_F(const FourierCurve& c, const CircleMap& u, int q) {
  return detail::defect(c, u, q, [&](double s) { return c(s); });
}

/// |r(u(theta + 1/q)) - r(u(theta))| on the grid.
inline GridFn chord_lengths(const FourierCurve& c, const CircleMap& u, int q) {
  return GridFn(detail::chord_family(c, u, q).length);
}

/// d12 L(u, u+) along the family, i.e. the coefficient of the Moser-Levi
/// operator at u.
inline GridFn mixed_partial(const FourierCurve& c, const CircleMap& u, int q) {
  const auto f = detail::chord_family(c, u, q);
  const std::size_t n = u.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = j + f.step;
    const double next = k < n ? f.u[k] : f.u[k - n] + 1;
    out[j] = -cross(f.unit[j], c.derivative(f.u[j], 1)) * cross(f.unit[j], c.derivative(next, 1)) / f.length[j];
  }
  return GridFn(std::move(out));
}

// ---------------------------------------------------------------------------
// Billiard map

template <class Real>
struct StepDetail {
  BasicChordState<Real> state;
  Real h = 0;         ///< parameter advanced, positive in both directions
  Real residual = 0;  ///< |angle equation| at the solution
  int iterations = 0;
};

namespace detail {

/// Angle between the chord to s +- h and the tangent at s, increasing in h
/// from 0 to pi, with its h-derivative. The cross product is taken against
/// the chord remainder, which carries all of it without cancellation.
template <class Real>
std::pair<Real, Real> launch_angle(const BasicFourierCurve<Real>& c, Real s, Vec2<Real> tangent, Real h,
                                   Direction dir) {
  if (dir == Direction::forward) {
    const auto d = c.chord(s, h);
    const Real a = num::atan2(cross(tangent, c.chord_remainder(s, h)), dot(tangent, d));
    return {a, cross(d, c.derivative(s + h, 1)) / dot(d, d)};
  }
  // d points from r(s - h) to r(s); d = h r'(s) - R(s, -h).
  const auto d = -c.chord(s, -h);
  const Real a = num::atan2(-cross(c.chord_remainder(s, -h), tangent), dot(d, tangent));
  return {a, -cross(d, c.derivative(s - h, 1)) / dot(d, d)};
}

/// Angle at the far end of a chord, taken as a small angle where possible.
/// Forward: from the chord r(s) -> r(s+h) to the tangent at s+h.
/// Backward: from the tangent at s-h to the chord r(s-h) -> r(s).
template <class Real>
Real arrival_angle(const BasicFourierCurve<Real>& c, Real s, Real h, Direction dir) {
  if (dir == Direction::forward) {
    // d = h r'(s+h) - R(s+h, -h)
    const auto d = c.chord(s, h);
    const auto t2 = c.derivative(s + h, 1);
    return num::atan2(-cross(c.chord_remainder(s + h, -h), t2), dot(d, t2));
  }
  // d = h r'(s-h) + R(s-h, h)
  const auto d = -c.chord(s, -h);
  const auto t0 = c.derivative(s - h, 1);
  return num::atan2(cross(t0, c.chord_remainder(s - h, h)), dot(t0, d));
}

}  // namespace detail

/// One reflection forward, or its inverse. Safeguarded Newton on the launch
/// angle with a bracket on (0, 1), which always selects the first impact.
template <class Real>
StepDetail<Real> billiard_step_detail(const BasicFourierCurve<Real>& c, BasicChordState<Real> st, Direction dir) {
  const Real pi = num::pi<Real>();
  if (!(st.theta > Real(0) && st.theta < pi)) {
    std::ostringstream os;
    os << "reflection angle " << num::to_double(st.theta) << " outside (0, pi)";
    throw GeometricFailure(os.str());
  }
  const auto jt = c.template jet<3>(st.s);
  const Vec2<Real> tangent = jt[1];
  const Real v = norm(tangent);
  const Real kappa = cross(jt[1], jt[2]) / (v * v * v);
  Real lo = 0, hi = 1;
  Real h = kappa > Real(0) ? 2 * st.theta / (kappa * v) : Real(0.5);
  if (!(h > lo && h < hi)) h = Real(0.5);
  const Real tol = 16 * num::epsilon<Real>() * num::max(st.theta, Real(1e-300));
  Real f = 0;
  int it = 0;
  for (; it < 200; ++it) {
    const auto [a, da] = detail::launch_angle(c, st.s, tangent, h, dir);
    f = a - st.theta;
    if (num::abs(f) <= tol) break;
    if (f > 0) hi = h; else lo = h;
    Real next = da > Real(0) ? h - f / da : (lo + hi) / 2;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (hi - lo <= 4 * num::epsilon<Real>() * hi) {
      h = next;
      break;
    }
    h = next;
  }
  if (it == 200 || !(num::abs(f) <= Real(1e3) * tol)) {
    std::ostringstream os;
    os << "billiard step did not converge at s = " << num::to_double(st.s) << ", theta = "
       << num::to_double(st.theta) << " (residual " << num::to_double(f) << ", bracket [" << num::to_double(lo)
       << ", " << num::to_double(hi) << "])";
    throw GeometricFailure(os.str());
  }
  StepDetail<Real> out;
  out.h = h;
  out.residual = num::abs(f);
  out.iterations = it;
  out.state = {reduce_unit(dir == Direction::forward ? st.s + h : st.s - h), detail::arrival_angle(c, st.s, h, dir)};
  return out;
}

template <class Real>
BasicChordState<Real> billiard_step(const BasicFourierCurve<Real>& c, BasicChordState<Real> st,
                                    Direction dir = Direction::forward) {
  return billiard_step_detail(c, st, dir).state;
}

// ---------------------------------------------------------------------------
// Taylor expansion of the map in theta

/// s+- - s and theta+- as power series in theta at a fixed boundary point.
template <class Real>
struct MapSeries {
  Series<Real> delta_plus, theta_plus, delta_minus, theta_minus;
};

/// Expands the billiard map at parameter t to the given order. The chord
/// direction and the reflected angle are power series in the parameter
/// increment; reverting the first gives s+ and composing gives theta+.
/// Reversibility yields the backward map: delta-(theta) = delta+(-theta),
/// theta-(theta) = -theta+(-theta).
template <class Real>
MapSeries<Real> billiard_series(const BasicFourierCurve<Real>& c, Real t, int order) {
  const int n = order;
  std::vector<Vec2<Real>> r(static_cast<std::size_t>(n) + 3);
  c.jet_into(t, n + 2, r.data());
  Series<Real> dx(n), dy(n), tx(n), ty(n);
  Real fact = 1;  // (k+1)!
  Real kfact = 1;  // k!
  for (int k = 0; k <= n; ++k) {
    fact *= static_cast<Real>(k + 1);
    if (k > 0) kfact *= static_cast<Real>(k);
    dx[k] = r[k + 1].x / fact;
    dy[k] = r[k + 1].y / fact;
    tx[k] = r[k + 1].x / kfact;
    ty[k] = r[k + 1].y / kfact;
  }
  const Vec2<Real> tau = r[1];
  // Angle of the chord against the tangent at t.
  const Series<Real> phi = atan((tau.x * dy - tau.y * dx) / (tau.x * dx + tau.y * dy));
  // Angle from the chord to the tangent at t + h.
  const Series<Real> psi = atan((dx * ty - dy * tx) / (dx * tx + dy * ty));
  MapSeries<Real> m;
  m.delta_plus = revert(phi);
  m.theta_plus = compose(psi, m.delta_plus);
  m.delta_minus = m.delta_plus.reflected();
  m.theta_minus = -m.theta_plus.reflected();
  return m;
}

// ---------------------------------------------------------------------------
// Jets by ladder fits

/// s+- = s + sum b_k+- theta^k, theta+- = theta + sum d_k+- theta^k, with
/// b_k- = (-1)^k b_k+ and d_k- = (-1)^{k+1} d_k+ (time reversal). Stored
/// are the forward coefficients: b[k-1] = b_k, d[k-2] = d_k.
struct JetTable {
  std::vector<GridFn> b;
  std::vector<GridFn> d;
  int order = 0;
  double max_fit_residual = 0;  ///< worst rms of the fits, relative to b_1 theta or theta

  const GridFn& bk(int k) const { return b.at(static_cast<std::size_t>(k - 1)); }
  const GridFn& dk(int k) const { return d.at(static_cast<std::size_t>(k - 2)); }
};

struct LadderOptions {
  double theta0 = 1e-2;
  int levels = 8;
  std::size_t grid = 128;
  double max_residual = 1e-8;  ///< rms of each fit relative to its leading-order term
};

namespace detail {

/// Least squares for y ~ sum_i a_i x^{p_i} by Householder QR. The rms
/// residual is reported relative to the rms of `ref`.
inline std::vector<double> power_fit(const std::vector<double>& x, const std::vector<double>& y,
                                     const std::vector<int>& powers, const std::vector<double>& ref,
                                     double* rel_rms) {
  const std::size_t m = x.size(), n = powers.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) a[j][i] = std::pow(x[i], powers[j]);
  std::vector<double> b = y;
  for (std::size_t j = 0; j < n; ++j) {
    double nrm = 0;
    for (std::size_t i = j; i < m; ++i) nrm += a[j][i] * a[j][i];
    nrm = std::sqrt(nrm);
    const double alpha = a[j][j] > 0 ? -nrm : nrm;
    std::vector<double> v(m, 0.0);
    for (std::size_t i = j; i < m; ++i) v[i] = a[j][i];
    v[j] -= alpha;
    double vv = 0;
    for (std::size_t i = j; i < m; ++i) vv += v[i] * v[i];
    if (vv == 0) continue;
    auto reflect = [&](std::vector<double>& col) {
      double s = 0;
      for (std::size_t i = j; i < m; ++i) s += v[i] * col[i];
      s = 2 * s / vv;
      for (std::size_t i = j; i < m; ++i) col[i] -= s * v[i];
    };
    for (std::size_t k = j; k < n; ++k) reflect(a[k]);
    reflect(b);
  }
  std::vector<double> coef(n);
  for (std::size_t j = n; j-- > 0;) {
    double s = b[j];
    for (std::size_t k = j + 1; k < n; ++k) s -= a[k][j] * coef[k];
    coef[j] = s / a[j][j];
  }
  double res = 0, scale = 0;
  for (std::size_t i = n; i < m; ++i) res += b[i] * b[i];
  for (double v : ref) scale += v * v;
  *rel_rms = scale > 0 ? std::sqrt(res / scale) : 0.0;
  return coef;
}

}  // namespace detail

/// Fits the jets b_1..b_J, d_2..d_J of an arclength-parametrized curve from
/// billiard steps on a geometric ladder of angles.
inline JetTable extract_jets(const FourierCurve& c, int order, const LadderOptions& opt = {}) {
  if (order < 2) throw ConfigurationError("jet order must be at least 2");
  if (opt.levels < (order + 2) / 2 + 1) throw ConfigurationError("ladder too short for the requested jet order");
  const std::size_t n = opt.grid;
  std::vector<double> x(static_cast<std::size_t>(opt.levels));
  for (int i = 0; i < opt.levels; ++i) x[static_cast<std::size_t>(i)] = std::ldexp(1.0, -i);
  std::vector<int> odd, even;
  for (int k = 1; k <= order; ++k) (k % 2 ? odd : even).push_back(k);
  std::vector<int> odd3;
  for (int k : odd) if (k >= 3) odd3.push_back(k);

  std::vector<std::vector<double>> b(static_cast<std::size_t>(order), std::vector<double>(n));
  std::vector<std::vector<double>> d(static_cast<std::size_t>(order - 1), std::vector<double>(n));
  double worst = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(n);
    std::vector<double> y_bo, y_be, y_de, y_do, ref_s, ref_a;
    for (double xi : x) {
      const double th = opt.theta0 * xi;
      const auto f = billiard_step_detail(c, ChordState{s, th}, Direction::forward);
      const auto r = billiard_step_detail(c, ChordState{s, th}, Direction::backward);
      const double dp = f.h, dm = -r.h;
      y_bo.push_back((dp - dm) / 2);
      y_be.push_back((dp + dm) / 2);
      y_de.push_back((f.state.theta - r.state.theta) / 2);
      y_do.push_back((f.state.theta + r.state.theta) / 2 - th);
      ref_s.push_back((dp - dm) / 2);
      ref_a.push_back(th);
    }
    double rr = 0;
    // Coefficients are fitted in the scaled variable x = theta / theta0.
    auto unscale = [&](const std::vector<double>& coef, const std::vector<int>& pw, auto&& store) {
      for (std::size_t i = 0; i < pw.size(); ++i) store(pw[i], coef[i] / std::pow(opt.theta0, pw[i]));
    };
    auto bo = detail::power_fit(x, y_bo, odd, ref_s, &rr);
    worst = std::max(worst, rr);
    unscale(bo, odd, [&](int k, double v) { b[static_cast<std::size_t>(k - 1)][j] = v; });
    if (!even.empty()) {
      auto be = detail::power_fit(x, y_be, even, ref_s, &rr);
      worst = std::max(worst, rr);
      unscale(be, even, [&](int k, double v) { b[static_cast<std::size_t>(k - 1)][j] = v; });
      auto de = detail::power_fit(x, y_de, even, ref_a, &rr);
      worst = std::max(worst, rr);
      unscale(de, even, [&](int k, double v) { d[static_cast<std::size_t>(k - 2)][j] = v; });
    }
    if (!odd3.empty()) {
      auto dd = detail::power_fit(x, y_do, odd3, ref_a, &rr);
      worst = std::max(worst, rr);
      unscale(dd, odd3, [&](int k, double v) { d[static_cast<std::size_t>(k - 2)][j] = v; });
    }
  }
  if (worst > opt.max_residual) {
    std::ostringstream os;
    os << "jet fit residual " << worst << " above " << opt.max_residual;
    throw JetExtractionError(os.str());
  }
  JetTable t;
  t.order = order;
  t.max_fit_residual = worst;
  for (auto& v : b) t.b.emplace_back(std::move(v));
  for (auto& v : d) t.d.emplace_back(std::move(v));
  return t;
}

/// The same jets read off the exact Taylor expansion of the map.
template <class Real>
JetTable series_jets(const BasicFourierCurve<Real>& c, int order, std::size_t grid) {
  std::vector<std::vector<double>> b(static_cast<std::size_t>(order), std::vector<double>(grid));
  std::vector<std::vector<double>> d(static_cast<std::size_t>(order - 1), std::vector<double>(grid));
  for (std::size_t j = 0; j < grid; ++j) {
    const auto m = billiard_series(c, static_cast<Real>(j) / static_cast<Real>(grid), order);
    for (int k = 1; k <= order; ++k) b[static_cast<std::size_t>(k - 1)][j] = num::to_double(m.delta_plus[k]);
    for (int k = 2; k <= order; ++k) d[static_cast<std::size_t>(k - 2)][j] = num::to_double(m.theta_plus[k]);
  }
  JetTable t;
  t.order = order;
  for (auto& v : b) t.b.emplace_back(std::move(v));
  for (auto& v : d) t.d.emplace_back(std::move(v));
  return t;
}

}  // namespace caustic
