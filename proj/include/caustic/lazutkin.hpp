#pragma once

// Lazutkin-type normal form X(s, theta) = sum_i F_2i(s) theta^2i with
// Y = X - X o T^-1, built order by order so that X o T - 2X + X o T^-1
// vanishes to order theta^(2k+4), and the approximate invariant circle
// map obtained by pulling back the line Y = 1/q.
//
// Each F_2i solves a second order equation whose coefficients and source
// come from the Taylor expansion of the map. In an arbitrary parameter t
// with speed |r'| and radius of curvature rho the operator factors as
//
//   L_m[rho^(m/3) g] = 4 rho^((m+4)/3) / |r'| * (rho^(2/3) g' / |r'|)'
//
// so two quadratures solve it. The source is the theta^(m+2) coefficient
// of the residual left by the lower orders.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>
#include <vector>

#include "billiard.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "numeric.hpp"
#include "periodic.hpp"
#include "series.hpp"

namespace caustic {

struct NormalFormOptions {
  std::size_t min_grid = 64;
  std::size_t max_grid = 4096;
  double max_solvability_defect = 1e-6;  ///< |mean of the source| relative to max(sup, 1)
};

/// F_0(s) = s + p(s) and periodic F_2, ..., F_2k on a uniform grid of the
/// curve parameter, evaluable anywhere through trigonometric interpolation.
template <class Real>
class BasicNormalForm {
 public:
  BasicNormalForm() = default;
  BasicNormalForm(std::vector<BasicGridFn<Real>> parts, Real c_norm)
      : parts_(std::move(parts)), c_norm_(c_norm) {
    for (const auto& p : parts_) interp_.emplace_back(p);
  }

  int order() const noexcept { return static_cast<int>(parts_.size()) - 1; }
  std::size_t grid() const noexcept { return parts_.front().size(); }
  Real c_norm() const noexcept { return c_norm_; }

  /// Grid samples: part(0) is F_0 - s, part(i) is F_2i.
  const BasicGridFn<Real>& part(int i) const { return parts_.at(static_cast<std::size_t>(i)); }

  /// d^n F_2i / ds^n at s (s unreduced; F_0 carries the secular term).
  Real F(int i, Real s, int n = 0) const {
    const auto& ip = interp_.at(static_cast<std::size_t>(i));
    const Real frac = s - num::floor(s);
    Real v = ip.derivative(frac, n);
    if (i == 0 && n == 0) v += s;
    if (i == 0 && n == 1) v += Real(1);
    return v;
  }

  Real X(Real s, Real theta) const {
    Real v = 0, t2 = theta * theta, w = 1;
    for (int i = 0; i <= order(); ++i, w *= t2) v += F(i, s) * w;
    return v;
  }

  /// F_0^{-1}(x) by Newton from s = x.
  Real F0_inverse(Real x) const {
    Real s = x;
    for (int it = 0; it < 60; ++it) {
      const Real f = F(0, s) - x;
      s -= f / F(0, s, 1);
      if (num::abs(f) <= 4 * num::epsilon<Real>() * (Real(1) + num::abs(x))) break;
    }
    return s;
  }

  double solvability_defect = 0;  ///< worst relative mean of the quadrature sources
  double formal_defect = 0;       ///< worst residual Taylor coefficient below theta^(2k+4)

 private:
  std::vector<BasicGridFn<Real>> parts_;
  std::vector<Interpolant<Real>> interp_;
  Real c_norm_ = 1;
};

using NormalForm = BasicNormalForm<double>;

namespace detail {

/// Taylor coefficients of every part at grid point j, up to `order`, in
/// quad precision.
template <class Real>
std::vector<std::vector<quad>> taylor_at(const std::vector<std::vector<BasicGridFn<Real>>>& derivs, std::size_t j,
                                         std::size_t n, int order) {
  std::vector<std::vector<quad>> out(derivs.size());
  for (std::size_t i = 0; i < derivs.size(); ++i) {
    auto& c = out[i];
    c.resize(static_cast<std::size_t>(order) + 1);
    quad fact = 1;
    for (int d = 0; d <= order; ++d) {
      if (d > 0) fact *= d;
      c[static_cast<std::size_t>(d)] = static_cast<quad>(derivs[i][static_cast<std::size_t>(d)][j]) / fact;
    }
    if (i == 0) {
      c[0] += static_cast<quad>(j) / static_cast<quad>(n);
      if (order >= 1) c[1] += 1;
    }
  }
  return out;
}

/// X(s+, theta+) - 2 X(s, theta) + X(s-, theta-) as a series in theta.
template <class Real>
Series<Real> residual_series(const MapSeries<Real>& ms, const std::vector<std::vector<Real>>& taylor, int order) {
  Series<Real> r(order);
  const auto x = Series<Real>::variable(order);
  for (std::size_t i = 0; i < taylor.size(); ++i) {
    const Series<Real> T(order, taylor[i]);
    const int p = 2 * static_cast<int>(i);
    r += compose(T, ms.delta_plus) * ipow(ms.theta_plus, p);
    r += compose(T, ms.delta_minus) * ipow(ms.theta_minus, p);
    r -= (Real(2) * T[0]) * ipow(x, p);
  }
  return r;
}

template <class Real>
Real trim_level() {
  return Real(64) * num::epsilon<Real>();
}

/// g and its derivatives up to `order`, differentiated from the trimmed
/// spectrum so that tail round-off is not amplified.
template <class Real>
std::vector<BasicGridFn<Real>> derivative_table(const BasicGridFn<Real>& g, int order) {
  auto c = spectrum(g);
  const std::size_t n = g.size();
  Real peak = 1;  // the parts are dimensionless
  for (const auto& z : c) peak = num::max(peak, num::cabs(z));
  std::size_t kmax = c.size();
  while (kmax > 1 && num::cabs(c[kmax - 1]) <= trim_level<Real>() * peak) c[--kmax] = {};
  if (n % 2 == 0) c[n / 2] = {};
  std::vector<BasicGridFn<Real>> out;
  for (int d = 0; d <= order; ++d) {
    out.push_back(from_spectrum<Real>(c, n));
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] *= std::complex<Real>{Real(0), num::two_pi<Real>() * static_cast<Real>(k)};
    }
  }
  return out;
}

struct BuildAttempt {
  bool resolved = true;
  double worst_tail = 0;
};

template <class Real>
BasicNormalForm<Real> build_on_grid(const BasicFourierCurve<Real>& c, int k, std::size_t n,
                                    const NormalFormOptions& opt, BuildAttempt& att) {
  const Real tail_tol = Real(1e3) * num::epsilon<Real>();
  auto note_tail = [&](const BasicGridFn<Real>& g) {
    const Real t = spectral_tail(g, Real(1));
    att.worst_tail = std::max(att.worst_tail, num::to_double(t));
    if (t > tail_tol) att.resolved = false;
  };

  std::vector<Real> speed(n), rho(n), cr(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Real t = static_cast<Real>(j) / static_cast<Real>(n);
    const auto jt = c.template jet<3>(t);
    const Real v = norm(jt[1]);
    const Real x = cross(jt[1], jt[2]);
    if (!(x > Real(0))) throw NormalFormError("curvature must be positive for the normal form");
    speed[j] = v;
    cr[j] = x;
    rho[j] = v * v * v / x;
  }
  const BasicGridFn<Real> sp(speed), rh(rho);
  // F_0' = C |r'| rho^(-2/3)
  std::vector<Real> fv(n);
  for (std::size_t j = 0; j < n; ++j) fv[j] = num::pow(cr[j], Real(2) / Real(3)) / speed[j];
  const BasicGridFn<Real> f(std::move(fv));
  note_tail(f);
  const Real C = Real(1) / f.mean();
  auto p0 = antiderivative_from_zero(trim_spectrum(C * f + Real(-1), trim_level<Real>(), Real(1))).values;

  const int top = 2 * k + 4;
  std::vector<BasicGridFn<Real>> parts{p0};
  std::vector<std::vector<BasicGridFn<Real>>> derivs{derivative_table(p0, top)};
  // The map expansion cancels heavily (its coefficients grow like the
  // curvature to the power of the order), so it is always taken in quad.
  const auto cq = c.template cast<quad>();
  std::vector<MapSeries<quad>> maps(n);
  for (std::size_t j = 0; j < n; ++j) maps[j] = billiard_series(cq, static_cast<quad>(j) / static_cast<quad>(n), top);

  double solv = 0;
  const auto w0 = sp * rh.map([](Real r) { return num::pow(r, Real(-2) / Real(3)); });
  for (int i = 1; i <= k; ++i) {
    const int m = 2 * i;
    std::vector<Real> src(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto R = residual_series(maps[j], taylor_at(derivs, j, n, top), top);
      // S = -P |r'| rho^(-(m+4)/3) / 4
      src[j] = -static_cast<Real>(R[m + 2]) * speed[j] * num::pow(rho[j], -static_cast<Real>(m + 4) / Real(3)) / Real(4);
    }
    BasicGridFn<Real> S(std::move(src));
    note_tail(S);
    const Real mean_s = S.mean();
    solv = std::max(solv, num::to_double(num::abs(mean_s) / num::max(S.sup_norm(), Real(1))));
    const auto W = antiderivative_from_zero(S + (-mean_s)).values;
    const Real K = -(w0 * W).mean() / w0.mean();
    const auto g = antiderivative_from_zero(w0 * (W + K)).values;
    const auto G = trim_spectrum(rh.map([m](Real r) { return num::pow(r, static_cast<Real>(m) / Real(3)); }) * g,
                                 trim_level<Real>(), Real(1));
    note_tail(G);
    parts.push_back(G);
    derivs.push_back(derivative_table(G, top));
  }

  // Remaining Taylor coefficients below the target order.
  double formal = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto R = residual_series(maps[j], taylor_at(derivs, j, n, top), top);
    for (int e = 0; e < top; ++e) formal = std::max(formal, num::to_double(num::abs(R[e])));
  }

  if (solv > opt.max_solvability_defect) {
    std::ostringstream os;
    os << "normal form source has non-zero mean (relative " << solv << "); the order equation has no periodic solution";
    throw NormalFormError(os.str());
  }
  BasicNormalForm<Real> nf(std::move(parts), C);
  nf.solvability_defect = solv;
  nf.formal_defect = formal;
  return nf;
}

}  // namespace detail

/// Builds F_0..F_2k. The grid is doubled until every computed function is
/// spectrally resolved.
template <class Real>
BasicNormalForm<Real> build_normal_form(const BasicFourierCurve<Real>& c, int k, const NormalFormOptions& opt = {}) {
  if (k < 0) throw ConfigurationError("normal form order must be non-negative");
  std::size_t n = std::max<std::size_t>(opt.min_grid, detail::next_pow2(8 * (2 * c.modes() + 1)));
  detail::BuildAttempt last;
  for (; n <= opt.max_grid; n *= 2) {
    detail::BuildAttempt att;
    auto nf = detail::build_on_grid(c, k, n, opt, att);
    if (att.resolved) return nf;
    last = att;
  }
  std::ostringstream os;
  os << "normal form unresolved on " << opt.max_grid << " points (spectral tail " << last.worst_tail << ")";
  throw NormalFormError(os.str());
}

/// (x, y) = (X(s, theta), X(s, theta) - X(T^-1(s, theta))).
template <class Real>
std::pair<Real, Real> eval_XY(const BasicNormalForm<Real>& nf, const BasicFourierCurve<Real>& c,
                              BasicChordState<Real> st) {
  const auto back = billiard_step_detail(c, st, Direction::backward);
  const Real x = nf.X(st.s, st.theta);
  return {x, x - nf.X(st.s - back.h, back.state.theta)};
}

/// X o T - 2 X + X o T^-1 at a state, with both reflections computed directly.
template <class Real>
Real homological_residual(const BasicNormalForm<Real>& nf, const BasicFourierCurve<Real>& c,
                          BasicChordState<Real> st) {
  const auto fwd = billiard_step_detail(c, st, Direction::forward);
  const auto back = billiard_step_detail(c, st, Direction::backward);
  return nf.X(st.s + fwd.h, fwd.state.theta) - 2 * nf.X(st.s, st.theta) + nf.X(st.s - back.h, back.state.theta);
}

struct InitialMap {
  CircleMap map;
  GridFn theta;                ///< reflection angle along the curve y = 1/q
  double max_residual = 0;     ///< worst |(X, Y) - (theta_j, 1/q)|
  int max_iterations = 0;
};

/// Pulls the line y = 1/q back through the normal form: for each grid point
/// theta_j solves (X, Y)(s, theta) = (theta_j, 1/q) by Newton with a
/// difference Jacobian.
inline InitialMap initial_circle_map_detail(const NormalForm& nf, const FourierCurve& c, int q, std::size_t n) {
  if (q < 3) throw ConfigurationError("rotation denominator q must be at least 3");
  const double y = 1.0 / q;
  std::vector<double> v(n), ang(n);
  InitialMap out;
  auto residual = [&](double s, double th, double x) {
    const auto [X, Y] = eval_XY(nf, c, ChordState{s, th});
    return std::pair<double, double>{X - x, Y - y};
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(n);
    double s = nf.F0_inverse(x);
    // y ~ F_0'(s) (s - s-) = F_0'(s) b_1(s) theta with b_1 = 2 rho / |r'|
    const double b1 = 2 / (curvature_of(c, s) * speed_of(c, s));
    double th = y / (nf.F(0, s, 1) * b1);
    double err = 0;
    int it = 0;
    for (; it < 40; ++it) {
      if (!(th > 0 && th < M_PI)) break;
      const auto [f1, f2] = residual(s, th, x);
      err = std::hypot(f1, f2);
      if (err <= 1e-14) break;
      const double hs = 1e-7, ht = 1e-7 * th;
      const auto [a1, a2] = residual(s + hs, th, x);
      const auto [c1, c2] = residual(s, th + ht, x);
      const double j11 = (a1 - f1) / hs, j21 = (a2 - f2) / hs, j12 = (c1 - f1) / ht, j22 = (c2 - f2) / ht;
      const double det = j11 * j22 - j12 * j21;
      if (!(std::abs(det) > 0)) break;
      s -= (j22 * f1 - j12 * f2) / det;
      th -= (-j21 * f1 + j11 * f2) / det;
    }
    if (!(err <= 1e-12)) {
      std::ostringstream os;
      os << "initializer Newton failed at theta = " << x << " (residual " << err << " after " << it << " steps)";
      throw InitializerError(os.str());
    }
    out.max_residual = std::max(out.max_residual, err);
    out.max_iterations = std::max(out.max_iterations, it);
    v[j] = s - x;
    ang[j] = th;
  }
  out.map = CircleMap(GridFn(std::move(v)));
  out.theta = GridFn(std::move(ang));
  return out;
}

inline CircleMap initial_circle_map(const NormalForm& nf, const FourierCurve& c, int q, std::size_t n) {
  return initial_circle_map_detail(nf, c, q, n).map;
}

}  // namespace caustic
