#pragma once

// The construction: radial projection removing the resonant defect, the
// Moser-Levi solve for the non-resonant part, Nekhoroshev sweeps, the
// damped KAM Newton step and the forge pipeline that chains them after
// the Lazutkin initializer.
//
// Everything acts on the uniform grid theta_j = j/N with N = M q, so the
// chord family r(theta_j) -> r(theta_j + 1/q) is exact on the grid.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "billiard.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "lazutkin.hpp"
#include "periodic.hpp"

namespace caustic {

struct ForgeConfig {
  int q = 0;
  int oversample = 32;        ///< M, grid points per rotation step
  int lazutkin_order = 2;     ///< k
  int nek_sweeps = 0;
  double tol_E = 1e-12;
  int max_kam_iters = 30;
  int max_halvings = 6;       ///< step damping: v, v/2, ..., v/2^max_halvings
  double divergence_ratio = 10;
  double min_slope = 0.05;    ///< smallest admissible 1 + v'
  /// The radial projection is skipped while |[E]_q| <= defer_ratio |{E}_q|:
  /// a resonant defect that small is mostly the quadratic echo of the
  /// non-resonant one, and scaling it away would deform a boundary that
  /// already has the caustic. Zero always projects.
  double defer_ratio = 1;
  int newton_corrections = 3;  ///< fixed-point passes for the (v E)' term
  RefitOptions refit;
  ConvexityThresholds thresholds;

  std::size_t grid() const { return static_cast<std::size_t>(oversample) * static_cast<std::size_t>(q); }

  void check() const {
    std::ostringstream os;
    if (q < 3) os << "q must be at least 3 (got " << q << ")";
    else if (oversample < 4) os << "oversampling must be at least 4 (got " << oversample << ")";
    else if (lazutkin_order < 0) os << "Lazutkin order must be non-negative";
    else if (nek_sweeps < 0) os << "Nekhoroshev sweep count must be non-negative";
    else if (!(tol_E > 0)) os << "residual tolerance must be positive";
    else if (max_kam_iters < 0) os << "KAM iteration cap must be non-negative";
    else if (max_halvings < 0 || !(divergence_ratio > 1)) os << "invalid damping safeguards";
    else if (!(defer_ratio >= 0)) os << "projection deferral ratio must be non-negative";
    else if (newton_corrections < 0) os << "Newton correction count must be non-negative";
    if (!os.str().empty()) throw ConfigurationError(os.str());
  }
};

// ---------------------------------------------------------------------------
// Radial projection

struct RadialProjection {
  GridFn a;             ///< log of the radial factor, 1/q-periodic, a(0) = 0
  FourierCurve curve;   ///< e^a r
  double resonant_before = 0;
  double resonant_after = 0;
};

/// [F(c, id)]_q on the grid, checked to stay away from zero.
inline GridFn resonant_F(const FourierCurve& c, int q, std::size_t n) {
  const auto F = resonant_part(defect_F(c, CircleMap::identity(n), q), q);
  const double lo = std::min(std::abs(F.min()), std::abs(F.max()));
  if (!(F.min() > 0 || F.max() < 0) || lo < 1e-8 * c.leading()) {
    std::ostringstream os;
    os << "resonant part of F comes within " << lo << " of zero; radial projection is degenerate";
    throw SingularChordError(os.str());
  }
  return F;
}

/// a = log([F]_q(0) / [F]_q): the closed form.
inline GridFn radial_log(const FourierCurve& c, int q, std::size_t n) {
  const auto F = resonant_F(c, q, n);
  const double f0 = F[0];
  return F.map([f0](double f) { return std::log(f0 / f); });
}

/// a = -integral_0^theta [E]_q / [F]_q: the defining quadrature, kept as an oracle.
inline GridFn radial_log_quadrature(const FourierCurve& c, int q, std::size_t n) {
  const auto F = resonant_F(c, q, n);
  const auto E = resonant_part(defect_E(c, CircleMap::identity(n), q), q);
  return -antiderivative_from_zero(E / F).values;
}

inline RadialProjection radial_projection(const FourierCurve& c, int q, std::size_t n, const RefitOptions& opt = {},
                                          const ConvexityThresholds& th = {}) {
  RadialProjection out;
  const auto id = CircleMap::identity(n);
  out.resonant_before = resonant_part(defect_E(c, id, q), q).sup_norm();
  out.a = radial_log(c, q, n);
  out.curve = out.a.sup_norm() == 0 ? c : radial_scale(c, out.a, opt, th);
  out.resonant_after = resonant_part(defect_E(out.curve, id, q), q).sup_norm();
  return out;
}

// ---------------------------------------------------------------------------
// Moser-Levi operator

/// grad^-(L12 grad w) with L12 taken along the identity family.
inline GridFn moser_levi_apply(const GridFn& L12, const GridFn& w, int q) {
  return difference(L12 * difference(w, q, Direction::forward), q, Direction::backward);
}

struct MoserLeviSolution {
  GridFn w;
  double residual = 0;  ///< sup |operator(w) - g|
  double gain = 0;      ///< |w| / |g|
};

/// Solves grad^-(L12 grad w) = g with [w]_q = 0 by the nested scheme:
/// h inverts the backward difference, h1 = -[p h]_q / [p]_q restores
/// solvability of the forward one, w inverts it on p (h + h1), p = 1/L12.
inline MoserLeviSolution moser_levi_solve_detail(const GridFn& L12, const GridFn& g, int q,
                                                 double resonance_tol) {
  if (!(L12.min() > 0)) {
    std::ostringstream os;
    os << "mixed partial L12 is not positive along the family (min " << L12.min() << ")";
    throw SingularChordError(os.str());
  }
  const std::size_t n = g.size();
  MoserLeviSolution out;
  if (g.sup_norm() == 0) {
    out.w = GridFn::zeros(n);
    return out;
  }
  const auto p = L12.map([](double x) { return 1 / x; });
  const auto h = invert_difference(g, q, Direction::backward, resonance_tol);
  const auto rp = resonant_part(p, q);
  if (!(rp.min() > 0)) throw SingularChordError("resonant part of 1/L12 vanishes");
  const auto h1 = -(resonant_part(p * h, q) / rp);
  out.w = invert_difference(p * (h + h1), q, Direction::forward, 1e-9 * std::max(1.0, (p * (h + h1)).sup_norm()));
  out.residual = (moser_levi_apply(L12, out.w, q) - (g - resonant_part(g, q))).sup_norm();
  out.gain = out.w.sup_norm() / g.sup_norm();
  return out;
}

inline MoserLeviSolution moser_levi_solve_detail(const FourierCurve& c, const GridFn& g, int q,
                                                 double resonance_tol = -1) {
  const auto L12 = mixed_partial(c, CircleMap::identity(g.size()), q);
  if (resonance_tol < 0) resonance_tol = default_resonance_tolerance(g);
  return moser_levi_solve_detail(L12, g, q, resonance_tol);
}

inline GridFn moser_levi_solve(const FourierCurve& c, const GridFn& g, int q) {
  return moser_levi_solve_detail(c, g, q).w;
}

// ---------------------------------------------------------------------------
// Steps

namespace detail {

struct Trial {
  FourierCurve curve;
  GridFn E;
  double sup = 0;
  int halvings = 0;
  bool accepted = false;
};

/// c o (id + t w) for t = 1, 1/2, ..., accepting the first trial whose
/// residual `measure` beats `target` (or reaches `floor`).
template <class Measure>
Trial damped_compose(const FourierCurve& c, const GridFn& w, double target, double floor, const ForgeConfig& cfg,
                     Measure&& measure) {
  Trial best;
  best.sup = std::numeric_limits<double>::infinity();
  double t = 1;
  for (int h = 0; h <= cfg.max_halvings; ++h, t /= 2) {
    const GridFn v = t * w;
    if (!((spectral_derivative(v) + 1.0).min() > cfg.min_slope)) continue;
    Trial tr;
    try {
      tr.curve = compose_with_map(c, CircleMap(v), cfg.refit);
      validate(tr.curve, cfg.thresholds);
      tr.E = defect_E(tr.curve, CircleMap::identity(w.size()), cfg.q);
    } catch (const Error&) {
      continue;
    }
    tr.sup = measure(tr.E);
    tr.halvings = h;
    if (tr.sup < target || tr.sup <= floor) {
      tr.accepted = true;
      return tr;
    }
    if (tr.sup < best.sup) best = tr;
  }
  return best;
}

}  // namespace detail

struct NekReport {
  FourierCurve curve;
  std::vector<double> nonresonant;  ///< |{E}_q| before the first and after each accepted sweep
  std::vector<double> resonant;     ///< |[E]_q| alongside
  int steps = 0;
  bool stagnated = false;
  std::string warning;
};

/// Nekhoroshev sweeps: repeatedly solve the Moser-Levi equation against the
/// non-resonant defect alone and reparametrize.
inline NekReport nek_sweep(const FourierCurve& c, int q, int steps, const ForgeConfig& cfg) {
  const std::size_t n = cfg.grid();
  NekReport out;
  out.curve = c;
  auto E = defect_E(c, CircleMap::identity(n), q);
  out.nonresonant.push_back(nonresonant_part(E, q).sup_norm());
  out.resonant.push_back(resonant_part(E, q).sup_norm());
  for (int i = 0; i < steps; ++i) {
    const double before = out.nonresonant.back();
    if (before == 0) break;
    const auto g = -nonresonant_part(E, q);
    const auto ml = moser_levi_solve_detail(out.curve, g, q);
    auto tr = detail::damped_compose(out.curve, ml.w, before, 0.0, cfg,
                                     [q](const GridFn& e) { return nonresonant_part(e, q).sup_norm(); });
    if (!tr.accepted) {
      out.stagnated = true;
      std::ostringstream os;
      os << "Nekhoroshev sweep " << i + 1 << " did not reduce the non-resonant defect (" << before << " -> "
         << tr.sup << "); kept the previous iterate";
      out.warning = os.str();
      break;
    }
    out.curve = std::move(tr.curve);
    E = std::move(tr.E);
    out.nonresonant.push_back(tr.sup);
    out.resonant.push_back(resonant_part(E, q).sup_norm());
    ++out.steps;
    // Below round-off growth further sweeps only shuffle noise.
    if (tr.sup > 0.9 * before) {
      out.stagnated = true;
      break;
    }
  }
  return out;
}

struct KamReport {
  double residual_before = 0;
  double residual_after = 0;
  double resonant_after_projection = 0;
  bool projected = true;
  double v_sup = 0;
  double a_sup = 0;
  double solve_residual = 0;
  double solve_gain = 0;
  int halvings = 0;
};

struct KamStep {
  FourierCurve curve;
  GridFn a;
  KamReport report;
};

namespace detail {

/// One linear solve and damped update from c with defect E. With `project`
/// the radial projection comes first and the whole defect is solved for;
/// without it only the non-resonant part is.
inline Trial newton_stage(const FourierCurve& c, const GridFn& E, bool project, const ForgeConfig& cfg,
                          KamStep& out) {
  const int q = cfg.q;
  const std::size_t n = E.size();
  const auto id = CircleMap::identity(n);
  const double before = E.sup_norm();
  FourierCurve base = c;
  GridFn Es = nonresonant_part(E, q), full = E;
  if (project) {
    auto proj = radial_projection(c, q, n, cfg.refit, cfg.thresholds);
    out.a = out.a + proj.a;
    out.report.projected = true;
    out.report.a_sup = out.a.sup_norm();
    out.report.resonant_after_projection = proj.resonant_after;
    base = std::move(proj.curve);
    full = Es = defect_E(base, id, q);
  }
  const auto L12 = mixed_partial(base, id, q);
  auto ml = moser_levi_solve_detail(L12, -Es, q, 1e-9 * std::max(1.0, Es.sup_norm()));
  // Away from a solution the linearization carries (v E)' as well. It is
  // small next to the Moser-Levi part, so a few fixed-point passes fold it in.
  for (int i = 0; i < cfg.newton_corrections; ++i) {
    const auto g = nonresonant_part(-Es - spectral_derivative(ml.w * full), q);
    auto next = moser_levi_solve_detail(L12, g, q, default_resonance_tolerance(g));
    const double change = (next.w - ml.w).sup_norm();
    ml = std::move(next);
    if (change <= 1e-3 * ml.w.sup_norm()) break;
  }
  out.report.v_sup = std::max(out.report.v_sup, ml.w.sup_norm());
  out.report.solve_residual = std::max(out.report.solve_residual, ml.residual);
  out.report.solve_gain = std::max(out.report.solve_gain, ml.gain);
  auto tr = damped_compose(base, ml.w, before, cfg.tol_E, cfg, [](const GridFn& e) { return e.sup_norm(); });
  out.report.halvings += tr.halvings;
  if (!tr.accepted) {
    std::ostringstream os;
    if (tr.sup > cfg.divergence_ratio * before) {
      os << "KAM step diverged: residual " << before << " -> " << tr.sup;
    } else if (!std::isfinite(tr.sup)) {
      os << "KAM step failed: no damped step kept the circle map orientation preserving and the curve convex";
    } else {
      os << "KAM step failed to reduce the residual after " << cfg.max_halvings << " halvings (" << before
         << " -> " << tr.sup << ")";
    }
    throw StepFailure(os.str());
  }
  return tr;
}

}  // namespace detail

/// One Newton step: radial projection, Moser-Levi solve against -E, and
/// reparametrization, with step halving until the residual decreases.
/// While the resonant defect is within defer_ratio of the non-resonant one
/// the projection waits: the step solves the non-resonant part first and
/// projects afterwards only if what is left is resonant.
inline KamStep kam_step(const FourierCurve& c, const ForgeConfig& cfg) {
  const int q = cfg.q;
  const std::size_t n = cfg.grid();
  KamStep out;
  out.a = GridFn::zeros(n);
  out.report.projected = false;
  const auto E0 = defect_E(c, CircleMap::identity(n), q);
  out.report.residual_before = E0.sup_norm();
  auto leads = [&](const GridFn& E) {
    return resonant_part(E, q).sup_norm() > cfg.defer_ratio * nonresonant_part(E, q).sup_norm();
  };
  const bool project = leads(E0);
  auto tr = detail::newton_stage(c, E0, project, cfg, out);
  if (!project && tr.sup > cfg.tol_E && leads(tr.E)) tr = detail::newton_stage(tr.curve, tr.E, true, cfg, out);
  out.curve = std::move(tr.curve);
  out.report.residual_after = tr.sup;
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

/// The q-independent part of a forge run: the input, its unit-perimeter
/// arclength form and the normal form. Reused across a sweep.
struct PreparedBoundary {
  FourierCurve input;
  FourierCurve unit;  ///< arclength, unit perimeter, same origin
  double length = 1;
  int lazutkin_order = 0;
  std::optional<NormalForm> normal_form;
  std::string normal_form_error;
};

inline PreparedBoundary prepare_boundary(const FourierCurve& c, int lazutkin_order, const RefitOptions& opt = {},
                                         const ConvexityThresholds& th = {}) {
  validate(c, th);
  PreparedBoundary p;
  p.input = c;
  p.length = perimeter(c);
  p.unit = reparametrize_arclength(c, opt);
  p.lazutkin_order = lazutkin_order;
  try {
    p.normal_form = build_normal_form(p.unit, lazutkin_order);
  } catch (const NormalFormError& e) {
    p.normal_form_error = e.what();
  }
  return p;
}

struct ForgeDiagnostics {
  double input_width = 0;       ///< Fourier decay width of the input's radius of curvature
  double forged_width = 0;
  double solvability_defect = 0;
  double initializer_newton = 0;
  double initial_defect = 0;    ///< |E(c o u_app, id)|
  bool initializer_fallback = false;
  std::vector<double> nek_nonresonant;
  std::vector<double> nek_resonant;
  std::vector<KamReport> kam;
  double convergence_order = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

struct ForgeResult {
  bool success = false;
  std::string failure_kind;     ///< error kind on failure
  std::string message;
  ForgeConfig config;
  FourierCurve input_curve;
  FourierCurve forged_curve;    ///< input units, caustic parametrization
  CircleMap u_init;
  std::vector<double> residual_history;  ///< sup |E| on the unit-perimeter curve, per iterate
  double deformation = std::numeric_limits<double>::quiet_NaN();
  GridFn net_radial_log;
  int kam_iterations = 0;
  double wall_ms = 0;
  ForgeDiagnostics diagnostics;

  double final_residual() const {
    return residual_history.empty() ? std::numeric_limits<double>::quiet_NaN() : residual_history.back();
  }
};

/// Order estimate from the terminal residuals. Triples whose newest entry
/// sits at the round-off floor are skipped, since there the observed
/// contraction says nothing about the method. forge passes tol_E as the
/// floor: a double-precision defect bottoms out near 1e-13, so an iterate
/// below the target mostly measures round-off. NaN when no triple is usable.
inline double estimate_convergence_order(const std::vector<double>& e, double floor = 1e-13) {
  for (std::size_t i = e.size(); i >= 3; --i) {
    const double e0 = e[i - 3], e1 = e[i - 2], e2 = e[i - 1];
    if (!(e2 > floor) || !(e1 < e0) || !(e2 < e1)) continue;
    return std::log(e2 / e1) / std::log(e1 / e0);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline ForgeResult forge(const PreparedBoundary& prep, const ForgeConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.check();
  ForgeResult res;
  res.config = cfg;
  res.input_curve = prep.input;
  const int q = cfg.q;
  const std::size_t n = cfg.grid();
  const auto id = CircleMap::identity(n);
  auto& diag = res.diagnostics;
  FourierCurve current = prep.unit;
  res.net_radial_log = GridFn::zeros(n);
  auto finish = [&](bool ok) {
    res.success = ok;
    // Back to input units; the unit curve was scaled about the origin.
    const double L = prep.length;
    std::vector<std::complex<double>> cx(current.coeff_x().begin(), current.coeff_x().end());
    std::vector<std::complex<double>> cy(current.coeff_y().begin(), current.coeff_y().end());
    for (auto& z : cx) z *= L;
    for (auto& z : cy) z *= L;
    res.forged_curve = FourierCurve(std::move(cx), std::move(cy));
    res.deformation = geometric_distance(prep.input, res.forged_curve);
    res.kam_iterations = static_cast<int>(diag.kam.size());
    diag.convergence_order = estimate_convergence_order(res.residual_history, cfg.tol_E);
    diag.forged_width = decay_width_estimate(curvature_profile_of(current, 256).rho);
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  try {
    diag.input_width = decay_width_estimate(curvature_profile_of(prep.unit, 256).rho);

    // Lazutkin initializer.
    bool have_init = false;
    if (prep.normal_form) {
      diag.solvability_defect = prep.normal_form->solvability_defect;
      try {
        auto im = initial_circle_map_detail(*prep.normal_form, prep.unit, q, n);
        diag.initializer_newton = im.max_residual;
        res.u_init = im.map;
        have_init = true;
      } catch (const Error& e) {
        diag.warnings.push_back(std::string("initializer: ") + e.what() + "; using a pure rotation");
      }
    } else {
      diag.warnings.push_back("normal form: " + prep.normal_form_error + "; using a pure rotation");
    }
    if (!have_init) {
      diag.initializer_fallback = true;
      res.u_init = id;
    } else {
      current = compose_with_map(prep.unit, res.u_init, cfg.refit);
      validate(current, cfg.thresholds);
    }
    auto E = defect_E(current, id, q);
    diag.initial_defect = E.sup_norm();
    res.residual_history.push_back(E.sup_norm());

    if (cfg.nek_sweeps > 0) {
      auto nek = nek_sweep(current, q, cfg.nek_sweeps, cfg);
      current = nek.curve;
      diag.nek_nonresonant = nek.nonresonant;
      diag.nek_resonant = nek.resonant;
      if (!nek.warning.empty()) diag.warnings.push_back(nek.warning);
      res.residual_history.push_back(defect_E(current, id, q).sup_norm());
    }

    while (res.residual_history.back() > cfg.tol_E) {
      if (static_cast<int>(diag.kam.size()) >= cfg.max_kam_iters) {
        std::ostringstream os;
        os << "no convergence after " << cfg.max_kam_iters << " KAM steps (residual " << res.residual_history.back()
           << ")";
        res.failure_kind = "non-convergence";
        res.message = os.str();
        return finish(false);
      }
      auto st = kam_step(current, cfg);
      current = std::move(st.curve);
      res.net_radial_log = res.net_radial_log + st.a;
      diag.kam.push_back(st.report);
      res.residual_history.push_back(st.report.residual_after);
    }
    // The residual gate holds at every grid point by construction of the sup norm.
    return finish(true);
  } catch (const Error& e) {
    res.failure_kind = e.kind();
    res.message = e.what();
    return finish(false);
  }
}

inline ForgeResult forge(const FourierCurve& c, const ForgeConfig& cfg) {
  cfg.check();
  return forge(prepare_boundary(c, cfg.lazutkin_order, cfg.refit, cfg.thresholds), cfg);
}

}  // namespace caustic
