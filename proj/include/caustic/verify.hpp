#pragma once

// Independent checks that a boundary carries a 1/q caustic. Only the
// billiard map and plane geometry are used here: no defect functions, no
// solver grids.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "billiard.hpp"
#include "curve.hpp"
#include "errors.hpp"
#include "periodic.hpp"

namespace caustic {

/// Return of one orbit after q reflections.
struct OrbitClosure {
  ChordState start;
  ChordState end;
  double error = 0;    ///< phase-space return distance, length units
  double advance = 0;  ///< total parameter advanced; 1 for one turn
};

struct CausticReport {
  int q = 0;
  std::size_t samples = 0;
  double max_closure_error = 0;
  double worst_start = 0;  ///< starting parameter of the worst orbit
  bool rotation_number_checked = false;
  std::vector<Vec2<double>> envelope_points;
  double max_tangency_residual = 0;
  int envelope_winding = 0;
  bool envelope_inside = false;
  bool envelope_convex = false;
};

/// Length scale that turns angles into length: the radius of the circle
/// with the same perimeter.
inline double angle_scale(const FourierCurve& c) { return perimeter(c) / (2 * M_PI); }

/// Launch angle of the chord r(s) -> r(s + h), measured from the tangent.
inline double chord_angle(const FourierCurve& c, double s, double h) {
  const auto t = c.evaluate(s, 1);
  return detail::launch_angle(c, s, t, h, Direction::forward).first;
}

/// Reflect q times from `start` and measure how far the orbit lands from
/// where it began. Position and angle are combined as
/// sqrt(|dr|^2 + (ell dtheta)^2) with ell = angle_scale(c).
inline OrbitClosure porism_closure(const FourierCurve& c, int q, ChordState start) {
  if (q < 2) throw ConfigurationError("porism check needs q >= 2");
  OrbitClosure out;
  out.start = start;
  auto st = start;
  for (int i = 0; i < q; ++i) {
    const auto step = billiard_step_detail(c, st, Direction::forward);
    out.advance += step.h;
    st = step.state;
  }
  out.end = st;
  double ds = st.s - start.s;
  ds -= std::round(ds);
  const auto dr = c.evaluate(start.s + ds) - c.evaluate(start.s);
  const double da = angle_scale(c) * (st.theta - start.theta);
  out.error = std::sqrt(dot(dr, dr) + da * da);
  return out;
}

/// Launches the chord r(theta) -> r(theta + 1/q) from n equally spaced
/// theta, reflects q times and records the worst return. The winding check
/// asks every orbit to go round exactly once.
inline CausticReport porism_check(const FourierCurve& c, int q, std::size_t n_samples) {
  if (n_samples == 0) throw ConfigurationError("porism check needs at least one sample");
  CausticReport rep;
  rep.q = q;
  rep.samples = n_samples;
  rep.rotation_number_checked = true;
  const double alpha = 1.0 / q;
  for (std::size_t j = 0; j < n_samples; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(n_samples);
    const auto oc = porism_closure(c, q, ChordState{s, chord_angle(c, s, alpha)});
    if (oc.error > rep.max_closure_error || j == 0) {
      rep.max_closure_error = oc.error;
      rep.worst_start = s;
    }
    if (!(std::abs(oc.advance - 1) < 0.5)) rep.rotation_number_checked = false;
  }
  return rep;
}

struct Envelope {
  std::vector<Vec2<double>> points;
  double max_tangency_residual = 0;
  int winding = 0;
  bool inside = true;  ///< every contact point strictly inside its chord
  bool convex = true;  ///< the tangent turns one way only
};

/// Envelope of the chord family r(theta) -> r(theta + 1/q) on n points.
/// With P = r(theta), D = r(theta + 1/q) - r(theta) the contact point is
/// P + t D where cross(P' + t D', D) = 0. The tangency residual is
/// |D| sin of the angle between the chord and the envelope's tangent, the
/// tangent coming from a spectral derivative of the contact points.
inline Envelope caustic_envelope(const FourierCurve& c, int q, std::size_t n = 512) {
  if (q < 2) throw ConfigurationError("envelope needs q >= 2");
  if (n < 8) throw ConfigurationError("envelope needs at least 8 points");
  const double alpha = 1.0 / q;
  Envelope out;
  out.points.resize(n);
  std::vector<Vec2<double>> dir(n);
  std::vector<double> xs(n), ys(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double th = static_cast<double>(j) / static_cast<double>(n);
    const auto P = c.evaluate(th), P1 = c.evaluate(th, 1);
    const auto D = c.chord(th, alpha);
    const auto D1 = c.evaluate(th + alpha, 1) - P1;
    const double den = cross(D1, D);
    if (!(std::abs(den) > 1e-12 * dot(D, D) * norm(D1 + P1))) {
      std::ostringstream os;
      os << "chords at theta = " << th << " are parallel to their neighbours; the envelope is at infinity";
      throw DegenerateEnvelopeError(os.str());
    }
    const double t = -cross(P1, D) / den;
    if (!(t > 0 && t < 1)) out.inside = false;
    out.points[j] = P + t * D;
    dir[j] = D;
    xs[j] = out.points[j].x;
    ys[j] = out.points[j].y;
  }
  const auto dx = spectral_derivative(GridFn(xs)), dy = spectral_derivative(GridFn(ys));
  double turned = 0;
  double sign = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2<double> T{dx[j], dy[j]};
    const double speed = norm(T);
    if (!(speed > 1e-9 * norm(dir[j]))) throw DegenerateEnvelopeError("envelope has a stationary point");
    out.max_tangency_residual = std::max(out.max_tangency_residual, std::abs(cross(T, dir[j])) / speed);
    const std::size_t k = (j + 1) % n;
    const Vec2<double> T2{dx[k], dy[k]};
    const double step = std::atan2(cross(T, T2), dot(T, T2));
    turned += step;
    if (step != 0) {
      if (sign == 0) sign = step > 0 ? 1 : -1;
      else if (step * sign < 0) out.convex = false;
    }
  }
  out.winding = static_cast<int>(std::lround(turned / (2 * M_PI)));
  return out;
}

/// Porism closure plus the envelope, in one report.
inline CausticReport verify_caustic(const FourierCurve& c, int q, std::size_t n_samples,
                                    std::size_t n_envelope = 512) {
  auto rep = porism_check(c, q, n_samples);
  auto env = caustic_envelope(c, q, n_envelope);
  rep.envelope_points = std::move(env.points);
  rep.max_tangency_residual = env.max_tangency_residual;
  rep.envelope_winding = env.winding;
  rep.envelope_inside = env.inside;
  rep.envelope_convex = env.convex;
  return rep;
}

}  // namespace caustic
