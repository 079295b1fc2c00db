#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "caustic/curve.hpp"
#include "caustic/presets.hpp"

using namespace caustic;

namespace {

// Closed-form ellipse curvature AB / (A^2 sin^2 + B^2 cos^2)^{3/2}.
double ellipse_curvature(double a, double b, double t) {
  const double s = std::sin(2 * M_PI * t), c = std::cos(2 * M_PI * t);
  return a * b / std::pow(a * a * s * s + b * b * c * c, 1.5);
}

CircleMap random_map(std::mt19937_64& rng, std::size_t n, double amp) {
  std::normal_distribution<double> nd;
  std::vector<double> a(6), b(6);
  for (int k = 1; k < 6; ++k) a[k] = nd(rng) / (k * k), b[k] = nd(rng) / (k * k);
  return CircleMap(GridFn::sample(n, [&](double t) {
    double s = 0;
    for (int k = 1; k < 6; ++k) s += a[k] * std::cos(2 * M_PI * k * t) + b[k] * std::sin(2 * M_PI * k * t);
    return amp * s;
  }));
}

}  // namespace

TEST(Evaluate, CircleAndEllipse) {
  const auto c = presets::circle();
  const auto p = c.evaluate(0.0);
  EXPECT_NEAR(p.x, 1 / (2 * M_PI), 1e-16);
  EXPECT_NEAR(p.y, 0, 1e-16);
  const auto t = c.evaluate(0.3, 1);
  EXPECT_NEAR(norm(t), 1, 1e-14);
  const auto e = presets::ellipse(2.0, 1.0);
  EXPECT_NEAR(e.evaluate(0.25).x, 0, 1e-15);
  EXPECT_NEAR(e.evaluate(0.25).y, 1, 1e-15);
  EXPECT_THROW(e.evaluate(0.1, 4), ConfigurationError);
}

TEST(Evaluate, ChordMatchesDifference) {
  const auto e = presets::perturbed_circle();
  for (double h : {0.3, 1e-3, 1e-7}) {
    const auto d = e.chord(0.17, h);
    const auto ref = e(0.17 + h) - e(0.17);
    EXPECT_NEAR(d.x, ref.x, 1e-15);
    EXPECT_NEAR(d.y, ref.y, 1e-15);
  }
  // Small chords keep their relative accuracy: d / h -> r'.
  const auto d = e.chord(0.17, 1e-12);
  const auto t = e.derivative(0.17, 1);
  EXPECT_NEAR(d.x / 1e-12, t.x, 1e-9);
  EXPECT_NEAR(d.y / 1e-12, t.y, 1e-9);
}

TEST(Curvature, ClosedForms) {
  const auto c = presets::circle();
  for (double s : {0.0, 0.2, 0.7}) EXPECT_NEAR(curvature_of(c, s), 2 * M_PI, 1e-12);
  const auto e = presets::ellipse(2.0, 1.0);
  EXPECT_NEAR(curvature_of(e, 0.0), 2.0, 1e-13);
  for (double t : {0.1, 0.33, 0.8}) EXPECT_NEAR(curvature_of(e, t), ellipse_curvature(2, 1, t), 1e-13);
  EXPECT_NO_THROW(validate(e));
}

TEST(Validate, RejectsBadCurves) {
  // Clockwise circle: negative curvature.
  std::vector<std::complex<double>> cx{{0, 0}, {0.5, 0}}, cy{{0, 0}, {0, 0.5}};
  EXPECT_THROW(validate(FourierCurve(cx, cy)), ConvexityLossError);
  // Origin outside.
  std::vector<std::complex<double>> dx{{5, 0}, {0.5, 0}}, dy{{0, 0}, {0, -0.5}};
  EXPECT_THROW(validate(FourierCurve(dx, dy)), InputError);
  // Strong third harmonic makes the curve non-convex.
  std::vector<std::complex<double>> ex{{0, 0}, {0.5, 0}, {0, 0}, {0.2, 0}}, ey{{0, 0}, {0, -0.5}, {0, 0}, {0, 0.2}};
  EXPECT_THROW(validate(FourierCurve(ex, ey)), ConvexityLossError);
}

TEST(Arclength, CircleIsFixed) {
  const auto c = presets::circle();
  const auto a = reparametrize_arclength(c);
  EXPECT_EQ(a.param_kind(), ParamKind::arclength_unit);
  EXPECT_LT(geometric_distance(a, c), 1e-14);
  EXPECT_NEAR(a(0.0).x, c(0.0).x, 1e-15);
}

TEST(Arclength, EllipseUnitSpeed) {
  const auto e = presets::ellipse(2.0, 1.0);
  const auto a = reparametrize_arclength(e);
  double worst = 0;
  for (int j = 0; j < 2000; ++j) worst = std::max(worst, std::abs(speed_of(a, j / 2000.0) - 1));
  EXPECT_LT(worst, 1e-10);
  EXPECT_NEAR(perimeter(a), 1, 1e-13);
  // Geometry is kept: the scaled-back curve is the input, curvature extrema too.
  const double length = perimeter(e);
  std::vector<std::complex<double>> bx(a.coeff_x()), by(a.coeff_y());
  for (auto& z : bx) z *= length;
  for (auto& z : by) z *= length;
  EXPECT_LT(geometric_distance(FourierCurve(bx, by), e), 1e-10);
  double kmin = 1e9, kmax = 0;
  for (int j = 0; j < 4000; ++j) {
    const double k = curvature_of(a, j / 4000.0) / length;
    kmin = std::min(kmin, k), kmax = std::max(kmax, k);
  }
  EXPECT_NEAR(kmax, 2.0, 1e-8);
  EXPECT_NEAR(kmin, 0.25, 1e-8);
  // Idempotent.
  EXPECT_LT(geometric_distance(reparametrize_arclength(a), a), 1e-10);
}

TEST(RadialScale, ConstantAndRoundTrip) {
  const auto c = presets::circle();
  EXPECT_LT(geometric_distance(radial_scale(c, GridFn::zeros(64)), c), 1e-15);
  const auto big = radial_scale(c, GridFn::constant(64, 0.1));
  EXPECT_NEAR(norm(big(0.3)), std::exp(0.1) / (2 * M_PI), 1e-15);
  const auto e = reparametrize_arclength(presets::ellipse(1.1, 0.9));
  const auto a = GridFn::sample(100, [](double t) { return 0.01 * std::exp(std::cos(2 * M_PI * 5 * t)); });
  const auto back = radial_scale(radial_scale(e, a), -a);
  EXPECT_LT(geometric_distance(back, e), 1e-10);
}

TEST(Compose, IdentityRotationAndImage) {
  const auto e = presets::perturbed_circle();
  EXPECT_LT(geometric_distance(compose_with_map(e, CircleMap::identity(64)), e), 1e-14);
  const double beta = 0.125;
  const auto rot = compose_with_map(e, CircleMap(GridFn::constant(64, beta)));
  for (std::size_t k = 1; k <= e.modes(); ++k) {
    const auto expect = e.coeff_x()[k] * std::polar(1.0, 2 * M_PI * k * beta);
    EXPECT_LT(std::abs(rot.coeff_x()[k] - expect), 1e-14);
  }
  std::mt19937_64 rng(7);
  const auto c = presets::circle();
  const auto u = random_map(rng, 128, 0.02);
  EXPECT_LT(geometric_distance(compose_with_map(c, u), c), 1e-12);
  const auto w = compose_with_map(e, u);
  for (double t : {0.1, 0.45, 0.9}) {
    const auto p = w(t), q = e(u(t));
    EXPECT_NEAR(p.x, q.x, 1e-13);
    EXPECT_NEAR(p.y, q.y, 1e-13);
  }
}

TEST(CurveFromCurvature, CircleAndRoundTrip) {
  const double R = 0.3;
  const auto c = curve_from_curvature(CurvatureProfile{GridFn::constant(32, R)});
  for (double s : {0.0, 0.4}) EXPECT_NEAR(norm(c(s)), R, 1e-15);
  const auto rho = GridFn::sample(64, [&](double psi) { return R * (1 + 0.1 * std::cos(4 * M_PI * psi)); });
  const auto p = curve_from_curvature(CurvatureProfile{rho});
  validate(p);
  EXPECT_LT(norm(p(1.0) - p(0.0)), 1e-12);
  const auto back = curvature_profile_of(p, 64);
  EXPECT_LT(sup_distance(back.rho, rho), 1e-8);
  const auto bad = GridFn::sample(64, [&](double psi) { return R * (1 + 0.1 * std::cos(2 * M_PI * psi)); });
  EXPECT_THROW(curve_from_curvature(CurvatureProfile{bad}), DomainError);
}

TEST(CurveFromCurvature, ProfileOfCurveRoundTrip) {
  const auto e = presets::ellipse(1.2, 0.8);
  const auto prof = curvature_profile_of(e, 256);
  EXPECT_LT(prof.closure_defect(), 1e-12);
  const auto back = curve_from_curvature(prof);
  // Same shape up to translation (the Steiner point of an ellipse is its centre).
  EXPECT_LT(geometric_distance(back, e), 1e-8);
}

TEST(SmoothProfile, FilterBehaviour) {
  const double R = 1 / (2 * M_PI);
  const auto rho = GridFn::sample(128, [&](double psi) { return R * (1 + 0.1 * std::cos(6 * M_PI * psi)); });
  const auto same = smooth_profile(CurvatureProfile{rho}, 10);
  EXPECT_LT(sup_distance(same.rho, rho), 1e-15);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> amp(40);
  for (int k = 30; k < 40; ++k) amp[k] = 1e-3 * nd(rng);
  auto noisy = GridFn::sample(128, [&](double psi) {
    double s = 0;
    for (int k = 30; k < 40; ++k) s += amp[k] * std::cos(2 * M_PI * k * psi);
    return R * (1 + s);
  });
  const auto flat = smooth_profile(CurvatureProfile{noisy}, 5);
  EXPECT_LT(sup_distance(flat.rho, GridFn::constant(128, R)), 1e-15);
  // |k|^{-m} tail: the smoothing error decays like a power of the cutoff.
  const int m = 6;
  const auto tail = GridFn::sample(1024, [&](double psi) {
    double s = 0;
    for (int k = 2; k < 512; ++k) s += std::pow(k, -m) * std::cos(2 * M_PI * k * psi);
    return R * (1 + s);
  });
  const double e1 = sup_distance(smooth_profile(CurvatureProfile{tail}, 8).rho, tail);
  const double e2 = sup_distance(smooth_profile(CurvatureProfile{tail}, 16).rho, tail);
  const double e3 = sup_distance(smooth_profile(CurvatureProfile{tail}, 32).rho, tail);
  const double slope1 = std::log2(e1 / e2), slope2 = std::log2(e2 / e3);
  EXPECT_NEAR(slope1, m - 1, 0.6);
  EXPECT_NEAR(slope2, m - 1, 0.6);
}

TEST(GeometricDistance, Basics) {
  const auto c = presets::circle();
  EXPECT_EQ(geometric_distance(c, c), 0.0);
  const double delta = 1e-3;
  const auto big = radial_scale(c, GridFn::constant(16, std::log1p(delta * 2 * M_PI)));
  EXPECT_NEAR(geometric_distance(c, big), delta, 1e-14);
  const auto e = presets::perturbed_circle();
  std::mt19937_64 rng(9);
  const auto re = compose_with_map(e, random_map(rng, 64, 0.03));
  EXPECT_LT(geometric_distance(e, re), 1e-12);
  EXPECT_NEAR(geometric_distance(e, big), geometric_distance(big, e), 1e-12);
}

TEST(Presets, Parse) {
  EXPECT_NO_THROW(presets::from_spec("circle"));
  EXPECT_NO_THROW(presets::from_spec("ellipse:1.05,0.95"));
  EXPECT_NO_THROW(presets::from_spec("perturbed:2:0.05,3:0.02"));
  EXPECT_THROW(presets::from_spec("ellipse:1"), InputError);
  EXPECT_THROW(presets::from_spec("square"), InputError);
  EXPECT_NEAR(perimeter(presets::perturbed_circle()), 1, 1e-14);
}

TEST(Evaluate, ChordRemainder) {
  const auto e = presets::perturbed_circle();
  for (double h : {0.4, 1e-2, -1e-3}) {
    const auto r = e.chord_remainder(0.3, h);
    const auto ref = e(0.3 + h) - e(0.3) - h * e.derivative(0.3, 1);
    EXPECT_NEAR(r.x, ref.x, 1e-15);
    EXPECT_NEAR(r.y, ref.y, 1e-15);
  }
  // ~ h^2 r''/2 for tiny h, without cancellation.
  const double h = 1e-9;
  const auto r = e.chord_remainder(0.3, h);
  const auto a = e.derivative(0.3, 2);
  EXPECT_NEAR(r.x / (h * h / 2), a.x, 1e-6 * norm(a));
  EXPECT_NEAR(r.y / (h * h / 2), a.y, 1e-6 * norm(a));
}
