#pragma once

// Random inputs shared by the test programs.

#include <cmath>
#include <random>
#include <vector>

#include "caustic/curve.hpp"
#include "caustic/presets.hpp"

namespace testing_support {

using namespace caustic;

/// A unit-perimeter convex curve with a few random curvature harmonics,
/// translated a little off the origin.
inline FourierCurve random_convex(std::mt19937_64& rng, double amp = 0.04) {
  std::uniform_real_distribution<double> ud(-1, 1);
  std::vector<double> a(7), b(7);
  for (int k = 2; k <= 6; ++k) a[k] = amp * ud(rng) / k, b[k] = amp * ud(rng) / k;
  auto rho = GridFn::sample(32, [&](double psi) {
    double v = 1;
    for (int k = 2; k <= 6; ++k) v += a[k] * std::cos(2 * M_PI * k * psi) + b[k] * std::sin(2 * M_PI * k * psi);
    return v / (2 * M_PI);
  });
  auto c = curve_from_curvature(CurvatureProfile{rho});
  auto cx = c.coeff_x(), cy = c.coeff_y();
  cx[0] += 0.01 * ud(rng);
  cy[0] += 0.01 * ud(rng);
  return FourierCurve(cx, cy);
}

/// theta + small smooth random displacement.
inline CircleMap random_map(std::mt19937_64& rng, std::size_t n, double amp) {
  std::normal_distribution<double> nd;
  std::vector<double> a(6), b(6);
  const double c0 = nd(rng);
  for (int k = 1; k < 6; ++k) a[k] = nd(rng) / (k * k), b[k] = nd(rng) / (k * k);
  return CircleMap(GridFn::sample(n, [&](double t) {
    double s = c0;
    for (int k = 1; k < 6; ++k) s += a[k] * std::cos(2 * M_PI * k * t) + b[k] * std::sin(2 * M_PI * k * t);
    return amp * s;
  }));
}

/// Smooth random function with modes 0..kmax.
inline GridFn random_smooth(std::mt19937_64& rng, std::size_t n, int kmax, double amp = 1) {
  std::normal_distribution<double> nd;
  std::vector<double> a(kmax + 1), b(kmax + 1);
  for (int k = 0; k <= kmax; ++k) a[k] = nd(rng) / (1 + k), b[k] = nd(rng) / (1 + k);
  return GridFn::sample(n, [&](double t) {
    double s = 0;
    for (int k = 0; k <= kmax; ++k) s += a[k] * std::cos(2 * M_PI * k * t) + b[k] * std::sin(2 * M_PI * k * t);
    return amp * s;
  });
}

/// Slope and R^2 of a least-squares line.
struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace testing_support
