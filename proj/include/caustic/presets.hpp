#pragma once

// Built-in boundaries: the unit-perimeter circle, axis-aligned ellipses and
// perturbed circles given by their radius of curvature.

#include <string>
#include <utility>
#include <vector>

#include "curve.hpp"
#include "errors.hpp"

namespace caustic::presets {

/// One harmonic of a curvature perturbation: rho = R (1 + sum amp cos(2 pi k psi)).
struct Harmonic {
  int k = 2;
  double amplitude = 0;
};

inline const std::vector<Harmonic>& default_perturbation() {
  static const std::vector<Harmonic> h{{2, 0.05}, {3, 0.02}};
  return h;
}

/// Circle of unit perimeter centred at the origin.
template <class Real = double>
BasicFourierCurve<Real> circle() {
  const Real r = Real(1) / num::two_pi<Real>();
  std::vector<std::complex<Real>> cx{{0, 0}, {r / 2, 0}}, cy{{0, 0}, {0, -r / 2}};
  return BasicFourierCurve<Real>(std::move(cx), std::move(cy), ParamKind::arclength_unit);
}

/// (A cos 2 pi t, B sin 2 pi t).
template <class Real = double>
BasicFourierCurve<Real> ellipse(Real a, Real b) {
  if (!(a > 0) || !(b > 0)) throw InputError("ellipse semi-axes must be positive");
  std::vector<std::complex<Real>> cx{{0, 0}, {a / 2, 0}}, cy{{0, 0}, {0, -b / 2}};
  return BasicFourierCurve<Real>(std::move(cx), std::move(cy), ParamKind::general);
}

/// Unit-perimeter curve with rho = (1 + sum amp cos(2 pi k psi)) / (2 pi),
/// parametrized by tangent angle.
template <class Real = double>
BasicFourierCurve<Real> perturbed_circle(const std::vector<Harmonic>& harmonics = default_perturbation()) {
  int kmax = 1;
  for (const auto& h : harmonics) {
    if (h.k < 2) throw InputError("perturbation harmonics must have k >= 2 (k = 1 breaks closure)");
    kmax = std::max(kmax, h.k);
  }
  const std::size_t n = static_cast<std::size_t>(4 * kmax + 8);
  auto rho = BasicGridFn<Real>::sample(n, [&](Real psi) {
    Real v = 1;
    for (const auto& h : harmonics) v += Real(h.amplitude) * num::cos(num::two_pi<Real>() * Real(h.k) * psi);
    return v / num::two_pi<Real>();
  });
  return curve_from_curvature(BasicCurvatureProfile<Real>{rho});
}

/// "circle", "ellipse:A,B", "perturbed" or "perturbed:k:amp[,k:amp...]".
inline FourierCurve from_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto p = s.find(sep, start);
      out.push_back(s.substr(start, p - start));
      if (p == std::string::npos) break;
      start = p + 1;
    }
    return out;
  };
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InputError("preset '" + spec + "': cannot parse number '" + s + "'");
    }
  };
  if (name == "circle" && args.empty()) return circle();
  if (name == "ellipse") {
    const auto parts = split(args, ',');
    if (parts.size() != 2) throw InputError("preset '" + spec + "': expected ellipse:A,B");
    return ellipse(number(parts[0]), number(parts[1]));
  }
  if (name == "perturbed") {
    if (args.empty()) return perturbed_circle();
    std::vector<Harmonic> hs;
    for (const auto& item : split(args, ',')) {
      const auto kv = split(item, ':');
      if (kv.size() != 2) throw InputError("preset '" + spec + "': expected k:amplitude pairs");
      hs.push_back({static_cast<int>(number(kv[0])), number(kv[1])});
    }
    return perturbed_circle(hs);
  }
  throw InputError("unknown preset '" + spec + "' (circle, ellipse:A,B, perturbed[:k:amp,...])");
}

}  // namespace caustic::presets
