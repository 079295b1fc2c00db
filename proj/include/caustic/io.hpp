#pragma once

// Files: boundary JSON, forge result JSON, run manifests and CSV tables.
// Numbers go through nlohmann::json, which prints the shortest string that
// reads back to the same double, so load -> save is byte-stable.

#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curve.hpp"
#include "errors.hpp"
#include "solver.hpp"
#include "verify.hpp"

namespace caustic {

using json = nlohmann::ordered_json;

inline constexpr const char* version_string = "0.1.0";

struct BoundaryFile {
  FourierCurve curve;
  json meta = json::object();
};

namespace detail {

inline const char* kind_name(ParamKind k) { return k == ParamKind::arclength_unit ? "arclength_unit" : "general"; }

inline json coefficient_list(const std::vector<std::complex<double>>& c) {
  // k = -K .. K with c_{-k} = conj(c_k).
  const std::size_t K = c.size() - 1;
  json out = json::array();
  for (std::size_t i = 0; i <= 2 * K; ++i) {
    const long k = static_cast<long>(i) - static_cast<long>(K);
    const auto z = k < 0 ? std::conj(c[static_cast<std::size_t>(-k)]) : c[static_cast<std::size_t>(k)];
    out.push_back(json::array({z.real(), z.imag()}));
  }
  return out;
}

inline double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError("field '" + where + "' must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError("field '" + where + "' is not finite");
  return v;
}

/// Reads one two-sided coefficient list and checks conjugate symmetry.
inline std::vector<std::complex<double>> read_coefficients(const json& j, const std::string& name, long k_min) {
  if (!j.is_array()) throw InputError("field '" + name + "' must be an array of [re, im] pairs");
  const long K = -k_min;
  if (static_cast<long>(j.size()) != 2 * K + 1) {
    std::ostringstream os;
    os << "field '" << name << "' has " << j.size() << " entries, expected " << 2 * K + 1 << " for k_min = " << k_min;
    throw InputError(os.str());
  }
  std::vector<std::complex<double>> all;
  double scale = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = name + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != 2) throw InputError("field '" + where + "' must be a [re, im] pair");
    all.emplace_back(number_at(j[i][0], where + "[0]"), number_at(j[i][1], where + "[1]"));
    scale = std::max(scale, std::abs(all.back()));
  }
  const double tol = 1e-14 * std::max(scale, 1e-300);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(K) + 1);
  for (long k = 0; k <= K; ++k) {
    const auto pos = all[static_cast<std::size_t>(K + k)], neg = all[static_cast<std::size_t>(K - k)];
    if (std::abs(pos - std::conj(neg)) > tol) {
      std::ostringstream os;
      os << "field '" << name << "' is not conjugate symmetric at k = " << k << " (the curve would not be real)";
      throw InputError(os.str());
    }
    out[static_cast<std::size_t>(k)] = pos;
  }
  return out;
}

}  // namespace detail

inline json boundary_to_json(const FourierCurve& c, const json& meta = json::object()) {
  json j;
  j["coeff_x"] = detail::coefficient_list(c.coeff_x());
  j["coeff_y"] = detail::coefficient_list(c.coeff_y());
  j["k_min"] = -static_cast<long>(c.modes());
  j["param_kind"] = detail::kind_name(c.param_kind());
  j["meta"] = meta;
  return j;
}

inline BoundaryFile boundary_from_json(const json& j) {
  if (!j.is_object()) throw InputError("boundary file must hold a JSON object");
  for (const char* key : {"coeff_x", "coeff_y", "k_min"}) {
    if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  }
  if (!j["k_min"].is_number_integer() || j["k_min"].get<long>() > 0) {
    throw InputError("field 'k_min' must be a non-positive integer");
  }
  const long k_min = j["k_min"].get<long>();
  ParamKind kind = ParamKind::general;
  if (j.contains("param_kind")) {
    const auto& pk = j["param_kind"];
    if (!pk.is_string()) throw InputError("field 'param_kind' must be a string");
    if (pk == "arclength_unit") kind = ParamKind::arclength_unit;
    else if (pk != "general") throw InputError("field 'param_kind' must be 'general' or 'arclength_unit'");
  }
  BoundaryFile out;
  auto cx = detail::read_coefficients(j["coeff_x"], "coeff_x", k_min);
  auto cy = detail::read_coefficients(j["coeff_y"], "coeff_y", k_min);
  out.curve = FourierCurve(std::move(cx), std::move(cy), kind);
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw InputError("field 'meta' must be an object");
    out.meta = j["meta"];
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("write to '" + path + "' failed");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline BoundaryFile load_boundary(const std::string& path) { return boundary_from_json(read_json_file(path)); }

inline void save_boundary(const std::string& path, const FourierCurve& c, const json& meta = json::object()) {
  write_text_file(path, dump(boundary_to_json(c, meta)));
}

/// JSON null for NaN and infinities, the number otherwise.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json config_to_json(const ForgeConfig& cfg) {
  return json{{"q", cfg.q},
              {"oversample", cfg.oversample},
              {"lazutkin_order", cfg.lazutkin_order},
              {"nek_sweeps", cfg.nek_sweeps},
              {"tol_E", cfg.tol_E},
              {"max_kam_iters", cfg.max_kam_iters},
              {"max_halvings", cfg.max_halvings},
              {"divergence_ratio", cfg.divergence_ratio},
              {"defer_ratio", cfg.defer_ratio},
              {"newton_corrections", cfg.newton_corrections}};
}

inline json report_to_json(const CausticReport& r) {
  json pts = json::array();
  for (const auto& p : r.envelope_points) pts.push_back(json::array({p.x, p.y}));
  return json{{"q", r.q},
              {"samples", r.samples},
              {"max_closure_error", finite_or_null(r.max_closure_error)},
              {"worst_start", r.worst_start},
              {"rotation_number_checked", r.rotation_number_checked},
              {"max_tangency_residual", finite_or_null(r.max_tangency_residual)},
              {"envelope_winding", r.envelope_winding},
              {"envelope_inside", r.envelope_inside},
              {"envelope_convex", r.envelope_convex},
              {"envelope_points", pts}};
}

inline json result_to_json(const ForgeResult& r) {
  json hist = json::array();
  for (double e : r.residual_history) hist.push_back(finite_or_null(e));
  json u = json::array();
  for (double v : r.u_init.displacement()) u.push_back(v);
  json kam = json::array();
  for (const auto& k : r.diagnostics.kam) {
    kam.push_back(json{{"residual_before", k.residual_before},
                       {"residual_after", k.residual_after},
                       {"projected", k.projected},
                       {"a_sup", k.a_sup},
                       {"v_sup", k.v_sup},
                       {"solve_residual", k.solve_residual},
                       {"solve_gain", k.solve_gain},
                       {"halvings", k.halvings}});
  }
  const auto& d = r.diagnostics;
  json j;
  j["version"] = version_string;
  j["success"] = r.success;
  if (!r.success) {
    j["failure_kind"] = r.failure_kind;
    j["message"] = r.message;
  }
  j["q"] = r.config.q;
  j["config"] = config_to_json(r.config);
  j["deformation"] = finite_or_null(r.deformation);
  j["final_residual"] = finite_or_null(r.final_residual());
  j["kam_iterations"] = r.kam_iterations;
  j["residual_history"] = hist;
  j["wall_ms"] = r.wall_ms;
  j["u_init"] = json{{"samples", u.size()}, {"displacement", u}};
  j["net_radial_log_sup"] = r.net_radial_log.size() ? r.net_radial_log.sup_norm() : 0.0;
  j["diagnostics"] = json{{"input_width", finite_or_null(d.input_width)},
                          {"forged_width", finite_or_null(d.forged_width)},
                          {"solvability_defect", finite_or_null(d.solvability_defect)},
                          {"initializer_newton", finite_or_null(d.initializer_newton)},
                          {"initial_defect", finite_or_null(d.initial_defect)},
                          {"initializer_fallback", d.initializer_fallback},
                          {"nek_nonresonant", d.nek_nonresonant},
                          {"nek_resonant", d.nek_resonant},
                          {"kam", kam},
                          {"convergence_order", finite_or_null(d.convergence_order)},
                          {"warnings", d.warnings}};
  j["input"] = boundary_to_json(r.input_curve);
  j["forged"] = boundary_to_json(r.forged_curve);
  return j;
}

struct RunManifest {
  std::string command;
  std::string input;
  json config = json::object();
  double wall_ms = 0;
  bool success = false;
};

inline json manifest_to_json(const RunManifest& m) {
  return json{{"command", m.command},
              {"input", m.input},
              {"config", m.config},
              {"version", version_string},
              {"wall_ms", m.wall_ms},
              {"success", m.success}};
}

/// out.json -> out.manifest.json, table.csv -> table.manifest.json.
inline std::string manifest_path(const std::string& out) {
  return std::filesystem::path(out).replace_extension(".manifest.json").string();
}

/// Shortest round-trip text for a double, matching the JSON output.
inline std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  return json(v).dump();
}

struct SweepRow {
  int q = 0;
  std::string status;
  double deformation = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  int kam_iters = 0;
  double closure_error = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0;
};

inline const char* sweep_header() { return "q,deformation,final_residual,kam_iters,closure_error,wall_ms,status"; }

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << sweep_header() << "\n";
  for (const auto& r : rows) {
    os << r.q << "," << format_number(r.deformation) << "," << format_number(r.final_residual) << "," << r.kam_iters
       << "," << format_number(r.closure_error) << "," << format_number(r.wall_ms) << "," << r.status << "\n";
  }
  return os.str();
}

inline std::string envelope_csv(const std::vector<Vec2<double>>& pts) {
  std::ostringstream os;
  os << "x,y\n";
  for (const auto& p : pts) os << format_number(p.x) << "," << format_number(p.y) << "\n";
  return os.str();
}

}  // namespace caustic
