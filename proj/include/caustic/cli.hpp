#pragma once

// The caustic-forge command line: forge, sweep and verify. Kept in a header
// so the tests drive the same entry point as the binary.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "presets.hpp"
#include "solver.hpp"
#include "verify.hpp"

namespace caustic::cli {

enum Exit : int { ok = 0, usage = 1, numerical = 2 };

struct Thresholds {
  double closure = 1e-8;
  double tangency = 1e-8;
  std::size_t samples = 100;
};

/// Pass/fail of a verification report against the thresholds.
inline bool accepted(const CausticReport& r, const Thresholds& t) {
  return r.max_closure_error <= t.closure && r.max_tangency_residual <= t.tangency && r.rotation_number_checked &&
         r.envelope_winding == 1 && r.envelope_inside;
}

/// Worker count for sweeps: CAUSTIC_FORGE_THREADS if set, else the core count.
inline unsigned sweep_threads(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CAUSTIC_FORGE_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) n = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw InputError(std::string("CAUSTIC_FORGE_THREADS must be a positive integer (got '") + env + "')");
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

namespace detail {

struct Source {
  std::string boundary;
  std::string preset;

  FourierCurve load() const {
    if (boundary.empty() == preset.empty()) throw InputError("give exactly one of --boundary and --preset");
    return boundary.empty() ? presets::from_spec(preset) : load_boundary(boundary).curve;
  }
  std::string name() const { return boundary.empty() ? "preset:" + preset : boundary; }
};

struct Common {
  Source src;
  int order = 2;
  int oversample = 32;
  double tol = 1e-12;
  int nek = 0;
  std::string out;
  std::string report;
  Thresholds th;

  ForgeConfig config(int q) const {
    ForgeConfig cfg;
    cfg.q = q;
    cfg.lazutkin_order = order;
    cfg.oversample = oversample;
    cfg.tol_E = tol;
    cfg.nek_sweeps = nek;
    return cfg;
  }
};

inline void add_source(CLI::App* app, Source& s) {
  auto* b = app->add_option("--boundary", s.boundary, "boundary JSON file");
  auto* p = app->add_option("--preset", s.preset, "circle | ellipse:A,B | perturbed[:k:amp,...]");
  b->excludes(p);
}

inline void add_common(CLI::App* app, Common& c) {
  add_source(app, c.src);
  app->add_option("--order", c.order, "Lazutkin order k")->capture_default_str();
  app->add_option("--oversample", c.oversample, "grid points per rotation step")->capture_default_str();
  app->add_option("--tol", c.tol, "residual target for sup |E|")->capture_default_str();
  app->add_option("--nek-sweeps", c.nek, "Nekhoroshev sweeps before the Newton loop")->capture_default_str();
  app->add_option("--out", c.out, "output path");
}

inline void add_thresholds(CLI::App* app, Thresholds& t) {
  app->add_option("--closure-tol", t.closure, "largest accepted porism closure error")->capture_default_str();
  app->add_option("--tangency-tol", t.tangency, "largest accepted envelope tangency residual")->capture_default_str();
  app->add_option("--samples", t.samples, "orbits launched by the porism check")->capture_default_str();
}

inline void write_manifest(const std::string& out, const std::string& command, const std::string& input,
                           const json& config, double wall_ms, bool success) {
  if (out.empty()) return;
  write_text_file(manifest_path(out), dump(manifest_to_json({command, input, config, wall_ms, success})));
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline int cmd_forge(const Common& c, int q, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = c.config(q);
  cfg.check();
  const auto curve = c.src.load();
  const auto res = forge(curve, cfg);
  auto j = result_to_json(res);
  bool good = res.success;
  std::optional<CausticReport> rep;
  if (res.success) {
    rep = verify_caustic(res.forged_curve, q, c.th.samples);
    j["verification"] = report_to_json(*rep);
    j["verification"]["accepted"] = accepted(*rep, c.th);
    good = accepted(*rep, c.th);
  }
  if (!c.out.empty()) write_text_file(c.out, dump(j));
  if (!c.report.empty() && rep) write_text_file(c.report, dump(report_to_json(*rep)));
  write_manifest(c.out, "forge", c.src.name(), config_to_json(cfg), elapsed_ms(t0), good);
  if (!res.success) {
    out << "forge failed (" << res.failure_kind << "): " << res.message << "\n";
    return numerical;
  }
  out << "q=" << q << " deformation=" << format_number(res.deformation)
      << " residual=" << format_number(res.final_residual()) << " kam=" << res.kam_iterations
      << " closure=" << format_number(rep->max_closure_error) << "\n";
  if (!good) {
    out << "verification failed: closure " << format_number(rep->max_closure_error) << ", tangency "
        << format_number(rep->max_tangency_residual) << "\n";
    return numerical;
  }
  return ok;
}

inline SweepRow sweep_one(const PreparedBoundary& prep, const ForgeConfig& cfg, std::size_t samples) {
  SweepRow row;
  row.q = cfg.q;
  try {
    const auto res = forge(prep, cfg);
    row.deformation = res.deformation;
    row.final_residual = res.final_residual();
    row.kam_iters = res.kam_iterations;
    row.wall_ms = res.wall_ms;
    if (!res.success) {
      row.status = res.failure_kind.empty() ? "failed" : res.failure_kind;
      return row;
    }
    row.closure_error = porism_check(res.forged_curve, cfg.q, samples).max_closure_error;
    row.status = "ok";
  } catch (const Error& e) {
    row.status = e.kind();
  }
  return row;
}

inline int cmd_sweep(const Common& c, int q_min, int q_max, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  if (q_min > q_max) throw InputError("empty q range: --q-min is above --q-max");
  for (int q : {q_min, q_max}) c.config(q).check();
  const auto curve = c.src.load();
  const auto prep = prepare_boundary(curve, c.order);
  const std::size_t jobs = static_cast<std::size_t>(q_max - q_min + 1);
  std::vector<SweepRow> rows(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs;) rows[i] = sweep_one(prep, c.config(q_min + static_cast<int>(i)), c.th.samples);
  };
  const unsigned nt = sweep_threads(jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const auto text = sweep_csv(rows);
  if (c.out.empty()) out << text;
  else write_text_file(c.out, text);
  const auto good = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status == "ok"; });
  const bool pass = 5 * static_cast<std::size_t>(good) >= 4 * jobs;
  json cfg = config_to_json(c.config(q_min));
  cfg.erase("q");
  cfg["q_min"] = q_min;
  cfg["q_max"] = q_max;
  write_manifest(c.out, "sweep", c.src.name(), cfg, elapsed_ms(t0), pass);
  if (!c.out.empty()) out << good << "/" << jobs << " runs succeeded\n";
  return pass ? ok : numerical;
}

/// Verifies either a forge result file (its forged boundary and q) or any
/// boundary given with --q.
inline int cmd_verify(const std::string& result, const Source& src, int q, const Thresholds& th,
                      const std::string& report, std::ostream& out) {
  FourierCurve curve;
  if (!result.empty()) {
    if (!src.boundary.empty() || !src.preset.empty()) throw InputError("give a result file or a boundary, not both");
    const auto j = read_json_file(result);
    if (!j.is_object() || !j.contains("forged")) throw InputError("missing field 'forged' in '" + result + "'");
    if (!j.contains("q") || !j["q"].is_number_integer()) throw InputError("missing field 'q' in '" + result + "'");
    curve = boundary_from_json(j["forged"]).curve;
    if (q == 0) q = j["q"].get<int>();
  } else {
    curve = src.load();
  }
  if (q < 3) throw InputError("q must be at least 3");
  validate(curve);
  const auto rep = verify_caustic(curve, q, th.samples);
  if (!report.empty()) write_text_file(report, dump(report_to_json(rep)));
  const bool good = accepted(rep, th);
  out << "q=" << q << " closure=" << format_number(rep.max_closure_error)
      << " tangency=" << format_number(rep.max_tangency_residual) << " winding=" << rep.envelope_winding
      << (good ? " accepted" : " rejected") << "\n";
  return good ? ok : numerical;
}

}  // namespace detail

/// Parses argv and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Forge billiard boundaries with a caustic of rotation number 1/q", "caustic-forge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string);

  detail::Common forge_opts, sweep_opts;
  int q = 0, q_min = 0, q_max = -1;
  auto* f = app.add_subcommand("forge", "forge one boundary for one q");
  detail::add_common(f, forge_opts);
  detail::add_thresholds(f, forge_opts.th);
  f->add_option("--q", q, "rotation denominator, at least 3")->required();
  f->add_option("--report", forge_opts.report, "write the verification report here too");

  auto* s = app.add_subcommand("sweep", "forge a range of q and tabulate");
  detail::add_common(s, sweep_opts);
  s->add_option("--samples", sweep_opts.th.samples, "orbits per porism check")->capture_default_str();
  s->add_option("--q-min", q_min, "first q")->required();
  s->add_option("--q-max", q_max, "last q")->required();

  std::string result, report;
  detail::Source vsrc;
  Thresholds vth;
  int vq = 0;
  auto* v = app.add_subcommand("verify", "check porism closure and the caustic envelope");
  v->add_option("result", result, "forge result JSON");
  detail::add_source(v, vsrc);
  v->add_option("--q", vq, "rotation denominator (taken from the result file if omitted)");
  v->add_option("--report", report, "write the report JSON here");
  detail::add_thresholds(v, vth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }
  try {
    if (f->parsed()) return detail::cmd_forge(forge_opts, q, out);
    if (s->parsed()) return detail::cmd_sweep(sweep_opts, q_min, q_max, out);
    return detail::cmd_verify(result, vsrc, vq, vth, report, out);
  } catch (const Error& e) {
    if (!e.numerical()) {
      err << "error: " << e.what() << "\n";
      return usage;
    }
    err << "numerical failure (" << e.kind() << "): " << e.what() << "\n";
    return numerical;
  }
}

}  // namespace caustic::cli
