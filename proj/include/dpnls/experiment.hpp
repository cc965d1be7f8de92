#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpnls/error.hpp"
#include "dpnls/evolution.hpp"
#include "dpnls/groundstate.hpp"
#include "dpnls/lemma_lab.hpp"
#include "dpnls/params.hpp"
#include "dpnls/stability.hpp"

namespace dpnls {

using json = nlohmann::ordered_json;

struct GridSettings {
  std::string kind;  ///< "periodic" or "radial"; empty picks periodic for N = 1
  double extent = 0;  ///< box length (periodic) or rmax (radial); 0 picks a default
  std::size_t nodes = 0;
};

struct LemmaSettings {
  std::size_t pairs = 128;
  std::size_t lambda_points = 10000;
  std::size_t per_family = 80;
};

struct ExperimentConfig {
  Params params = Params::make(1, 1.0, 1.0, 3.0, 7.0, 1.0);
  double gs_rmax_scale = 25.0;  ///< ground-state rmax in units of 1/sqrt(omega)
  std::size_t gs_nodes = 50001;
  SolverConfig solver;
  EvolutionConfig evolution;
  GridSettings grid;
  std::vector<double> omegas;
  std::vector<double> lambdas;
  LemmaSettings lemma;
  std::string output_dir = "out";
  std::uint64_t seed = 20240601;

  RadialGrid ground_grid(double omega) const {
    return RadialGrid(gs_rmax_scale / std::sqrt(omega), gs_nodes);
  }
};

namespace detail {

template <class T>
T take(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, std::string("config key '") + key + "': " + e.what());
  }
}

inline void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  require(obj.is_object(), ErrorKind::validation, where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    require(allowed.count(k) > 0, ErrorKind::validation, "unknown config key '" + k + "' in " + where);
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  using detail::take;
  detail::only_keys(j, "config", {"params", "ground_state", "evolution", "sweep", "lemma", "output_dir", "seed"});
  ExperimentConfig c;

  const json p = j.value("params", json::object());
  detail::only_keys(p, "params", {"N", "a", "b", "p", "q", "omega"});
  c.params = Params::make(take(p, "N", 1), take(p, "a", 1.0), take(p, "b", 1.0), take(p, "p", 3.0),
                          take(p, "q", 7.0), take(p, "omega", 1.0));

  const json g = j.value("ground_state", json::object());
  detail::only_keys(g, "ground_state", {"rmax_scale", "nodes", "tol", "identity_tol", "scan_points", "bracket_scale"});
  c.gs_rmax_scale = take(g, "rmax_scale", c.gs_rmax_scale);
  c.gs_nodes = take(g, "nodes", c.gs_nodes);
  c.solver.tol = take(g, "tol", c.solver.tol);
  c.solver.identity_tol = take(g, "identity_tol", c.solver.identity_tol);
  c.solver.scan_points = take(g, "scan_points", c.solver.scan_points);
  c.solver.bracket_scale = take(g, "bracket_scale", c.solver.bracket_scale);
  require(c.gs_rmax_scale > 0.0 && c.gs_nodes >= 5, ErrorKind::validation, "invalid ground-state grid");
  require(c.solver.tol > 0.0 && c.solver.identity_tol > 0.0, ErrorKind::validation, "tolerances must be > 0");

  const json e = j.value("evolution", json::object());
  detail::only_keys(e, "evolution", {"dt", "t_max", "blowup_grad_factor", "blowup_amp_factor", "cfl_shrink",
                                     "record_every", "phase_cap", "grid"});
  auto& ev = c.evolution;
  ev.dt = take(e, "dt", ev.dt);
  ev.t_max = take(e, "t_max", 20.0);
  ev.blowup_grad_factor = take(e, "blowup_grad_factor", ev.blowup_grad_factor);
  ev.blowup_amp_factor = take(e, "blowup_amp_factor", ev.blowup_amp_factor);
  ev.cfl_shrink = take(e, "cfl_shrink", ev.cfl_shrink);
  ev.record_every = take(e, "record_every", 1e-3 / c.params.omega());
  ev.phase_cap = take(e, "phase_cap", ev.phase_cap);
  ev.validate();
  const json eg = e.value("grid", json::object());
  detail::only_keys(eg, "evolution.grid", {"kind", "extent", "nodes"});
  c.grid.kind = take(eg, "kind", std::string(c.params.N() == 1 ? "periodic" : "radial"));
  require(c.grid.kind == "periodic" || c.grid.kind == "radial", ErrorKind::validation,
          "evolution.grid.kind must be periodic or radial");
  require(c.grid.kind == "radial" || c.params.N() == 1, ErrorKind::validation,
          "periodic evolution is one-dimensional");
  const double width = 1.0 / std::sqrt(c.params.omega());
  c.grid.extent = take(eg, "extent", (c.grid.kind == "periodic" ? 40.0 : 20.0) * width);
  c.grid.nodes = take(eg, "nodes", std::size_t{c.grid.kind == "periodic" ? 8192u : 4001u});
  require(c.grid.extent > 0.0 && c.grid.nodes >= 4, ErrorKind::validation, "invalid evolution grid");

  const json s = j.value("sweep", json::object());
  detail::only_keys(s, "sweep", {"omegas", "lambdas"});
  c.omegas = take(s, "omegas", std::vector<double>{});
  c.lambdas = take(s, "lambdas", std::vector<double>{});
  for (double w : c.omegas) require(std::isfinite(w) && w > 0.0, ErrorKind::validation, "sweep omegas must be > 0");
  for (double l : c.lambdas) require(std::isfinite(l), ErrorKind::validation, "sweep lambdas must be finite");

  const json l = j.value("lemma", json::object());
  detail::only_keys(l, "lemma", {"pairs", "lambda_points", "per_family"});
  c.lemma.pairs = take(l, "pairs", c.lemma.pairs);
  c.lemma.lambda_points = take(l, "lambda_points", c.lemma.lambda_points);
  c.lemma.per_family = take(l, "per_family", c.lemma.per_family);
  require(c.lemma.pairs >= 1 && c.lemma.lambda_points >= 2 && c.lemma.per_family >= 1, ErrorKind::validation,
          "lemma sample sizes must be positive");

  c.output_dir = take(j, "output_dir", c.output_dir);
  c.seed = take(j, "seed", c.seed);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::validation, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::validation, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Options shared by every command.
struct RunOptions {
  std::filesystem::path out;
  bool timestamp = true;
};

/// Shortest round-trip decimal form used in every output file.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    require(static_cast<bool>(out_), ErrorKind::validation, "cannot write " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

namespace detail {

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::validation, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_summary(const RunOptions& opt, json summary) {
  if (opt.timestamp) summary["generated_at"] = utc_now();
  write_json(opt.out / "summary.json", summary);
}

inline json report_json(const FunctionalReport& r) {
  return {{"mass", r.mass},     {"grad_norm_sq", r.grad}, {"lp_norm", r.lp},   {"lq_norm", r.lq},
          {"energy", r.energy}, {"action", r.action},     {"nehari", r.nehari}, {"virial_q", r.virial},
          {"d2s", r.d2s}};
}

inline json params_json(const Params& p) {
  return {{"N", p.N()}, {"a", p.a()}, {"b", p.b()}, {"p", p.p()}, {"q", p.q()}, {"omega", p.omega()}};
}

inline std::string lambda_tag(double l) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", l);
  return buf;
}

}  // namespace detail

inline void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace) {
  CsvWriter csv(path, {"t", "mass", "energy", "action", "nehari", "virial_q", "grad_norm_sq", "variance", "sup_amp"});
  for (const auto& r : trace) {
    csv.row({fmt(r.t), fmt(r.report.mass), fmt(r.report.energy), fmt(r.report.action), fmt(r.report.nehari),
             fmt(r.report.virial), fmt(r.report.grad), fmt(r.variance), fmt(r.sup_amp)});
  }
}

/// Solves and certifies the ground state at params.omega; writes profile.csv
/// (r, phi), certification.json and summary.json.
inline int cmd_groundstate(const ExperimentConfig& cfg, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out);
  const auto& prm = cfg.params;
  const auto gs = solve_ground_state(prm, cfg.ground_grid(prm.omega()), cfg.solver);
  {
    CsvWriter csv(opt.out / "profile.csv", {"r", "phi"});
    for (std::size_t j = 0; j < gs.profile.size(); ++j)
      csv.row({fmt(gs.profile.radius(j)), fmt(static_cast<double>(gs.profile.values[j]))});
  }
  const auto st = classify(gs);
  json cert = {{"params", detail::params_json(prm)},
               {"certified", gs.certified()},
               {"amplitude", gs.amplitude()},
               {"residual", gs.residual},
               {"nehari_relative", gs.report.nehari / gs.report.action},
               {"virial_relative", gs.report.virial / gs.report.action},
               {"decay_rate", gs.decay_rate},
               {"nodes", gs.profile.size()},
               {"rmax", gs.profile.grid.rmax()},
               {"bracket", {{"lo", gs.bracket.lo}, {"hi", gs.bracket.hi},
                            {"sign_changes", gs.bracket.scan_sign_changes}}},
               {"functionals", detail::report_json(gs.report)},
               {"criterion_met", st.criterion_met}};
  detail::write_json(opt.out / "certification.json", cert);
  detail::write_summary(opt, {{"command", "groundstate"}, {"status", "ok"}, {"amplitude", gs.amplitude()},
                              {"action", gs.report.action}, {"d2s", gs.report.d2s}});
  std::cout << "groundstate: omega=" << fmt(prm.omega()) << " amplitude=" << fmt(gs.amplitude())
            << " residual=" << fmt(gs.residual) << '\n';
  return 0;
}

/// ω sweep of solve + classify; failed points become rows with their error kind.
inline int cmd_classify(const ExperimentConfig& cfg, const RunOptions& opt) {
  require(!cfg.omegas.empty(), ErrorKind::validation, "classify needs a nonempty sweep.omegas list");
  std::filesystem::create_directories(opt.out);
  CsvWriter csv(opt.out / "classify.csv", {"omega", "d2s", "energy", "criterion_met", "status"});
  int failures = 0, met = 0;
  bool remark_ok = true;
  for (double w : cfg.omegas) {
    try {
      const auto prm = cfg.params.with_omega(w);
      const auto st = classify(solve_ground_state(prm, cfg.ground_grid(w), cfg.solver));
      csv.row({fmt(w), fmt(st.d2s), fmt(st.energy), st.criterion_met ? "true" : "false", "ok"});
      met += st.criterion_met;
      remark_ok = remark_ok && st.remark13_consistent;
    } catch (const Error& e) {
      ++failures;
      csv.row({fmt(w), "nan", "nan", "false", std::string(to_string(e.kind()))});
      std::cerr << "classify: omega=" << fmt(w) << ": " << e.what() << '\n';
    }
  }
  detail::write_summary(opt, {{"command", "classify"}, {"status", failures ? "partial" : "ok"},
                              {"points", cfg.omegas.size()}, {"failures", failures}, {"criterion_met", met},
                              {"remark13_consistent", remark_ok}});
  std::cout << "classify: " << cfg.omegas.size() << " points, " << met << " criterion_met, " << failures
            << " failed\n";
  return failures ? 1 : 0;
}

inline ComplexField scaled_initial_data(const ExperimentConfig& cfg, const GroundStateResult& gs, double lambda) {
  if (cfg.grid.kind == "periodic") return make_scaled_data(gs, lambda, PeriodicGrid(cfg.grid.extent, cfg.grid.nodes));
  return make_scaled_data(gs, lambda, RadialGrid(cfg.grid.extent, cfg.grid.nodes));
}

/// For each λ: scaled data, evolution, audits; a trace CSV and verdict JSON per λ.
inline int cmd_blowup(const ExperimentConfig& cfg, const RunOptions& opt) {
  require(!cfg.lambdas.empty(), ErrorKind::validation, "blowup needs a nonempty sweep.lambdas list");
  std::filesystem::create_directories(opt.out);
  const auto& prm = cfg.params;
  const auto gs = solve_ground_state(prm, cfg.ground_grid(prm.omega()), cfg.solver);
  const auto st = classify(gs);
  if (!st.criterion_met)
    std::cerr << "blowup: warning: ground state at omega=" << fmt(prm.omega()) << " has d2s > 0\n";

  json verdicts = json::array();
  int errors = 0, inconclusive = 0;
  std::vector<double> detect_times;
  for (double lam : cfg.lambdas) {
    const std::string tag = detail::lambda_tag(lam);
    json v = {{"lambda", lam}};
    try {
      const auto u0 = scaled_initial_data(cfg, gs, lam);
      const auto verdict = evolve(u0, prm, cfg.evolution);
      write_trace_csv(opt.out / ("trace_lambda_" + tag + ".csv"), verdict.trace);
      const auto window = pre_blowup_window(verdict.trace);
      auto guarded = [](auto&& f) -> json {
        try {
          return f();
        } catch (const Error& e) {
          return std::string(to_string(e.kind()));
        }
      };
      v["outcome"] = std::string(to_string(verdict.outcome));
      v["blew_up"] = verdict.blew_up;
      v["reason"] = verdict.reason;
      v["t_detect"] = verdict.t_detect ? json(*verdict.t_detect) : json(nullptr);
      v["t_max"] = cfg.evolution.t_max;
      v["steps"] = verdict.steps;
      v["smallest_dt"] = verdict.smallest_dt;
      v["records"] = verdict.trace.size();
      v["action_gap"] = verdict.trace.front().report.action - gs.report.action;
      v["virial_check_pre_blowup"] = guarded([&] { return json(virial_check(window)); });
      v["concavity_audit"] = guarded([&] { return json(concavity_audit(verdict.trace, gs.report.action)); });
      v["variance_decreasing"] = variance_decreasing(verdict.trace);
      v["b_omega_invariance_audit"] = guarded([&] { return json(b_omega_invariance_audit(verdict, gs)); });
      if (verdict.outcome != Outcome::blowup && verdict.outcome != Outcome::completed) ++inconclusive;
      if (verdict.blew_up) detect_times.push_back(*verdict.t_detect);
    } catch (const Error& e) {
      ++errors;
      v["outcome"] = "error";
      v["error"] = std::string(to_string(e.kind()));
      v["message"] = e.what();
      std::cerr << "blowup: lambda=" << tag << ": " << e.what() << '\n';
    }
    detail::write_json(opt.out / ("verdict_lambda_" + tag + ".json"), v);
    std::cout << "blowup: lambda=" << tag << " outcome=" << v["outcome"].get<std::string>() << '\n';
    verdicts.push_back(std::move(v));
  }
  bool nonincreasing = true;
  for (std::size_t i = 1; i < detect_times.size(); ++i) nonincreasing = nonincreasing && detect_times[i] <= detect_times[i - 1];
  detail::write_summary(opt, {{"command", "blowup"},
                              {"status", errors ? "partial" : (inconclusive ? "inconclusive" : "ok")},
                              {"params", detail::params_json(prm)},
                              {"criterion_met", st.criterion_met},
                              {"inconclusive", inconclusive},
                              {"errors", errors},
                              {"observation_detect_time_nonincreasing", nonincreasing},
                              {"verdicts", verdicts}});
  return errors ? 1 : 0;
}

struct LemmaOutcome {
  std::size_t pairs = 0;
  int sign_violations = 0;
  std::size_t samples = 0;
  int margin_violations = 0;
  double min_margin = INFINITY;
};

/// Sign suite over seeded (α, β) pairs and key-estimate sampling at the
/// configured ground state; writes sign_suite.csv and key_estimate.csv.
inline LemmaOutcome run_lemma_suite(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  LemmaOutcome res;
  UnitRng rng(cfg.seed);
  const auto grid = open_unit_grid(cfg.lemma.lambda_points);
  {
    CsvWriter csv(out / "sign_suite.csv", {"alpha", "beta", "min_h", "min_g1", "min_g2", "max_g2", "min_g3"});
    for (std::size_t i = 0; i < cfg.lemma.pairs; ++i) {
      const auto row = sign_suite(random_exponent_pair(rng), grid);
      res.sign_violations += row.total_violations();
      csv.row({fmt(row.alpha), fmt(row.beta), fmt(row.min_h), fmt(row.min_g1), fmt(row.min_g2), fmt(row.max_g2),
               fmt(row.min_g3)});
    }
    res.pairs = cfg.lemma.pairs;
  }
  const auto gs = solve_ground_state(cfg.params, cfg.ground_grid(cfg.params.omega()), cfg.solver);
  require(classify(gs).criterion_met, ErrorKind::precondition,
          "key-estimate sampling needs an omega whose ground state has d2s <= 0");
  const auto samples = admissible_samples(gs, rng, cfg.lemma.per_family);
  CsvWriter csv(out / "key_estimate.csv", {"lambda0", "lhs", "rhs", "margin"});
  for (const auto& s : samples) {
    const auto k = key_estimate_check(s.report, gs);
    res.min_margin = std::min(res.min_margin, k.margin);
    res.margin_violations += k.margin < -1e-8 * std::abs(k.rhs);
    csv.row({fmt(k.lambda0), fmt(k.lhs), fmt(k.rhs), fmt(k.margin)});
  }
  res.samples = samples.size();
  return res;
}

inline int cmd_verify_lemma(const ExperimentConfig& cfg, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out);
  const auto r = run_lemma_suite(cfg, opt.out);
  const bool ok = r.sign_violations == 0 && r.margin_violations == 0;
  detail::write_summary(opt, {{"command", "verify-lemma"},
                              {"status", ok ? "ok" : "violations"},
                              {"seed", cfg.seed},
                              {"pairs", r.pairs},
                              {"sign_violations", r.sign_violations},
                              {"samples", r.samples},
                              {"margin_violations", r.margin_violations},
                              {"min_margin", r.min_margin}});
  std::cout << "verify-lemma: " << r.pairs << " pairs, " << r.sign_violations << " sign violations; " << r.samples
            << " samples, min margin " << fmt(r.min_margin) << '\n';
  return ok ? 0 : 1;
}

}  // namespace dpnls
