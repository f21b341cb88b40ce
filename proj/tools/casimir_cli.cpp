// casimir: command-line driver for the force pipeline.
//
//   casimir [--config FILE] [--seed N] [--out DIR] [--format csv|structured] [--threads N] COMMAND
//
// Commands: epsilon, force-curve, simulate, analyze, compare. Exit codes: 0 success,
// 1 validation, 2 numerical failure, 3 I/O. Failures print a JSON error document on stderr.

#include "casimir/analysis.hpp"
#include "casimir/config.hpp"
#include "casimir/errors.hpp"
#include "casimir/io.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/parallel.hpp"
#include "casimir/rig.hpp"
#include "casimir/svg.hpp"
#include "casimir/units.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <glob.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace casimir;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<std::string> format;
  std::optional<int> threads;
};

std::string path_in(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void emit(const PipelineConfig& cfg, const std::string& dir, const std::string& stem, const std::string& csv,
          const json& structured) {
  if (cfg.format == OutputFormat::csv)
    write_text_file(path_in(dir, stem + ".csv"), csv);
  else
    write_text_file(path_in(dir, stem + ".json"), structured.dump(2) + "\n");
}

// ---- epsilon ---------------------------------------------------------------------------------

struct EpsilonArgs {
  std::optional<std::string> material;
  std::optional<double> xi_min_ev, xi_max_ev;
  std::optional<int> points;
};

int cmd_epsilon(PipelineConfig cfg, const Globals& g, const EpsilonArgs& a) {
  auto& e = cfg.epsilon;
  if (a.material) e.material = *a.material;
  if (a.xi_min_ev) e.xi_min = units::from_ev(*a.xi_min_ev);
  if (a.xi_max_ev) e.xi_max = units::from_ev(*a.xi_max_ev);
  if (a.points) e.points = *a.points;
  validate(cfg);
  const Material& m = cfg.materials.get(e.material);
  if (m.is_ideal()) throw ValidationError("the ideal-metal sentinel has no dielectric function");

  Eigen::ArrayXd xi = Eigen::ArrayXd::Constant(1, e.xi_min);
  if (e.points > 1) xi = Eigen::ArrayXd::LinSpaced(e.points, std::log(e.xi_min), std::log(e.xi_max)).exp();
  const json meta = output_meta(cfg);
  std::string csv = fmt::format("# kind: epsilon\n# version: {}\n# config_hash: {}\n# config: {}\n",
                                meta["version"].get<std::string>(), meta["config_hash"].get<std::string>(),
                                meta["config"].dump());
  csv += "xi_rad_s,xi_eV,epsilon,material\n";
  json doc{{"kind", "epsilon"}, {"meta", meta}, {"material", e.material}};
  std::vector<double> xs, eps;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    const double v = eval_epsilon(m.model(), xi[i]);
    csv += fmt::format("{},{},{},{}\n", format_number(xi[i]), format_number(units::to_ev(xi[i])),
                       format_number(v), e.material);
    xs.push_back(xi[i]);
    eps.push_back(v);
  }
  doc["xi_rad_s"] = xs;
  doc["epsilon"] = eps;
  emit(cfg, g.out, "epsilon", csv, doc);
  fmt::print("epsilon: {} rows for '{}'\n", xs.size(), e.material);
  return 0;
}

// ---- force-curve -----------------------------------------------------------------------------

struct ForceCurveArgs {
  std::vector<std::string> pairs;
  std::optional<double> d_min_nm, d_max_nm, temperature, radius_um;
  std::optional<int> points;
  std::optional<std::string> policy, spacing;
  bool plot = false;
};

int cmd_force_curve(PipelineConfig cfg, const Globals& g, const ForceCurveArgs& a) {
  auto& s = cfg.sweep;
  if (!a.pairs.empty()) {
    s.pairs.clear();
    for (const auto& p : a.pairs) {
      const auto slash = p.find('/');
      if (slash == std::string::npos) throw ValidationError("--pair must read sphere/plate, got '" + p + "'");
      s.pairs.emplace_back(p.substr(0, slash), p.substr(slash + 1));
    }
  }
  if (a.d_min_nm) s.d_min = *a.d_min_nm * units::nm;
  if (a.d_max_nm) s.d_max = *a.d_max_nm * units::nm;
  if (a.points) s.points = *a.points;
  if (a.spacing) {
    if (*a.spacing != "log" && *a.spacing != "linear") throw ValidationError("--spacing must be log|linear");
    s.log_spacing = *a.spacing == "log";
  }
  if (a.temperature) {
    cfg.lifshitz.grid = matsubara_frequencies(
        *a.temperature, CutoffPolicy{cfg.lifshitz.grid.max_terms, cfg.lifshitz.grid.tail_tolerance});
    cfg.rig.instrument.temperature = *a.temperature;
  }
  if (a.policy) cfg.lifshitz.policy = parse_zero_frequency_policy(*a.policy);
  if (a.radius_um) cfg.radius = cfg.rig.instrument.radius = *a.radius_um * units::um;
  validate(cfg);

  const Eigen::ArrayXd grid = s.grid();
  std::vector<PairCurve> curves;
  for (const auto& [sphere, plate] : s.pairs)
    curves.push_back({sphere, plate, cfg.lifshitz.policy, cfg.radius,
                      compute_theory_curve(cfg.mirror(sphere), cfg.mirror(plate), cfg.radius, grid, cfg.lifshitz,
                                           cfg.threads)});

  const json meta = output_meta(cfg);
  emit(cfg, g.out, "force_curve", theory_csv(curves, meta), theory_json(curves, meta));
  if (curves.size() >= 2 && cfg.format == OutputFormat::csv)
    write_text_file(path_in(g.out, "force_ratio.csv"), ratio_csv(curves, meta));
  if (a.plot) {
    std::vector<svg::Series> series;
    for (const auto& c : curves) {
      const Eigen::ArrayXd dn = c.curve.separation / units::nm;
      const Eigen::ArrayXd over_r = c.curve.gradient / c.radius;
      series.push_back({c.label(), {dn.data(), dn.data() + dn.size()}, {over_r.data(), over_r.data() + over_r.size()}});
    }
    const svg::Axes axes{"Casimir force gradient (PFA)", "d (nm)", "|F'| / R (Pa)", true, true};
    write_text_file(path_in(g.out, "force_curve.svg"),
                    svg::line_plot(axes, series, "force-curve config_hash=" + meta["config_hash"].get<std::string>()));
  }
  for (const auto& c : curves)
    fmt::print("force-curve: {} ({} points, policy {})\n", c.label(), grid.size(), to_string(c.policy));
  return 0;
}

// ---- simulate --------------------------------------------------------------------------------

struct SimulateArgs {
  std::optional<std::string> preset;
  std::optional<int> runs;
  std::optional<std::string> plate;
  std::optional<double> drift_nm;
  bool noise_off = false;
};

int cmd_simulate(PipelineConfig cfg, const Globals& g, const SimulateArgs& a) {
  if (a.preset) {
    const Instrument keep = cfg.rig.instrument;
    cfg.rig = preset_config(*a.preset);
    cfg.rig.instrument.radius = keep.radius;
    cfg.rig.instrument.temperature = keep.temperature;
  }
  Instrument& in = cfg.rig.instrument;
  if (a.runs) in.runs = *a.runs;
  if (a.plate) in.plate = *a.plate;
  if (a.drift_nm) cfg.rig.truth.drift_per_run = *a.drift_nm * units::nm;
  if (a.noise_off) in.noise = NoiseConfig{};
  validate(cfg);

  // Separation range over the series, for the Casimir gradient table.
  const TruthParams& t = cfg.rig.truth;
  double d_lo = std::numeric_limits<double>::infinity(), d_hi = 0.0;
  for (int r : {0, in.runs - 1}) {
    const double shift = in.reapproach ? t.drift_per_run * r : 0.0;
    for (double sp : in.setpoints) {
      const double d = t.d0 + t.drift_per_run * r - sp - shift;
      d_lo = std::min(d_lo, d);
      d_hi = std::max(d_hi, d);
    }
  }
  if (!(d_lo > 0.0))
    throw ContactError(fmt::format("configuration drives the sphere into contact (minimum separation {:.4g} nm)",
                                   d_lo / units::nm));
  const double table_lo = std::max(1e-9, d_lo * 0.95);
  const double table_hi = std::min(10e-6, d_hi * 1.05);
  if (!(table_hi > table_lo)) throw ValidationError("separations outside the supported 1 nm - 10 um range");
  const GradientTable table(cfg.mirror(in.sphere), cfg.mirror(in.plate), in.radius, table_lo, table_hi,
                            cfg.lifshitz, 160, cfg.threads);
  const auto runs = simulate_series(cfg.rig, [&table](double d) { return table(d); }, cfg.seed, cfg.threads);

  const json meta = output_meta(cfg);
  std::vector<RunRecord> records;
  std::vector<TruthRecord> truth;
  int qs = 0, fb = 0;
  for (const auto& r : runs) {
    records.push_back(r.record);
    truth.push_back(r.truth);
    qs += r.record.quasi_static_warning;
    fb += r.record.feedback_warning;
  }
  if (cfg.format == OutputFormat::csv) {
    for (const auto& r : records)
      write_text_file(path_in(g.out, fmt::format("runs/run_{:04d}.csv", r.run_id)), run_csv(r, meta));
  } else {
    write_text_file(path_in(g.out, "runs.json"), run_bundle_json(records, meta).dump(1) + "\n");
  }
  write_text_file(path_in(g.out, "truth_test_only.json"), truth_json(truth, meta).dump(1) + "\n");
  fmt::print("simulate: {} runs ({} / {}), seed {}\n", records.size(), in.sphere, in.plate, cfg.seed);
  if (qs) fmt::print(stderr, "warning: {} run(s) exceed the quasi-static limit\n", qs);
  if (fb) fmt::print(stderr, "warning: {} run(s) with unconverged residual-potential feedback\n", fb);
  return 0;
}

// ---- analyze ---------------------------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<std::string> patterns;
  std::vector<double> probes_nm;
  std::optional<double> window_nm;
  std::optional<std::string> weighting;
  std::optional<int> min_curves;
  bool plot = false;
};

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0)
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) throw IoError("cannot expand '" + p + "'");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int cmd_analyze(PipelineConfig cfg, const Globals& g, const AnalyzeArgs& a) {
  auto& an = cfg.analysis;
  if (!a.probes_nm.empty()) {
    an.probes.clear();
    for (double p : a.probes_nm) an.probes.push_back(p * units::nm);
  }
  if (a.window_nm) an.window = *a.window_nm * units::nm;
  if (a.weighting) an.fit.weighting = parse_fit_weighting(*a.weighting);
  if (a.min_curves) an.min_curves = *a.min_curves;
  validate(cfg);

  const auto paths = expand(a.patterns);
  if (paths.empty()) throw ValidationError("no run files match the given pattern(s)");
  const auto files = load_runs(paths);
  if (files.empty()) throw ValidationError("the matched files contain no runs");

  const std::size_t n = files.size();
  std::vector<CalibrationResult> cals(n);
  std::vector<ForceCurve> casimir_curves(n), background(n), hydro(n);
  parallel_for(static_cast<int>(n), cfg.threads, [&](int i) {
    const auto& f = files[static_cast<std::size_t>(i)];
    cals[i] = fit_calibration(f.record, f.instrument, an.fit);
    casimir_curves[i] = extract_force_gradient(f.record, cals[i], f.instrument);
    background[i] = electrostatic_background(f.record, cals[i], f.instrument);
    hydro[i] = extract_hydrodynamic(f.record, cals[i], f.instrument);
  });

  std::vector<std::string> hashes;
  for (const auto& f : files) hashes.push_back(f.config_hash);
  std::sort(hashes.begin(), hashes.end());
  hashes.erase(std::unique(hashes.begin(), hashes.end()), hashes.end());
  json meta = output_meta(cfg);
  meta["source_config_hashes"] = hashes;

  std::vector<ForceCurve> all;
  for (std::size_t i = 0; i < n; ++i) {
    all.push_back(casimir_curves[i]);
    all.push_back(background[i]);
    all.push_back(hydro[i]);
  }
  emit(cfg, g.out, "calibration", calibration_csv(cals, meta), calibration_json(cals, meta));
  emit(cfg, g.out, "force_curves", force_curves_csv(all, meta), force_curves_json(all, meta));

  json summary{{"kind", "analysis-summary"}, {"meta", meta}, {"runs", n}};
  int flagged = 0;
  for (const auto& c : casimir_curves) flagged += static_cast<int>(std::count(c.flagged.begin(), c.flagged.end(), true));
  summary["flagged_points"] = flagged;
  if (n >= 3) {
    const DriftFit drift = fit_drift(cals);
    summary["drift"] = {{"slope_m_per_run", drift.slope}, {"slope_sigma_m_per_run", drift.slope_sigma},
                        {"intercept_m", drift.intercept}};
  }
  summary["ensembles"] = json::array();
  if (static_cast<int>(n) < an.min_curves) {
    fmt::print(stderr, "note: {} run(s) < min_curves = {}; ensemble statistics skipped\n", n, an.min_curves);
    summary["ensembles_skipped"] = true;
  } else {
    for (double probe : an.probes) {
      const EnsembleStats stats = ensemble_statistics(casimir_curves, probe, an.window, an.min_curves);
      const std::string stem = fmt::format("ensemble_{:g}nm", probe / units::nm);
      emit(cfg, g.out, stem, ensemble_csv(stats, meta), ensemble_json(stats, meta));
      summary["ensembles"].push_back({{"probe_separation_m", probe}, {"n", stats.values.size()},
                                      {"mean_Pa", stats.mean}, {"std_Pa", stats.std_dev}, {"sem_Pa", stats.sem},
                                      {"relative_std", stats.std_dev / std::abs(stats.mean)},
                                      {"relative_sem", stats.sem / std::abs(stats.mean)}});
      if (a.plot) {
        const svg::Axes axes{fmt::format("F'/R at d = {:g} nm ({} runs)", probe / units::nm, stats.values.size()),
                             "F'/R (Pa)", "count"};
        write_text_file(path_in(g.out, stem + ".svg"),
                        svg::histogram(axes, stats.bin_edges, stats.bin_counts,
                                       "ensemble config_hash=" + meta["config_hash"].get<std::string>() +
                                           " bin_rule=" + stats.bin_rule));
      }
      fmt::print("analyze: d = {:g} nm, mean F'/R = {:.6g} Pa, std/mean = {:.4f}, sem/mean = {:.5f}\n",
                 probe / units::nm, stats.mean, stats.std_dev / std::abs(stats.mean),
                 stats.sem / std::abs(stats.mean));
    }
  }
  write_text_file(path_in(g.out, "summary.json"), summary.dump(2) + "\n");
  if (a.plot) {
    auto to_series = [](const ForceCurve& c, const std::string& label) {
      svg::Series s{label, {}, c.value};
      for (double d : c.separation) s.x.push_back(d / units::nm);
      return s;
    };
    const svg::Axes axes{fmt::format("Run {} force gradient", casimir_curves.front().run_id), "d (nm)",
                         "|F'| / R (Pa)", true, true};
    write_text_file(path_in(g.out, "force_curve_run.svg"),
                    svg::line_plot(axes, {to_series(casimir_curves.front(), "casimir"),
                                          to_series(background.front(), "electrostatic background")},
                                   "analyze config_hash=" + meta["config_hash"].get<std::string>()));
  }
  fmt::print("analyze: {} runs calibrated, {} flagged points\n", n, flagged);
  return 0;
}

// ---- compare ---------------------------------------------------------------------------------

struct CompareArgs {
  std::string a, b;
};

int cmd_compare(PipelineConfig cfg, const Globals& g, const CompareArgs& args) {
  validate(cfg);
  const EnsembleStats a = load_ensemble(args.a);
  const EnsembleStats b = load_ensemble(args.b);
  const PairRatio r = compare_pairs(a, b);
  json meta = output_meta(cfg);
  meta["inputs"] = {args.a, args.b};
  const std::string csv =
      fmt::format("# kind: comparison\n# version: {}\n# config_hash: {}\n# config: {}\n"
                  "probe_separation_m,mean_a,sem_a,n_a,mean_b,sem_b,n_b,ratio_b_over_a,ratio_uncertainty\n"
                  "{},{},{},{},{},{},{},{},{}\n",
                  meta["version"].get<std::string>(), meta["config_hash"].get<std::string>(), meta["config"].dump(),
                  format_number(a.probe_separation), format_number(a.mean), format_number(a.sem), a.values.size(),
                  format_number(b.mean), format_number(b.sem), b.values.size(), format_number(r.ratio),
                  format_number(r.uncertainty));
  const json doc{{"kind", "comparison"}, {"meta", meta}, {"probe_separation_m", a.probe_separation},
                 {"a", {{"mean", a.mean}, {"sem", a.sem}, {"n", a.values.size()}}},
                 {"b", {{"mean", b.mean}, {"sem", b.sem}, {"n", b.values.size()}}},
                 {"ratio", r.ratio}, {"uncertainty", r.uncertainty}};
  emit(cfg, g.out, "comparison", csv, doc);
  fmt::print("compare: ratio b/a at {:g} nm = {:.5f} +- {:.5f}\n", a.probe_separation / units::nm, r.ratio,
             r.uncertainty);
  return 0;
}

int report(ErrorKind kind, const std::string& name, const std::string& message,
           std::optional<double> achieved = std::nullopt) {
  json doc{{"error", {{"kind", name}, {"exit_code", static_cast<int>(kind)}, {"message", message}}}};
  if (achieved) doc["error"]["achieved_error"] = *achieved;
  std::cerr << doc.dump() << '\n';
  return static_cast<int>(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir force pipeline: dielectric functions, Lifshitz force curves, virtual rig and analysis"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "INI configuration file");
  app.add_option("--seed", g.seed, "series seed");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "structured"}));
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

  EpsilonArgs ea;
  auto* eps = app.add_subcommand("epsilon", "tabulate eps(i xi) of a material");
  eps->add_option("--material", ea.material);
  eps->add_option("--xi-min-ev", ea.xi_min_ev);
  eps->add_option("--xi-max-ev", ea.xi_max_ev);
  eps->add_option("--points", ea.points);

  ForceCurveArgs fa;
  auto* fc = app.add_subcommand("force-curve", "Lifshitz/PFA force curves for material pairs");
  fc->add_option("--pair", fa.pairs, "sphere/plate mirror pair (repeatable)");
  fc->add_option("--d-min-nm", fa.d_min_nm);
  fc->add_option("--d-max-nm", fa.d_max_nm);
  fc->add_option("--points", fa.points);
  fc->add_option("--spacing", fa.spacing)->check(CLI::IsMember({"log", "linear"}));
  fc->add_option("--temperature", fa.temperature, "K");
  fc->add_option("--policy", fa.policy, "zero-frequency policy")->check(CLI::IsMember({"drude", "plasma"}));
  fc->add_option("--radius-um", fa.radius_um);
  fc->add_flag("--plot", fa.plot, "also write force_curve.svg");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "run the virtual rig");
  sim->add_option("--preset", sa.preset, "instrument preset")->check(CLI::IsMember({"gold", "ito"}));
  sim->add_option("--runs", sa.runs);
  sim->add_option("--plate", sa.plate, "plate mirror");
  sim->add_option("--drift-nm", sa.drift_nm, "d0 drift per run (nm)");
  sim->add_flag("--noise-off", sa.noise_off, "disable all channel noise");

  AnalyzeArgs aa;
  auto* ana = app.add_subcommand("analyze", "calibrate runs and reduce force curves");
  ana->add_option("runs", aa.patterns, "run files or glob patterns (.csv or .json bundles)")->required();
  ana->add_option("--probe-nm", aa.probes_nm, "ensemble probe separation (repeatable)");
  ana->add_option("--window-nm", aa.window_nm);
  ana->add_option("--weighting", aa.weighting)->check(CLI::IsMember({"uniform", "relative"}));
  ana->add_option("--min-curves", aa.min_curves);
  ana->add_flag("--plot", aa.plot, "write histogram and force-curve SVGs");

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "ratio of two ensembles (b / a)");
  cmp->add_option("a", ca.a, "reference ensemble file")->required();
  cmp->add_option("b", ca.b, "ensemble file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ErrorKind::validation, "validation", e.what());
  }

  try {
    PipelineConfig cfg = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (g.format) cfg.format = parse_output_format(*g.format);
    if (g.threads) cfg.threads = *g.threads;
    if (*eps) return cmd_epsilon(cfg, g, ea);
    if (*fc) return cmd_force_curve(cfg, g, fa);
    if (*sim) return cmd_simulate(cfg, g, sa);
    if (*ana) return cmd_analyze(cfg, g, aa);
    if (*cmp) return cmd_compare(cfg, g, ca);
    return report(ErrorKind::validation, "validation", "no command given");
  } catch (const NumericalError& e) {
    return report(e.kind(), e.kind_name(), e.what(), e.achieved());
  } catch (const Error& e) {
    return report(e.kind(), e.kind_name(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report(ErrorKind::io, "io", e.what());
  } catch (const std::exception& e) {
    return report(ErrorKind::numerical, "numerical", e.what());
  }
}
