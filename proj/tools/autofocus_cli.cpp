// Command-line front end: simulate, reconstruct, evaluate, check-prop1, schema.

#include "autofocus/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace autofocus;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

RunConfig load(const std::string& path, std::optional<std::uint64_t> seed, std::optional<int> threads) {
  RunConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  if (threads) {
    if (*threads < 1) throw ConfigError("--threads must be positive");
    cfg.solver.threads = *threads;
  }
  return cfg;
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  const Simulation sim = simulate_measurements(cfg.resolved_experiment());
  write_simulation(out, sim, cfg);
  fmt::print("simulate: M={} F={} N={} noise_sigma={:.6g}", sim.measurements.size(), sim.measurements.freqs.size(),
             sim.truth.values.size(), sim.measurements.noise_sigma);
  if (sim.achieved_psnr_db) fmt::print(" psnr={:.3f} dB", *sim.achieved_psnr_db);
  fmt::print(" -> {}\n", out.string());
  return kOk;
}

int cmd_reconstruct(const RunConfig& cfg, const fs::path& in, const std::string& method, const fs::path& out) {
  const Method m = parse_method(method);
  const StoredSimulation stored = read_simulation(in);
  const SpatialGrid& g = cfg.experiment.grid;
  if (g.nx() != stored.grid.nx() || g.ny() != stored.grid.ny() || g.spacing() != stored.grid.spacing())
    throw DimensionMismatch("configured grid differs from the grid of " + in.string());
  const MethodResult res = run_method(m, stored.measurements, cfg);
  write_reconstruction(out, res, cfg, stored.manifest);
  fmt::print("reconstruct: method={} time={:.2f}s", method, res.seconds);
  if (res.bcd) fmt::print(" stop={} outer={}", res.bcd->stop_reason, res.bcd->outer_iterations);
  fmt::print(" -> {}\n", out.string());
  return kOk;
}

int cmd_evaluate(const std::vector<std::string>& recs, const fs::path& truth_dir, const fs::path& out,
                 const std::string& scenario_opt, int max_shift, int thresholds) {
  if (!fs::exists(truth_dir / "scene.csv")) throw IoError("missing truth: " + (truth_dir / "scene.csv").string());
  const StoredSimulation truth = read_simulation(truth_dir);
  const GridShape shape = truth.grid.shape();
  const std::string scenario = scenario_opt.empty() ? truth_dir.filename().string() : scenario_opt;
  OutputConfig oc;
  oc.align_max_shift = max_shift;
  oc.roc_thresholds = thresholds;
  const json& psnr = truth.manifest.at("noise").at("psnr_db");
  const std::string psnr_s = psnr.is_null() ? "inf" : format_double(psnr.get<double>());
  const std::string seed_s = std::to_string(truth.manifest.value("seed", std::uint64_t{0}));

  std::string csv = "scenario,seed,psnr_db,method,auc,rel_l2,f1\n";
  std::string kcsv = "scenario,seed,method,m,recovered_dx,recovered_dy,true_dx,true_dy,error_px\n";
  bool any_kernels = false;
  std::vector<std::pair<std::string, RocCurve>> curves;
  for (const auto& r : recs) {
    const fs::path dir(r);
    const json log = read_json(dir / "run_log.json");
    const std::string method = log.value("method", dir.filename().string());
    const CVec x = parse_image_csv(read_file(dir / "image.csv"), shape);
    const EvaluationRow row = evaluate_reconstruction(method, x, truth.truth, shape, oc);
    csv += fmt::format("{},{},{},{},{},{},{}\n", scenario, seed_s, psnr_s, method, format_double(row.auc),
                       format_double(row.rel_l2), format_double(row.f1));
    curves.emplace_back(method, row.roc);
    std::string roc = "threshold,pfa,pd\n";
    for (std::size_t i = 0; i < row.roc.pfa.size(); ++i)
      roc += fmt::format("{},{},{}\n", format_double(row.roc.thresholds[i]), format_double(row.roc.pfa[i]),
                         format_double(row.roc.pd[i]));
    write_file_atomic(out / ("roc_" + method + ".csv"), roc);
    write_file_atomic(out / ("aligned_" + method + ".pgm"), pgm_image(row.aligned, shape));
    if (fs::exists(dir / "kernels.csv") && !truth.true_kernel_offsets.empty()) {
      const auto kernels = parse_kernels_csv(read_file(dir / "kernels.csv"));
      if (kernels.size() == truth.true_kernel_offsets.size()) {
        std::vector<PixelOffset> rec;
        for (const auto& k : kernels) rec.push_back(k.one_sparse_offset().value_or(PixelOffset{99, 99}));
        const auto ke = kernel_offset_errors(rec, truth.true_kernel_offsets);
        for (std::size_t m = 0; m < rec.size(); ++m)
          kcsv += fmt::format("{},{},{},{},{},{},{},{},{}\n", scenario, seed_s, method, m, rec[m].dx, rec[m].dy,
                              truth.true_kernel_offsets[m].dx, truth.true_kernel_offsets[m].dy,
                              format_double(ke.errors[m]));
        any_kernels = true;
      }
    }
    fmt::print("evaluate: {} auc={:.4f} rel_l2={:.4g} f1={:.3f} shift=({},{})\n", method, row.auc, row.rel_l2, row.f1,
               row.shift.dx, row.shift.dy);
  }
  write_file_atomic(out / "metrics.csv", csv);
  if (any_kernels) write_file_atomic(out / "kernel_errors.csv", kcsv);
  write_file_atomic(out / "roc.svg", roc_svg(curves, scenario + " (PSNR " + psnr_s + " dB)"));
  return kOk;
}

int cmd_check_prop1(const RunConfig& cfg, PixelOffset e, const std::string& out) {
  const ExperimentSpec spec = cfg.resolved_experiment();
  const auto pairs = flatten_pairs(spec.arrays);
  if (pairs.empty()) throw ConfigError("check-prop1 needs at least one antenna pair");
  const ReflectivityImage x = place_targets(spec.grid, spec.targets, spec.boundary_band);
  if (x.nonzeros() == 0) throw ConfigError("check-prop1 needs at least one target");
  if (x.boundary_band() < e.chebyshev())
    throw BoundaryViolation("boundary band " + std::to_string(x.boundary_band()) + " is narrower than the shift");
  const double lambda = spec.pulse.center_wavelength();
  std::vector<double> deltas{0.0};
  for (int i = 0; i < 10; ++i) deltas.push_back(lambda / 100.0 * std::pow(50.0, i / 9.0));

  std::string csv = "pair,delta_m,max_phase_dev,phase_bound,max_rel_error,pass\n";
  bool ok = true;
  fmt::print("{:>4} {:>12} {:>14} {:>14} {:>14} {}\n", "pair", "delta_m", "phase_dev", "bound", "rel_error", "pass");
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    for (double d : deltas) {
      const auto rep = check_proposition1(pairs[m].tx, pairs[m].rx, spec.grid, spec.freqs, spec.pulse, x, e,
                                          {d / std::sqrt(2.0), d / std::sqrt(2.0)});
      const bool collocated = pairs[m].tx == pairs[m].rx;
      // Exact case: collocated pair and no decollocation offset.
      const bool pass = d == 0.0 && collocated ? rep.max_rel_error <= 1e-8 : rep.max_phase_deviation <= rep.phase_bound;
      ok = ok && pass;
      csv += fmt::format("{},{},{},{},{},{}\n", m, format_double(d), format_double(rep.max_phase_deviation),
                         format_double(rep.phase_bound), format_double(rep.max_rel_error), pass ? 1 : 0);
      fmt::print("{:>4} {:>12.4e} {:>14.6e} {:>14.6e} {:>14.6e} {}\n", m, d, rep.max_phase_deviation, rep.phase_bound,
                 rep.max_rel_error, pass ? "ok" : "FAIL");
    }
  }
  if (!out.empty()) write_file_atomic(fs::path(out) / "prop1.csv", csv);
  return ok ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-domain radar autofocus: simulation, reconstruction and evaluation"};
  app.require_subcommand(1);
  std::string config, out, in, method = "proposed", truth, scenario;
  std::vector<std::string> recs;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<int> shift{1, -1};
  int max_shift = 4, thresholds = 200;

  auto* sim = app.add_subcommand("simulate", "Simulate a scene and write measurements");
  sim->add_option("--config", config, "YAML run configuration")->required();
  sim->add_option("--out", out, "Output directory")->required();
  sim->add_option("--seed-override", seed, "Replace the configured seed");
  sim->add_option("--threads", threads, "Worker threads");

  auto* rec = app.add_subcommand("reconstruct", "Reconstruct an image from simulated measurements");
  rec->add_option("--in", in, "Directory written by simulate")->required();
  rec->add_option("--config", config, "YAML run configuration")->required();
  rec->add_option("--method", method, "proposed | baseline | no-autofocus | oracle-positions")
      ->check(CLI::IsMember({"proposed", "baseline", "no-autofocus", "oracle-positions"}));
  rec->add_option("--out", out, "Output directory")->required();
  rec->add_option("--seed-override", seed, "Replace the configured seed");
  rec->add_option("--threads", threads, "Worker threads");

  auto* ev = app.add_subcommand("evaluate", "Score reconstructions against the simulated truth");
  ev->add_option("--rec", recs, "Reconstruction directories")->required();
  ev->add_option("--truth", truth, "Directory written by simulate")->required();
  ev->add_option("--out", out, "Output directory")->required();
  ev->add_option("--scenario", scenario, "Scenario label (default: truth directory name)");
  ev->add_option("--max-shift", max_shift, "Largest global shift searched during alignment")->check(CLI::NonNegativeNumber);
  ev->add_option("--thresholds", thresholds, "ROC threshold count")->check(CLI::Range(2, 100000));

  auto* p1 = app.add_subcommand("check-prop1", "Sweep the decollocation offset and check the phase bound");
  p1->add_option("--config", config, "YAML run configuration")->required();
  p1->add_option("--shift", shift, "On-grid error in pixels: dx dy")->expected(2);
  p1->add_option("--out", out, "Optional output directory for prop1.csv");

  auto* schema = app.add_subcommand("schema", "Print every configuration key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*schema) {
      std::cout << config_schema();
      return kOk;
    }
    if (*sim) return cmd_simulate(load(config, seed, threads), out);
    if (*rec) return cmd_reconstruct(load(config, seed, threads), in, method, out);
    if (*ev) return cmd_evaluate(recs, truth, out, scenario, max_shift, thresholds);
    if (*p1) return cmd_check_prop1(load(config, std::nullopt, std::nullopt), {shift[0], shift[1]}, out);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const YAML::Exception& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kIo;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kIo;
  } catch (const std::ios_base::failure& e) {
    fmt::print(stderr, "io error: {}\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNumerical;
  }
  return kOk;
}
