#include "autofocus/pipeline.hpp"

#include <chrono>
#include <stdexcept>

namespace autofocus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json point_json(Point2 p) { return json::array({p.x, p.y}); }
json offset_json(PixelOffset o) { return json::array({o.dx, o.dy}); }

json grid_json(const SpatialGrid& g) {
  return {{"nx", g.nx()}, {"ny", g.ny()}, {"spacing", g.spacing()}, {"origin", point_json(g.origin())}};
}

json trace_summary(const std::vector<InnerTrace>& traces) {
  int restarts = 0, rejections = 0;
  bool monotone = true;
  for (const auto& t : traces) {
    restarts += t.restarts;
    rejections += t.rejections;
    monotone = monotone && t.non_increasing();
  }
  return {{"inner_solves", traces.size()}, {"restarts", restarts}, {"rejections", rejections},
          {"fidelity_non_increasing", monotone}};
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "proposed") return Method::proposed;
  if (name == "baseline") return Method::baseline;
  if (name == "no-autofocus") return Method::no_autofocus;
  if (name == "oracle-positions") return Method::oracle_positions;
  throw ConfigError("unknown method '" + name + "' (proposed, baseline, no-autofocus, oracle-positions)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::baseline: return "baseline";
    case Method::no_autofocus: return "no-autofocus";
    case Method::oracle_positions: return "oracle-positions";
  }
  return "unknown";
}

MethodResult run_method(Method method, const MeasurementSet& meas, const RunConfig& cfg) {
  meas.validate();
  const ExperimentSpec& x = cfg.experiment;
  if (meas.freqs.size() != x.freqs.size() || meas.freqs.f_min() != x.freqs.f_min() ||
      meas.freqs.step() != x.freqs.step())
    throw DimensionMismatch("measurement frequencies differ from the configured frequency grid");
  const int threads = cfg.solver.threads;
  const auto ops = build_operators(meas.pairs, x.grid, meas.freqs, x.pulse, method == Method::oracle_positions,
                                   x.attenuation, threads);
  std::vector<OperatorPtr> base(ops.begin(), ops.end());

  MethodResult res;
  res.method = method;
  SolverConfig sc = cfg.solver;
  if (!cfg.sigma_explicit) sc.sigma = cfg.sigma_scale * meas.noise_sigma;
  res.sigma = sc.sigma;

  const auto t0 = std::chrono::steady_clock::now();
  switch (method) {
    case Method::proposed:
      res.bcd = bcd_autofocus(meas, base, x.grid.shape(), sc);
      res.x = res.bcd->x;
      break;
    case Method::no_autofocus:
    case Method::oracle_positions:
      res.bcd = fused_lasso_reconstruct(meas, base, x.grid.shape(), sc);
      res.x = res.bcd->x;
      break;
    case Method::baseline: {
      BaselineOptions bo;
      bo.gain_model = cfg.baseline.gain_model;
      bo.per_position = cfg.baseline.per_position;
      bo.outer_iters = cfg.baseline.outer_iters;
      bo.inner_iters = cfg.baseline.inner_iters;
      bo.max_delay = cfg.baseline.max_delay;
      bo.delay_samples = cfg.baseline.delay_samples;
      bo.threads = threads;
      res.baseline = baseline_measurement_domain(meas, base, cfg.baseline.sparsity_weight, bo);
      res.x = res.baseline->x;
      break;
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!res.x.allFinite()) throw std::runtime_error(method_name(method) + ": reconstruction is not finite");
  return res;
}

EvaluationRow evaluate_reconstruction(const std::string& method, const CVec& x_rec, const CVec& x_true,
                                      GridShape shape, const OutputConfig& out) {
  EvaluationRow row;
  row.method = method;
  const Alignment al = align_global_shift(x_rec, x_true, shape, out.align_max_shift);
  row.shift = al.offset;
  row.aligned = al.aligned;
  row.roc = roc_curve(al.aligned, support_mask(x_true), shape, out.roc_thresholds);
  row.auc = row.roc.auc;
  const Metrics m = image_metrics(al.aligned, x_true);
  row.rel_l2 = m.rel_l2;
  row.f1 = m.support_f1;
  return row;
}

void write_simulation(const fs::path& dir, const Simulation& sim, const RunConfig& cfg) {
  const ExperimentSpec spec = cfg.resolved_experiment();
  const GridShape shape = spec.grid.shape();
  const std::string scene = image_csv(sim.truth.values, shape);
  const std::string meas = measurements_csv(sim.measurements);
  const std::string geom = geometry_csv(sim.measurements.pairs);
  const std::string config = dump_config(cfg);
  write_file_atomic(dir / "scene.csv", scene);
  write_file_atomic(dir / "measurements.csv", meas);
  write_file_atomic(dir / "geometry.csv", geom);
  write_file_atomic(dir / "config.yaml", config);
  if (cfg.output.write_pgm) write_file_atomic(dir / "scene.pgm", pgm_image(sim.truth.values, shape));

  json m;
  m["command"] = "simulate";
  m["seed"] = spec.seed;
  m["grid"] = grid_json(spec.grid);
  m["N"] = spec.grid.size();
  m["F"] = spec.freqs.size();
  m["M"] = sim.measurements.size();
  m["frequencies"] = {{"f_min", spec.freqs.f_min()}, {"step", spec.freqs.step()}, {"count", spec.freqs.size()}};
  json positions = json::array();
  for (const auto& p : sim.measurements.pairs) positions.push_back(p.positions());
  m["positions_per_pair"] = positions;
  m["targets"] = sim.truth.nonzeros();
  json noise;
  noise["psnr_db"] = spec.psnr_db ? json(*spec.psnr_db) : json(nullptr);
  noise["noise_variance"] = sim.noise_variance;
  noise["noise_sigma"] = sim.measurements.noise_sigma;
  noise["achieved_psnr_db"] = sim.achieved_psnr_db ? json(*sim.achieved_psnr_db) : json(nullptr);
  m["noise"] = noise;
  json pert;
  pert["mean_error_lambda"] = sim.perturbation.mean_error_lambda;
  pert["max_error_lambda"] = sim.perturbation.max_error_lambda;
  json errs = json::array(), pix = json::array(), kern = json::array();
  for (const auto& e : sim.perturbation.errors) errs.push_back(point_json(e));
  for (const auto& e : sim.perturbation.pixel_errors) pix.push_back(offset_json(e));
  for (const auto& o : sim.true_kernel_offsets) kern.push_back(offset_json(o));
  pert["errors_m"] = errs;
  pert["pixel_errors"] = pix;
  m["perturbation"] = pert;
  m["true_kernel_offsets"] = kern;
  m["files"] = {{"scene.csv", fnv1a_hex(scene)},
                {"measurements.csv", fnv1a_hex(meas)},
                {"geometry.csv", fnv1a_hex(geom)},
                {"config.yaml", fnv1a_hex(config)}};
  write_json(dir / "manifest.json", m);
}

StoredSimulation read_simulation(const fs::path& dir) {
  StoredSimulation s;
  s.manifest = read_json(dir / "manifest.json");
  try {
    const json& g = s.manifest.at("grid");
    s.grid = SpatialGrid({g.at("origin").at(0).get<double>(), g.at("origin").at(1).get<double>()},
                         g.at("spacing").get<double>(), g.at("nx").get<int>(), g.at("ny").get<int>());
    const json& f = s.manifest.at("frequencies");
    s.measurements.freqs =
        FrequencyGrid::from_count(f.at("f_min").get<double>(), f.at("step").get<double>(), f.at("count").get<int>());
    s.measurements.noise_sigma = s.manifest.at("noise").at("noise_sigma").get<double>();
    for (const auto& o : s.manifest.at("true_kernel_offsets"))
      s.true_kernel_offsets.push_back({o.at(0).get<int>(), o.at(1).get<int>()});
  } catch (const json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  s.measurements.pairs = parse_geometry_csv(read_file(dir / "geometry.csv"));
  parse_measurements_csv(read_file(dir / "measurements.csv"), s.measurements);
  s.truth = parse_image_csv(read_file(dir / "scene.csv"), s.grid.shape());
  return s;
}

void write_reconstruction(const fs::path& dir, const MethodResult& res, const RunConfig& cfg,
                          const json& source_manifest) {
  const GridShape shape = cfg.experiment.grid.shape();
  write_file_atomic(dir / "image.csv", image_csv(res.x, shape));
  if (cfg.output.write_pgm) write_file_atomic(dir / "image.pgm", pgm_image(res.x, shape));

  json log;
  log["command"] = "reconstruct";
  log["method"] = method_name(res.method);
  log["seed"] = source_manifest.contains("seed") ? source_manifest["seed"] : json(nullptr);
  log["grid"] = grid_json(cfg.experiment.grid);
  log["sigma"] = res.sigma;
  log["seconds"] = res.seconds;
  if (res.bcd) {
    const BcdResult& b = *res.bcd;
    if (res.method == Method::proposed) {
      write_file_atomic(dir / "kernels.csv", kernels_csv(b.kernels));
      std::vector<ShiftKernel> tilde;
      for (const auto& h : b.kernels_tilde) tilde.emplace_back(cfg.solver.n_h, h);
      write_file_atomic(dir / "kernels_tilde.csv", kernels_csv(tilde));
      json offs = json::array();
      for (const auto& k : b.kernels) {
        const auto o = k.one_sparse_offset();
        offs.push_back(o ? offset_json(*o) : json(nullptr));
      }
      log["kernel_offsets"] = offs;
    }
    log["stop_reason"] = b.stop_reason;
    log["converged"] = b.converged;
    log["outer_iterations"] = b.outer_iterations;
    log["tau_history"] = b.tau_history;
    log["tau_star_history"] = b.tau_star_history;
    log["degenerate_kernel_events"] = b.degenerate_kernel_events;
    log["inner_traces"] = trace_summary(b.inner_traces);
    json recs = json::array();
    for (const auto& r : b.records) {
      json offs = json::array();
      for (const auto& o : r.kernel_offsets) offs.push_back(offset_json(o));
      recs.push_back({{"iteration", r.iteration},
                      {"phase", r.phase},
                      {"tau", r.tau},
                      {"fidelity_x", r.fidelity_x},
                      {"fidelity", r.fidelity},
                      {"penalty_x", r.penalty_x},
                      {"x_change", r.x_change},
                      {"restarts", r.restarts},
                      {"rejections", r.rejections},
                      {"kernel_offsets", offs}});
    }
    log["records"] = recs;
  }
  if (res.baseline) log["baseline_delays_s"] = res.baseline->delays;
  write_json(dir / "run_log.json", log);
}

}  // namespace autofocus
