#include "autofocus/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace autofocus {

namespace {

std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& path, const std::string& msg) {
  throw ConfigError(path + where(n) + ": " + msg);
}

void check_keys(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(map, path, "expected a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, path, "unknown key '" + key + "'");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool present(const YAML::Node& map, const char* key) {
  const YAML::Node v = map[key];
  return v && !v.IsNull();
}

template <class T>
T convert(const YAML::Node& v, const std::string& path) {
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    fail(v, path, "invalid value '" + (v.IsScalar() ? v.Scalar() : std::string("<non-scalar>")) + "'");
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& path) {
  if (present(map, key)) out = convert<T>(map[key], join(path, key));
}

Point2 read_point(const YAML::Node& v, const std::string& path) {
  if (!v.IsSequence() || v.size() != 2) fail(v, path, "expected [x, y]");
  return {convert<double>(v[0], path), convert<double>(v[1], path)};
}

PixelOffset read_offset(const YAML::Node& v, const std::string& path) {
  if (!v.IsSequence() || v.size() != 2) fail(v, path, "expected [dx, dy]");
  return {convert<int>(v[0], path), convert<int>(v[1], path)};
}

void require(bool ok, const YAML::Node& n, const std::string& path, const std::string& msg) {
  if (!ok) fail(n, path, msg);
}

std::vector<Point2> aperture_offsets(const YAML::Node& ap, Point2 center, const std::string& path) {
  check_keys(ap, path, {"count", "half_width", "direction", "offsets"});
  if (present(ap, "offsets")) {
    if (present(ap, "count") || present(ap, "half_width"))
      fail(ap, path, "give either offsets or count/half_width");
    std::vector<Point2> out;
    const YAML::Node list = ap["offsets"];
    if (!list.IsSequence()) fail(list, join(path, "offsets"), "expected a list of [x, y]");
    for (const auto& o : list) out.push_back(read_point(o, join(path, "offsets")));
    return out;
  }
  int count = 1;
  double half = 0.0;
  read(ap, "count", count, path);
  read(ap, "half_width", half, path);
  require(count >= 1, ap, join(path, "count"), "must be at least 1");
  require(half >= 0.0, ap, join(path, "half_width"), "must be non-negative");
  Point2 dir;
  if (present(ap, "direction")) {
    dir = read_point(ap["direction"], join(path, "direction"));
  } else {
    // Tangential to the scene center.
    dir = {-center.y, center.x};
  }
  const double len = norm(dir);
  require(len > 0.0, ap, join(path, "direction"), "scan direction is undefined");
  dir = (1.0 / len) * dir;
  if (count == 1) return {};
  std::vector<Point2> out;
  for (int k = 0; k < count; ++k) out.push_back((-half + 2.0 * half * k / (count - 1)) * dir);
  return out;
}

AntennaPair read_pair(const YAML::Node& n, const std::string& path, const YAML::Node& aperture) {
  check_keys(n, path, {"tx", "rx"});
  if (!present(n, "tx")) fail(n, path, "missing tx");
  AntennaPair p;
  p.tx = read_point(n["tx"], join(path, "tx"));
  p.rx = present(n, "rx") ? read_point(n["rx"], join(path, "rx")) : p.tx;
  p.tx_true = p.tx;
  p.rx_true = p.rx;
  if (aperture && !aperture.IsNull()) p.aperture = aperture_offsets(aperture, 0.5 * (p.tx + p.rx), join(path, "aperture"));
  return p;
}

Attenuation parse_attenuation(const YAML::Node& v, const std::string& path) {
  const auto s = convert<std::string>(v, path);
  if (s == "unit") return Attenuation::unit;
  if (s == "free_space") return Attenuation::free_space;
  fail(v, path, "expected unit or free_space");
}

GainModel parse_gain_model(const YAML::Node& v, const std::string& path) {
  const auto s = convert<std::string>(v, path);
  if (s == "per_frequency") return GainModel::per_frequency;
  if (s == "delay") return GainModel::delay;
  fail(v, path, "expected per_frequency or delay");
}

void parse_grid(const YAML::Node& g, RunConfig& cfg) {
  const std::string path = "grid";
  check_keys(g, path, {"nx", "ny", "spacing", "origin"});
  const SpatialGrid& d = cfg.experiment.grid;
  int nx = d.nx(), ny = d.ny();
  double spacing = d.spacing();
  read(g, "nx", nx, path);
  read(g, "ny", ny, path);
  read(g, "spacing", spacing, path);
  require(nx >= 1 && ny >= 1, g, path, "nx and ny must be positive");
  require(spacing > 0.0 && std::isfinite(spacing), g, join(path, "spacing"), "must be positive");
  Point2 origin{-0.5 * (nx - 1) * spacing, -0.5 * (ny - 1) * spacing};
  if (present(g, "origin")) origin = read_point(g["origin"], join(path, "origin"));
  cfg.experiment.grid = SpatialGrid(origin, spacing, nx, ny);
}

void parse_pulse(const YAML::Node& p, RunConfig& cfg) {
  const std::string path = "pulse";
  check_keys(p, path, {"f_center", "bandwidth", "kind"});
  read(p, "f_center", cfg.experiment.pulse.f_center, path);
  read(p, "bandwidth", cfg.experiment.pulse.bandwidth, path);
  if (present(p, "kind") && convert<std::string>(p["kind"], join(path, "kind")) != "differential_gaussian")
    fail(p["kind"], join(path, "kind"), "only differential_gaussian is supported");
  require(cfg.experiment.pulse.f_center > 0.0, p, join(path, "f_center"), "must be positive");
  require(cfg.experiment.pulse.bandwidth > 0.0, p, join(path, "bandwidth"), "must be positive");
}

void parse_frequencies(const YAML::Node& f, RunConfig& cfg) {
  const std::string path = "frequencies";
  check_keys(f, path, {"f_min", "f_max", "step", "count"});
  const FrequencyGrid& d = cfg.experiment.freqs;
  double f_min = d.f_min(), f_max = d.f_max(), step = d.step();
  read(f, "f_min", f_min, path);
  read(f, "f_max", f_max, path);
  read(f, "step", step, path);
  require(f_min > 0.0 && step > 0.0, f, path, "f_min and step must be positive");
  try {
    if (present(f, "count")) {
      if (present(f, "f_max")) fail(f, path, "give either f_max or count");
      const int count = convert<int>(f["count"], join(path, "count"));
      require(count >= 1, f, join(path, "count"), "must be at least 1");
      cfg.experiment.freqs = FrequencyGrid::from_count(f_min, step, count);
    } else {
      cfg.experiment.freqs = FrequencyGrid(f_min, f_max, step);
    }
  } catch (const std::invalid_argument& e) {
    fail(f, path, e.what());
  }
}

void parse_arrays(const YAML::Node& a, RunConfig& cfg) {
  const std::string path = "arrays";
  check_keys(a, path, {"attenuation", "perturbation", "list", "ring"});
  if (present(a, "attenuation")) cfg.experiment.attenuation = parse_attenuation(a["attenuation"], join(path, "attenuation"));
  if (present(a, "perturbation")) {
    const YAML::Node p = a["perturbation"];
    const std::string pp = join(path, "perturbation");
    check_keys(p, pp, {"scale_lambda", "on_grid", "max_pixels", "decollocation", "fixed_pixels"});
    PerturbationSpec& s = cfg.experiment.perturbation;
    read(p, "scale_lambda", s.scale_lambda, pp);
    read(p, "on_grid", s.on_grid, pp);
    read(p, "max_pixels", s.max_pixels, pp);
    read(p, "decollocation", s.decollocation, pp);
    require(s.scale_lambda >= 0.0, p, join(pp, "scale_lambda"), "must be non-negative");
    require(s.max_pixels >= 0, p, join(pp, "max_pixels"), "must be non-negative");
    require(s.decollocation >= 0.0, p, join(pp, "decollocation"), "must be non-negative");
    s.fixed_pixels.clear();
    if (present(p, "fixed_pixels")) {
      const YAML::Node list = p["fixed_pixels"];
      if (!list.IsSequence()) fail(list, join(pp, "fixed_pixels"), "expected a list of [dx, dy]");
      for (const auto& o : list) s.fixed_pixels.push_back(read_offset(o, join(pp, "fixed_pixels")));
    }
  }
  cfg.experiment.arrays.clear();
  int next_id = 0;
  if (present(a, "list")) {
    const YAML::Node list = a["list"];
    if (!list.IsSequence()) fail(list, join(path, "list"), "expected a list of arrays");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const YAML::Node arr = list[i];
      const std::string ap = join(path, "list[" + std::to_string(i) + "]");
      check_keys(arr, ap, {"name", "pairs", "aperture"});
      AntennaArray out;
      out.name = "array" + std::to_string(i);
      read(arr, "name", out.name, ap);
      if (!present(arr, "pairs") || !arr["pairs"].IsSequence()) fail(arr, ap, "missing pairs list");
      for (std::size_t k = 0; k < arr["pairs"].size(); ++k) {
        AntennaPair p = read_pair(arr["pairs"][k], join(ap, "pairs[" + std::to_string(k) + "]"), arr["aperture"]);
        p.id = next_id++;
        out.pairs.push_back(p);
      }
      cfg.experiment.arrays.push_back(std::move(out));
    }
  }
  if (present(a, "ring")) {
    const YAML::Node r = a["ring"];
    const std::string rp = join(path, "ring");
    check_keys(r, rp, {"count", "radius", "phase", "aperture"});
    int count = 4;
    double radius = 0.3, phase = 0.0;
    read(r, "count", count, rp);
    read(r, "radius", radius, rp);
    read(r, "phase", phase, rp);
    require(count >= 1, r, join(rp, "count"), "must be at least 1");
    require(radius > 0.0, r, join(rp, "radius"), "must be positive");
    for (int g = 0; g < count; ++g) {
      const double t = phase + 2.0 * kPi * g / count;
      AntennaArray out;
      out.name = "ring" + std::to_string(g);
      AntennaPair p;
      p.tx = p.rx = p.tx_true = p.rx_true = Point2{radius * std::cos(t), radius * std::sin(t)};
      if (present(r, "aperture")) p.aperture = aperture_offsets(r["aperture"], p.tx, join(rp, "aperture"));
      p.id = next_id++;
      out.pairs.push_back(p);
      cfg.experiment.arrays.push_back(std::move(out));
    }
  }
}

void parse_targets(const YAML::Node& t, RunConfig& cfg) {
  const std::string path = "targets";
  check_keys(t, path, {"boundary_band", "points", "pixels", "random"});
  read(t, "boundary_band", cfg.experiment.boundary_band, path);
  require(cfg.experiment.boundary_band >= 0, t, join(path, "boundary_band"), "must be non-negative");
  cfg.experiment.targets.clear();
  if (present(t, "points")) {
    const YAML::Node list = t["points"];
    if (!list.IsSequence()) fail(list, join(path, "points"), "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string tp = join(path, "points[" + std::to_string(i) + "]");
      check_keys(list[i], tp, {"position", "amplitude", "phase"});
      if (!present(list[i], "position")) fail(list[i], tp, "missing position");
      double amp = 1.0, ph = 0.0;
      read(list[i], "amplitude", amp, tp);
      read(list[i], "phase", ph, tp);
      cfg.experiment.targets.push_back({read_point(list[i]["position"], join(tp, "position")), std::polar(amp, ph)});
    }
  }
  if (present(t, "pixels")) {
    const YAML::Node list = t["pixels"];
    if (!list.IsSequence()) fail(list, join(path, "pixels"), "expected a list");
    const SpatialGrid& g = cfg.experiment.grid;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string tp = join(path, "pixels[" + std::to_string(i) + "]");
      check_keys(list[i], tp, {"ix", "iy", "amplitude", "phase"});
      if (!present(list[i], "ix") || !present(list[i], "iy")) fail(list[i], tp, "missing ix or iy");
      const int ix = convert<int>(list[i]["ix"], join(tp, "ix"));
      const int iy = convert<int>(list[i]["iy"], join(tp, "iy"));
      require(ix >= 0 && ix < g.nx() && iy >= 0 && iy < g.ny(), list[i], tp, "pixel outside the grid");
      double amp = 1.0, ph = 0.0;
      read(list[i], "amplitude", amp, tp);
      read(list[i], "phase", ph, tp);
      cfg.experiment.targets.push_back({g.point(g.index(ix, iy)), std::polar(amp, ph)});
    }
  }
  cfg.random_targets.reset();
  if (present(t, "random")) {
    const YAML::Node r = t["random"];
    const std::string rp = join(path, "random");
    check_keys(r, rp, {"count", "min_amplitude", "max_amplitude", "layout_seed"});
    RandomTargets rt;
    read(r, "count", rt.count, rp);
    read(r, "min_amplitude", rt.min_amplitude, rp);
    read(r, "max_amplitude", rt.max_amplitude, rp);
    if (present(r, "layout_seed")) rt.layout_seed = convert<std::uint64_t>(r["layout_seed"], join(rp, "layout_seed"));
    require(rt.count >= 0, r, join(rp, "count"), "must be non-negative");
    require(rt.min_amplitude >= 0.0 && rt.max_amplitude >= rt.min_amplitude, r, rp, "invalid amplitude range");
    cfg.random_targets = rt;
  }
}

void parse_noise(const YAML::Node& n, RunConfig& cfg) {
  const std::string path = "noise";
  check_keys(n, path, {"psnr_db"});
  cfg.experiment.psnr_db.reset();
  if (present(n, "psnr_db")) {
    const double v = convert<double>(n["psnr_db"], join(path, "psnr_db"));
    require(std::isfinite(v), n, join(path, "psnr_db"), "must be finite");
    cfg.experiment.psnr_db = v;
  }
}

void parse_solver(const YAML::Node& s, RunConfig& cfg) {
  const std::string path = "solver";
  check_keys(s, path,
             {"mu", "gamma", "sigma", "sigma_scale", "inner_iters", "max_outer", "stall_tol", "stall_window", "n_h",
              "max_tau_phases", "tau_tol", "momentum_restart", "threads", "projection", "baseline"});
  SolverConfig& c = cfg.solver;
  read(s, "mu", c.mu, path);
  read(s, "gamma", c.gamma, path);
  cfg.sigma_explicit = present(s, "sigma");
  read(s, "sigma", c.sigma, path);
  read(s, "sigma_scale", cfg.sigma_scale, path);
  read(s, "inner_iters", c.inner_iters, path);
  read(s, "max_outer", c.max_outer, path);
  read(s, "stall_tol", c.stall_tol, path);
  read(s, "stall_window", c.stall_window, path);
  read(s, "n_h", c.n_h, path);
  read(s, "max_tau_phases", c.max_tau_phases, path);
  read(s, "tau_tol", c.tau_tol, path);
  read(s, "momentum_restart", c.momentum_restart, path);
  read(s, "threads", c.threads, path);
  require(cfg.sigma_scale >= 0.0, s, join(path, "sigma_scale"), "must be non-negative");
  if (present(s, "projection")) {
    const YAML::Node p = s["projection"];
    const std::string pp = join(path, "projection");
    check_keys(p, pp, {"max_newton", "tol", "support_threshold", "tv"});
    read(p, "max_newton", c.projection.max_newton, pp);
    read(p, "tol", c.projection.tol, pp);
    read(p, "support_threshold", c.projection.support_threshold, pp);
    if (present(p, "tv")) {
      const YAML::Node t = p["tv"];
      const std::string tp = join(pp, "tv");
      check_keys(t, tp, {"rho", "max_iters", "tol", "balance_rho"});
      read(t, "rho", c.projection.tv.rho, tp);
      read(t, "max_iters", c.projection.tv.max_iters, tp);
      read(t, "tol", c.projection.tv.tol, tp);
      read(t, "balance_rho", c.projection.tv.balance_rho, tp);
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail(s, path, e.what());
  }
  if (present(s, "baseline")) {
    const YAML::Node b = s["baseline"];
    const std::string bp = join(path, "baseline");
    check_keys(b, bp,
               {"gain_model", "per_position", "sparsity_weight", "outer_iters", "inner_iters", "max_delay",
                "delay_samples"});
    BaselineConfig& bc = cfg.baseline;
    if (present(b, "gain_model")) bc.gain_model = parse_gain_model(b["gain_model"], join(bp, "gain_model"));
    read(b, "per_position", bc.per_position, bp);
    read(b, "sparsity_weight", bc.sparsity_weight, bp);
    read(b, "outer_iters", bc.outer_iters, bp);
    read(b, "inner_iters", bc.inner_iters, bp);
    read(b, "max_delay", bc.max_delay, bp);
    read(b, "delay_samples", bc.delay_samples, bp);
    require(bc.sparsity_weight >= 0.0, b, join(bp, "sparsity_weight"), "must be non-negative");
    require(bc.outer_iters >= 1 && bc.inner_iters >= 1, b, bp, "iteration counts must be positive");
    require(bc.max_delay > 0.0 && bc.delay_samples >= 2, b, bp, "invalid delay search grid");
  }
}

void parse_output(const YAML::Node& o, RunConfig& cfg) {
  const std::string path = "output";
  check_keys(o, path, {"write_pgm", "write_svg", "roc_thresholds", "align_max_shift"});
  read(o, "write_pgm", cfg.output.write_pgm, path);
  read(o, "write_svg", cfg.output.write_svg, path);
  read(o, "roc_thresholds", cfg.output.roc_thresholds, path);
  read(o, "align_max_shift", cfg.output.align_max_shift, path);
  require(cfg.output.roc_thresholds >= 2, o, join(path, "roc_thresholds"), "must be at least 2");
  require(cfg.output.align_max_shift >= 0, o, join(path, "align_max_shift"), "must be non-negative");
}

/// Shortest text that parses back to the same double.
std::string num(double v) { return fmt::format("{}", v); }

void emit_point(YAML::Emitter& e, Point2 p) { e << YAML::Flow << YAML::BeginSeq << num(p.x) << num(p.y) << YAML::EndSeq; }

const char* name(Attenuation a) { return a == Attenuation::unit ? "unit" : "free_space"; }
const char* name(GainModel g) { return g == GainModel::per_frequency ? "per_frequency" : "delay"; }

}  // namespace

ExperimentSpec RunConfig::resolved_experiment() const {
  ExperimentSpec spec = experiment;
  spec.seed = seed;
  if (random_targets) {
    const auto drawn = draw_targets(spec.grid, random_targets->count, random_targets->min_amplitude,
                                    random_targets->max_amplitude, spec.boundary_band,
                                    random_targets->layout_seed.value_or(seed));
    spec.targets.insert(spec.targets.end(), drawn.begin(), drawn.end());
  }
  return spec;
}

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  RunConfig cfg;
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root, "config",
             {"seed", "grid", "pulse", "frequencies", "arrays", "targets", "noise", "solver", "output"});
  read(root, "seed", cfg.seed, "");
  // Grid first: pixel targets depend on it.
  parse_grid(present(root, "grid") ? root["grid"] : YAML::Node(YAML::NodeType::Map), cfg);
  if (present(root, "pulse")) parse_pulse(root["pulse"], cfg);
  if (present(root, "frequencies")) parse_frequencies(root["frequencies"], cfg);
  if (present(root, "arrays")) parse_arrays(root["arrays"], cfg);
  if (present(root, "targets")) parse_targets(root["targets"], cfg);
  if (present(root, "noise")) parse_noise(root["noise"], cfg);
  if (present(root, "solver")) parse_solver(root["solver"], cfg);
  if (present(root, "output")) parse_output(root["output"], cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump_config(const RunConfig& cfg) {
  const ExperimentSpec& x = cfg.experiment;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;

  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "nx" << YAML::Value << x.grid.nx();
  e << YAML::Key << "ny" << YAML::Value << x.grid.ny();
  e << YAML::Key << "spacing" << YAML::Value << num(x.grid.spacing());
  e << YAML::Key << "origin" << YAML::Value;
  emit_point(e, x.grid.origin());
  e << YAML::EndMap;

  e << YAML::Key << "pulse" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "f_center" << YAML::Value << num(x.pulse.f_center);
  e << YAML::Key << "bandwidth" << YAML::Value << num(x.pulse.bandwidth);
  e << YAML::Key << "kind" << YAML::Value << "differential_gaussian";
  e << YAML::EndMap;

  e << YAML::Key << "frequencies" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "f_min" << YAML::Value << num(x.freqs.f_min());
  e << YAML::Key << "step" << YAML::Value << num(x.freqs.step());
  e << YAML::Key << "count" << YAML::Value << x.freqs.size();
  e << YAML::EndMap;

  e << YAML::Key << "arrays" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "attenuation" << YAML::Value << name(x.attenuation);
  e << YAML::Key << "perturbation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "scale_lambda" << YAML::Value << num(x.perturbation.scale_lambda);
  e << YAML::Key << "on_grid" << YAML::Value << x.perturbation.on_grid;
  e << YAML::Key << "max_pixels" << YAML::Value << x.perturbation.max_pixels;
  e << YAML::Key << "decollocation" << YAML::Value << num(x.perturbation.decollocation);
  e << YAML::Key << "fixed_pixels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& o : x.perturbation.fixed_pixels) e << YAML::Flow << YAML::BeginSeq << o.dx << o.dy << YAML::EndSeq;
  e << YAML::EndSeq << YAML::EndMap;
  e << YAML::Key << "list" << YAML::Value << YAML::BeginSeq;
  for (const auto& arr : x.arrays) {
    // Pairs of one array may carry different apertures; emit one array entry per aperture run.
    std::size_t i = 0;
    int part = 0;
    while (i < arr.pairs.size()) {
      std::size_t j = i;
      while (j < arr.pairs.size() && arr.pairs[j].aperture == arr.pairs[i].aperture) ++j;
      e << YAML::BeginMap;
      e << YAML::Key << "name" << YAML::Value << (part == 0 ? arr.name : arr.name + "_" + std::to_string(part));
      if (!arr.pairs[i].aperture.empty()) {
        e << YAML::Key << "aperture" << YAML::Value << YAML::BeginMap << YAML::Key << "offsets" << YAML::Value
          << YAML::BeginSeq;
        for (const auto& o : arr.pairs[i].aperture) emit_point(e, o);
        e << YAML::EndSeq << YAML::EndMap;
      }
      e << YAML::Key << "pairs" << YAML::Value << YAML::BeginSeq;
      for (std::size_t k = i; k < j; ++k) {
        e << YAML::BeginMap << YAML::Key << "tx" << YAML::Value;
        emit_point(e, arr.pairs[k].tx);
        e << YAML::Key << "rx" << YAML::Value;
        emit_point(e, arr.pairs[k].rx);
        e << YAML::EndMap;
      }
      e << YAML::EndSeq << YAML::EndMap;
      i = j;
      ++part;
    }
  }
  e << YAML::EndSeq << YAML::EndMap;

  e << YAML::Key << "targets" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "boundary_band" << YAML::Value << x.boundary_band;
  e << YAML::Key << "points" << YAML::Value << YAML::BeginSeq;
  for (const auto& t : x.targets) {
    e << YAML::BeginMap << YAML::Key << "position" << YAML::Value;
    emit_point(e, t.position);
    e << YAML::Key << "amplitude" << YAML::Value << num(std::abs(t.amplitude));
    e << YAML::Key << "phase" << YAML::Value << num(std::arg(t.amplitude));
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  if (cfg.random_targets) {
    e << YAML::Key << "random" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "count" << YAML::Value << cfg.random_targets->count;
    e << YAML::Key << "min_amplitude" << YAML::Value << num(cfg.random_targets->min_amplitude);
    e << YAML::Key << "max_amplitude" << YAML::Value << num(cfg.random_targets->max_amplitude);
    e << YAML::Key << "layout_seed" << YAML::Value;
    if (cfg.random_targets->layout_seed)
      e << *cfg.random_targets->layout_seed;
    else
      e << YAML::Null;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  e << YAML::Key << "noise" << YAML::Value << YAML::BeginMap << YAML::Key << "psnr_db" << YAML::Value;
  if (x.psnr_db)
    e << num(*x.psnr_db);
  else
    e << YAML::Null;
  e << YAML::EndMap;

  const SolverConfig& s = cfg.solver;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mu" << YAML::Value << num(s.mu);
  e << YAML::Key << "gamma" << YAML::Value << num(s.gamma);
  e << YAML::Key << "sigma" << YAML::Value;
  if (cfg.sigma_explicit)
    e << num(s.sigma);
  else
    e << YAML::Null;
  e << YAML::Key << "sigma_scale" << YAML::Value << num(cfg.sigma_scale);
  e << YAML::Key << "inner_iters" << YAML::Value << s.inner_iters;
  e << YAML::Key << "max_outer" << YAML::Value << s.max_outer;
  e << YAML::Key << "stall_tol" << YAML::Value << num(s.stall_tol);
  e << YAML::Key << "stall_window" << YAML::Value << s.stall_window;
  e << YAML::Key << "n_h" << YAML::Value << s.n_h;
  e << YAML::Key << "max_tau_phases" << YAML::Value << s.max_tau_phases;
  e << YAML::Key << "tau_tol" << YAML::Value << num(s.tau_tol);
  e << YAML::Key << "momentum_restart" << YAML::Value << s.momentum_restart;
  e << YAML::Key << "threads" << YAML::Value << s.threads;
  e << YAML::Key << "projection" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "max_newton" << YAML::Value << s.projection.max_newton;
  e << YAML::Key << "tol" << YAML::Value << num(s.projection.tol);
  e << YAML::Key << "support_threshold" << YAML::Value << num(s.projection.support_threshold);
  e << YAML::Key << "tv" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "rho" << YAML::Value << num(s.projection.tv.rho);
  e << YAML::Key << "max_iters" << YAML::Value << s.projection.tv.max_iters;
  e << YAML::Key << "tol" << YAML::Value << num(s.projection.tv.tol);
  e << YAML::Key << "balance_rho" << YAML::Value << s.projection.tv.balance_rho;
  e << YAML::EndMap << YAML::EndMap;
  const BaselineConfig& b = cfg.baseline;
  e << YAML::Key << "baseline" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "gain_model" << YAML::Value << name(b.gain_model);
  e << YAML::Key << "per_position" << YAML::Value << b.per_position;
  e << YAML::Key << "sparsity_weight" << YAML::Value << num(b.sparsity_weight);
  e << YAML::Key << "outer_iters" << YAML::Value << b.outer_iters;
  e << YAML::Key << "inner_iters" << YAML::Value << b.inner_iters;
  e << YAML::Key << "max_delay" << YAML::Value << num(b.max_delay);
  e << YAML::Key << "delay_samples" << YAML::Value << b.delay_samples;
  e << YAML::EndMap << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "write_pgm" << YAML::Value << cfg.output.write_pgm;
  e << YAML::Key << "write_svg" << YAML::Value << cfg.output.write_svg;
  e << YAML::Key << "roc_thresholds" << YAML::Value << cfg.output.roc_thresholds;
  e << YAML::Key << "align_max_shift" << YAML::Value << cfg.output.align_max_shift;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_schema() {
  RunConfig cfg = parse_config("");
  AntennaPair p;
  p.tx = p.rx = p.tx_true = p.rx_true = {0.0, -0.3};
  p.aperture = {{-0.15, 0.0}, {0.15, 0.0}};
  cfg.experiment.arrays = {{"example", {p}}};
  cfg.experiment.targets = {{cfg.experiment.grid.point(cfg.experiment.grid.index(5, 6)), {1.0, 0.0}}};
  cfg.random_targets = RandomTargets{};
  std::string out =
      "# Defaults for every key. Alternatives: grid.origin may be omitted (centered grid);\n"
      "# frequencies.f_max may replace count; arrays.ring {count, radius, phase, aperture} adds one\n"
      "# collocated pair per ring position; aperture may be {count, half_width, direction};\n"
      "# targets.pixels [{ix, iy, amplitude, phase}] places targets by pixel index.\n";
  return out + dump_config(cfg);
}

}  // namespace autofocus
