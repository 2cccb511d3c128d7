#include "autofocus/simulate.hpp"

#include "autofocus/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace autofocus {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kPerturbStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kLayoutStream = 3;

Point2 uniform_in_disc(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = std::sqrt(u(rng));
  const double phi = 2.0 * kPi * u(rng);
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

std::vector<Target> draw_targets(const SpatialGrid& grid, int count, double min_amplitude, double max_amplitude,
                                 int boundary_band, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("target count must be non-negative");
  if (!(min_amplitude >= 0.0) || !(max_amplitude >= min_amplitude))
    throw std::invalid_argument("target amplitude range is invalid");
  const int wx = grid.nx() - 2 * boundary_band;
  const int wy = grid.ny() - 2 * boundary_band;
  if (wx <= 0 || wy <= 0 || static_cast<long>(wx) * wy < count)
    throw std::invalid_argument("not enough interior pixels for " + std::to_string(count) + " targets");
  auto rng = make_rng(seed, kLayoutStream);
  std::uniform_int_distribution<int> ux(0, wx - 1), uy(0, wy - 1);
  std::uniform_real_distribution<double> ua(min_amplitude, max_amplitude);
  std::vector<bool> used(static_cast<std::size_t>(grid.size()), false);
  std::vector<Target> out;
  while (static_cast<int>(out.size()) < count) {
    const int ix = boundary_band + ux(rng);
    const int iy = boundary_band + uy(rng);
    const Index l = grid.index(ix, iy);
    if (used[static_cast<std::size_t>(l)]) continue;
    used[static_cast<std::size_t>(l)] = true;
    out.push_back({grid.point(l), cplx(ua(rng), 0.0)});
  }
  return out;
}

std::vector<AntennaPair> flatten_pairs(const std::vector<AntennaArray>& arrays) {
  std::vector<AntennaPair> out;
  for (const auto& a : arrays) out.insert(out.end(), a.pairs.begin(), a.pairs.end());
  return out;
}

PerturbationResult perturb_antennas(const std::vector<AntennaArray>& arrays, const PerturbationSpec& spec,
                                    const PulseSpec& pulse, double spacing, std::uint64_t seed) {
  if (!(spec.scale_lambda >= 0.0)) throw std::invalid_argument("perturbation scale must be non-negative");
  if (spec.max_pixels < 0) throw std::invalid_argument("perturbation max_pixels must be non-negative");
  if (!(spec.decollocation >= 0.0)) throw std::invalid_argument("decollocation must be non-negative");

  PerturbationResult res;
  res.arrays = arrays;
  const double lambda = pulse.center_wavelength();

  // Physical antennas are identified by their assumed position.
  auto key = [](Point2 p) { return std::pair<double, double>{p.x, p.y}; };
  std::map<std::pair<double, double>, std::size_t> antenna_index;
  std::vector<Point2> antennas;
  for (const auto& a : arrays)
    for (const auto& p : a.pairs)
      for (Point2 pos : {p.tx, p.rx})
        if (antenna_index.emplace(key(pos), antennas.size()).second) antennas.push_back(pos);

  auto rng = make_rng(seed, kPerturbStream);
  std::vector<Point2> err(antennas.size());
  for (auto& e : err) e = uniform_in_disc(rng);
  double mean = 0.0;
  for (const auto& e : err) mean += norm(e);
  mean = err.empty() ? 0.0 : mean / err.size();
  const double scale = mean > 0.0 ? spec.scale_lambda * lambda / mean : 0.0;

  std::vector<PixelOffset> pix(err.size());
  if (!spec.fixed_pixels.empty()) {
    if (spec.fixed_pixels.size() != err.size())
      throw std::invalid_argument("fixed_pixels needs one entry per antenna (" + std::to_string(err.size()) + ")");
    for (std::size_t i = 0; i < err.size(); ++i) {
      pix[i] = spec.fixed_pixels[i];
      err[i] = {pix[i].dx * spacing, pix[i].dy * spacing};
    }
  }
  for (std::size_t i = 0; i < err.size() && spec.fixed_pixels.empty(); ++i) {
    err[i] = scale * err[i];
    if (spec.on_grid) {
      auto snap = [&](double v) {
        const long k = std::lround(v / spacing);
        return static_cast<int>(std::clamp<long>(k, -spec.max_pixels, spec.max_pixels));
      };
      pix[i] = {snap(err[i].x), snap(err[i].y)};
      err[i] = {pix[i].dx * spacing, pix[i].dy * spacing};
    }
  }

  double total = 0.0;
  for (auto& a : res.arrays) {
    for (auto& p : a.pairs) {
      const std::size_t it = antenna_index.at(key(p.tx));
      const std::size_t ir = antenna_index.at(key(p.rx));
      p.tx_true = p.tx + err[it];
      p.rx_true = p.rx + err[ir];
      if (it == ir && spec.decollocation > 0.0) {
        std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
        const double phi = u(rng);
        p.rx_true = p.rx_true + Point2{spec.decollocation * std::cos(phi), spec.decollocation * std::sin(phi)};
      }
      res.errors.push_back(err[it]);
      res.pixel_errors.push_back(pix[it]);
    }
  }
  for (const auto& e : err) {
    total += norm(e);
    res.max_error_lambda = std::max(res.max_error_lambda, norm(e) / lambda);
  }
  res.mean_error_lambda = err.empty() ? 0.0 : total / err.size() / lambda;
  return res;
}

std::vector<std::shared_ptr<const ImagingOperator>> build_operators(const std::vector<AntennaPair>& pairs,
                                                                    const SpatialGrid& grid,
                                                                    const FrequencyGrid& freqs,
                                                                    const PulseSpec& pulse, bool use_true_positions,
                                                                    Attenuation attenuation, int threads) {
  std::vector<std::shared_ptr<const ImagingOperator>> ops(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int m) {
    ops[m] = std::make_shared<const ImagingOperator>(
        build_imaging_operator(pairs[m], grid, freqs, pulse, use_true_positions, attenuation));
  });
  return ops;
}

Simulation simulate_measurements(const ExperimentSpec& spec) {
  if (spec.psnr_db && !std::isfinite(*spec.psnr_db)) throw std::invalid_argument("psnr_db must be finite");
  Simulation sim;
  sim.truth = place_targets(spec.grid, spec.targets, spec.boundary_band);
  sim.perturbation = perturb_antennas(spec.arrays, spec.perturbation, spec.pulse, spec.grid.spacing(), spec.seed);

  MeasurementSet& meas = sim.measurements;
  meas.pairs = flatten_pairs(sim.perturbation.arrays);
  meas.freqs = spec.freqs;
  const auto true_ops = build_operators(meas.pairs, spec.grid, spec.freqs, spec.pulse, true, spec.attenuation);

  const int M = static_cast<int>(meas.pairs.size());
  sim.clean.resize(M);
  double peak = 0.0;
  for (int m = 0; m < M; ++m) {
    sim.clean[m] = true_ops[m]->apply(sim.truth.values);
    if (sim.clean[m].size()) peak = std::max(peak, sim.clean[m].cwiseAbs2().maxCoeff());
  }

  sim.noise.resize(M);
  Index samples = 0;
  for (int m = 0; m < M; ++m) {
    sim.noise[m] = CVec::Zero(sim.clean[m].size());
    samples += sim.clean[m].size();
  }
  if (spec.psnr_db) {
    sim.noise_variance = peak / std::pow(10.0, *spec.psnr_db / 10.0);
    auto rng = make_rng(spec.seed, kNoiseStream);
    std::normal_distribution<double> gauss(0.0, std::sqrt(sim.noise_variance / 2.0));
    for (int m = 0; m < M; ++m)
      for (Index k = 0; k < sim.noise[m].size(); ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        sim.noise[m][k] = {re, im};
      }
  }

  double noise_energy = 0.0;
  meas.y.resize(M);
  for (int m = 0; m < M; ++m) {
    meas.y[m] = sim.clean[m] + sim.noise[m];
    noise_energy += sim.noise[m].squaredNorm();
  }
  meas.noise_sigma = std::sqrt(noise_energy);
  if (spec.psnr_db && noise_energy > 0.0) {
    const double mean_power = noise_energy / static_cast<double>(samples);
    sim.achieved_psnr_db = 10.0 * std::log10(peak / mean_power);
  }

  for (const auto& e : sim.perturbation.pixel_errors) sim.true_kernel_offsets.push_back(-e);
  return sim;
}

}  // namespace autofocus
