#pragma once

// Synthetic experiments: scenes, antenna perturbations and noisy measurements.

#include "autofocus/forward.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace autofocus {

struct AntennaArray {
  std::string name;
  std::vector<AntennaPair> pairs;
};

struct PerturbationSpec {
  /// Mean position error in wavelengths of the center frequency.
  double scale_lambda = 0.0;
  /// Snap errors to whole pixels (clamped to +-max_pixels per axis).
  bool on_grid = false;
  int max_pixels = 3;
  /// Length (m) of an extra random receiver offset d for collocated pairs.
  double decollocation = 0.0;
  /// Explicit per-antenna errors in pixels (in order of first appearance); replaces the draw.
  std::vector<PixelOffset> fixed_pixels;
};

struct ExperimentSpec {
  SpatialGrid grid{{0.0, 0.0}, 0.0125, 16, 16};
  std::vector<Target> targets;
  int boundary_band = 3;
  std::vector<AntennaArray> arrays;
  PulseSpec pulse;
  FrequencyGrid freqs{1e9, 10e9, 30e6};
  std::optional<double> psnr_db;
  std::uint64_t seed = 0;
  PerturbationSpec perturbation;
  Attenuation attenuation = Attenuation::unit;
};

/// Independent generator for (seed, stream); streams separate experiment cells.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

/// `count` distinct on-grid targets outside the boundary band with amplitudes
/// uniform in [min_amplitude, max_amplitude].
std::vector<Target> draw_targets(const SpatialGrid& grid, int count, double min_amplitude, double max_amplitude,
                                 int boundary_band, std::uint64_t seed);

struct PerturbationResult {
  std::vector<AntennaArray> arrays;
  /// Per pair (flattened over arrays): transmitter error in meters.
  std::vector<Point2> errors;
  /// Per pair: error in whole pixels when on_grid is set.
  std::vector<PixelOffset> pixel_errors;
  double mean_error_lambda = 0.0;
  double max_error_lambda = 0.0;
};

/// Draws uniform-in-disc errors rescaled to a mean of scale_lambda * lambda_c.
/// Collocated pairs share one error; other pairs draw one per antenna.
PerturbationResult perturb_antennas(const std::vector<AntennaArray>& arrays, const PerturbationSpec& spec,
                                    const PulseSpec& pulse, double spacing, std::uint64_t seed);

struct Simulation {
  ReflectivityImage truth;
  MeasurementSet measurements;
  std::vector<CVec> clean;
  std::vector<CVec> noise;
  PerturbationResult perturbation;
  /// Kernel offset that reproduces each pair's error in the image domain (on-grid, collocated).
  std::vector<PixelOffset> true_kernel_offsets;
  /// Per complex sample noise variance and the resulting empirical PSNR.
  double noise_variance = 0.0;
  std::optional<double> achieved_psnr_db;
};

/// y_m = A~_m x + n_m with A~_m at the perturbed positions.
Simulation simulate_measurements(const ExperimentSpec& spec);

/// All pairs of the experiment in array order.
std::vector<AntennaPair> flatten_pairs(const std::vector<AntennaArray>& arrays);

/// Operators at the assumed (or true) positions for each pair.
std::vector<std::shared_ptr<const ImagingOperator>> build_operators(const std::vector<AntennaPair>& pairs,
                                                                    const SpatialGrid& grid,
                                                                    const FrequencyGrid& freqs,
                                                                    const PulseSpec& pulse, bool use_true_positions,
                                                                    Attenuation attenuation, int threads = 1);

}  // namespace autofocus
