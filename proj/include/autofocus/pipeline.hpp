#pragma once

// End-to-end steps shared by the command-line tool and the acceptance suite:
// simulation to disk, reconstruction by method, and evaluation against truth.

#include "autofocus/config.hpp"
#include "autofocus/evaluate.hpp"
#include "autofocus/io.hpp"
#include "autofocus/simulate.hpp"
#include "autofocus/solvers.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace autofocus {

enum class Method { proposed, baseline, no_autofocus, oracle_positions };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct MethodResult {
  Method method = Method::proposed;
  CVec x;
  /// Proposed method only.
  std::optional<BcdResult> bcd;
  std::optional<BaselineResult> baseline;
  double sigma = 0.0;
  double seconds = 0.0;
};

/// Runs one method on measurements using the config's grid, pulse and solver settings.
/// oracle-positions images with the true antenna positions and fixed identity kernels.
MethodResult run_method(Method method, const MeasurementSet& meas, const RunConfig& cfg);

struct EvaluationRow {
  std::string method;
  PixelOffset shift;
  double auc = 0.0;
  double rel_l2 = 0.0;
  double f1 = 0.0;
  RocCurve roc;
  CVec aligned;
};

EvaluationRow evaluate_reconstruction(const std::string& method, const CVec& x_rec, const CVec& x_true,
                                      GridShape shape, const OutputConfig& out);

/// Writes scene.csv, measurements.csv, geometry.csv, config.yaml and manifest.json (plus scene.pgm).
void write_simulation(const std::filesystem::path& dir, const Simulation& sim, const RunConfig& cfg);

struct StoredSimulation {
  MeasurementSet measurements;
  SpatialGrid grid;
  CVec truth;
  std::vector<PixelOffset> true_kernel_offsets;
  nlohmann::json manifest;
};

StoredSimulation read_simulation(const std::filesystem::path& dir);

/// Writes image.csv/.pgm, kernels CSVs (proposed) and run_log.json.
void write_reconstruction(const std::filesystem::path& dir, const MethodResult& res, const RunConfig& cfg,
                          const nlohmann::json& source_manifest);

}  // namespace autofocus
