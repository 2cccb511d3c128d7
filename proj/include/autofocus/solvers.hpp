#pragma once

// Block-coordinate-descent autofocus: alternating accelerated updates of the
// image (projected onto a fused-Lasso ball) and of the per-pair shift kernels.

#include "autofocus/forward.hpp"
#include "autofocus/regularizers.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace autofocus {

using OperatorPtr = std::shared_ptr<const ImagingOperator>;

struct SolverConfig {
  double mu = 0.07;
  double gamma = 0.5;
  double sigma = 0.0;
  int inner_iters = 10;
  int max_outer = 100;
  double stall_tol = 1e-5;
  int stall_window = 3;
  int n_h = 7;
  /// Stationary phases (tau updates from frozen residuals) before stopping.
  int max_tau_phases = 2;
  /// Stop early once a tau update changes tau by less than this fraction.
  double tau_tol = 1e-3;
  bool momentum_restart = true;
  int threads = 1;
  /// Inner projections only need the fpgd accuracy R(x) <= tau + 1e-4 max(1, tau).
  ProjectionOptions projection{.tol = 1e-4};

  void validate() const;
};

/// Per-call record of an inner solver: data fidelity of each accepted iterate.
struct InnerTrace {
  std::vector<double> fidelity;
  int restarts = 0;
  int rejections = 0;

  /// True when fidelity never rises by more than `slack` (relative) between accepted iterates.
  bool non_increasing(double slack = 1e-10) const;
};

struct FistaHResult {
  RVec h;
  InnerTrace trace;
  double alpha = 0.0;
  bool guard_triggered = false;
};

/// Non-negative, unit-sum FISTA for one kernel given the current image.
FistaHResult fista_h(const CompositeOperatorH& op, const CVec& y, const RVec& h_init, double mu, int iters,
                     bool momentum_restart = true);

struct TauUpdate {
  double tau = 0.0;
  double increment = 0.0;
  /// Polar denominator vanished; tau_star returned unchanged.
  bool degenerate = false;
};

/// tau = tau_star + (sum ||r||^2 - sigma sqrt(sum ||r||^2)) / R_x^o(sum A_x^H r), clamped at 0.
TauUpdate compute_tau(const std::vector<CVec>& residuals, const std::vector<CompositeOperatorX>& ops,
                      double gamma, double sigma, double tau_star, GridShape shape, int threads = 1);

struct FpgdOptions {
  /// Step size; computed from the spectral norm of sum A^H A when absent.
  std::optional<double> alpha;
  bool momentum_restart = true;
  int threads = 1;
  ProjectionOptions projection{.tol = 1e-4};
};

struct FpgdResult {
  CVec x;
  InnerTrace trace;
  double alpha = 0.0;
};

/// Accelerated projected gradient on sum_m 1/2 ||y_m - A_x^m x||^2 s.t. R_x(x) <= tau.
FpgdResult fpgd_x(const std::vector<CompositeOperatorX>& ops, const std::vector<CVec>& y, const CVec& x_init,
                  double gamma, double tau, int iters, GridShape shape, const FpgdOptions& opts = {});

/// Largest eigenvalue of sum_m A_x^mH A_x^m.
double stacked_lipschitz(const std::vector<CompositeOperatorX>& ops, Index dim, int threads = 1);

/// sum_m 1/2 ||y_m - A_x^m x||^2.
double data_fidelity(const std::vector<CompositeOperatorX>& ops, const std::vector<CVec>& y, const CVec& x,
                     int threads = 1);

struct OuterRecord {
  int iteration = 0;
  int phase = 0;
  double tau = 0.0;
  double fidelity_x = 0.0;  // after the image update
  double fidelity = 0.0;    // after the kernel update
  double penalty_x = 0.0;
  std::vector<double> penalty_h;
  std::vector<PixelOffset> kernel_offsets;
  double x_change = 0.0;
  int restarts = 0;
  int rejections = 0;
};

struct BcdResult {
  CVec x;
  std::vector<ShiftKernel> kernels;
  std::vector<RVec> kernels_tilde;
  std::vector<double> tau_history;
  std::vector<double> tau_star_history;
  std::vector<OuterRecord> records;
  /// All inner traces in execution order (fpgd then per-m fista each outer iteration).
  std::vector<InnerTrace> inner_traces;
  int outer_iterations = 0;
  int degenerate_kernel_events = 0;
  bool converged = false;
  std::string stop_reason;
};

using OuterCallback = std::function<void(const OuterRecord&)>;

/// Joint recovery of the image and the shift kernels from measurements taken
/// with the assumed imaging operators.
BcdResult bcd_autofocus(const MeasurementSet& measurements, const std::vector<OperatorPtr>& assumed_ops,
                        const GridShape& shape, const SolverConfig& config, const OuterCallback& on_outer = {});

/// Fused-Lasso reconstruction with identity kernels held fixed (no autofocus).
BcdResult fused_lasso_reconstruct(const MeasurementSet& measurements, const std::vector<OperatorPtr>& ops,
                                  const GridShape& shape, const SolverConfig& config,
                                  const OuterCallback& on_outer = {});

// --- Measurement-domain baseline ---------------------------------------------

enum class GainModel {
  /// Unconstrained per-frequency least-squares gain.
  per_frequency,
  /// Complex gain times a pure delay (a time-domain shift kernel).
  delay,
};

struct BaselineOptions {
  GainModel gain_model = GainModel::per_frequency;
  int outer_iters = 50;
  int inner_iters = 20;
  /// Delay search range (seconds) and grid size for the delay model.
  double max_delay = 1e-9;
  int delay_samples = 2001;
  /// One gain set per scan position instead of one per pair.
  bool per_position = true;
  int threads = 1;
};

struct BaselineResult {
  CVec x;
  std::vector<CVec> gains;
  /// Per pair and scan position (delay model only), in seconds.
  std::vector<double> delays;
};

/// Per-frequency least-squares gains: g = y conj(Ax) / (|Ax|^2 + eps), eps = 1e-8 max |Ax|^2.
/// With period > 0, samples k and k + period share one gain (sums pooled over blocks).
CVec estimate_gains_per_frequency(const CVec& y, const CVec& ax, Index period = 0);
/// Best single delay and complex gain with y ~ g exp(-i w tau) Ax, found by a
/// dense search over the cross-spectrum then refined by golden section. y may hold
/// several consecutive blocks of freqs.size() samples that share the delay.
std::pair<CVec, double> estimate_gains_delay(const CVec& y, const CVec& ax, const FrequencyGrid& freqs,
                                             double max_delay, int samples);

/// Alternating minimization of sum ||y_m - D_{g_m} A_m x||^2 + lambda ||x||_1 with
/// lambda = sparsity_weight * ||sum_m A_m^H y_m||_inf. Gains are estimated per scan position.
BaselineResult baseline_measurement_domain(const MeasurementSet& measurements,
                                           const std::vector<OperatorPtr>& ops, double sparsity_weight,
                                           const BaselineOptions& opts = {});

}  // namespace autofocus
