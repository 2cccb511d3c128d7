#include "autofocus/solvers.hpp"

#include "autofocus/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace autofocus {

namespace {

constexpr double kDescentSlack = 1e-10;

bool increased(double value, double previous) {
  return value > previous + kDescentSlack * std::abs(previous);
}

template <typename Vec>
Vec sum_in_order(const std::vector<Vec>& parts, Index dim) {
  Vec total = Vec::Zero(dim);
  for (const auto& p : parts) total += p;
  return total;
}

std::vector<CompositeOperatorX> make_x_operators(const std::vector<OperatorPtr>& ops,
                                                 const std::vector<ShiftKernel>& kernels) {
  std::vector<CompositeOperatorX> out;
  out.reserve(ops.size());
  for (std::size_t m = 0; m < ops.size(); ++m) out.emplace_back(ops[m], kernels[m]);
  return out;
}

CVec stacked_gradient(const std::vector<CompositeOperatorX>& ops, const std::vector<CVec>& y, const CVec& x,
                      int threads) {
  std::vector<CVec> parts(ops.size());
  parallel_for(static_cast<int>(ops.size()), threads,
               [&](int m) { parts[m] = ops[m].adjoint(CVec(y[m] - ops[m].apply(x))); });
  return sum_in_order(parts, x.size());
}

}  // namespace

void SolverConfig::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("solver: mu must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("solver: gamma must be non-negative");
  if (!(sigma >= 0.0)) throw std::invalid_argument("solver: sigma must be non-negative");
  if (inner_iters < 1) throw std::invalid_argument("solver: inner_iters must be at least 1");
  if (max_outer < 1) throw std::invalid_argument("solver: max_outer must be at least 1");
  if (!(stall_tol > 0.0)) throw std::invalid_argument("solver: stall_tol must be positive");
  if (stall_window < 1) throw std::invalid_argument("solver: stall_window must be at least 1");
  if (n_h < 1 || n_h % 2 == 0) throw std::invalid_argument("solver: n_h must be odd and positive");
  if (max_tau_phases < 1) throw std::invalid_argument("solver: max_tau_phases must be at least 1");
  if (!(tau_tol >= 0.0)) throw std::invalid_argument("solver: tau_tol must be non-negative");
  if (threads < 1) throw std::invalid_argument("solver: threads must be at least 1");
}

bool InnerTrace::non_increasing(double slack) const {
  for (std::size_t i = 1; i < fidelity.size(); ++i)
    if (fidelity[i] > fidelity[i - 1] + slack * std::abs(fidelity[i - 1])) return false;
  return true;
}

// --- kernel block ------------------------------------------------------------

FistaHResult fista_h(const CompositeOperatorH& op, const CVec& y, const RVec& h_init, double mu, int iters,
                     bool momentum_restart) {
  if (h_init.size() != op.domain_size()) throw DimensionMismatch("fista_h: kernel size mismatch");
  if (!(mu > 0.0)) throw std::invalid_argument("fista_h: mu must be positive");
  if (iters < 1) throw std::invalid_argument("fista_h: iters must be at least 1");

  FistaHResult res;
  res.h = h_init;
  auto fidelity = [&](const RVec& h) { return 0.5 * (y - op.apply(h)).squaredNorm(); };
  const double lip = power_iteration_norm(
      std::function<RVec(const RVec&)>([&](const RVec& v) { return op.adjoint_real(op.apply(v)); }),
      op.domain_size());
  double d_prev = fidelity(h_init);
  res.trace.fidelity.push_back(d_prev);
  if (!(lip > 0.0)) return res;
  res.alpha = 1.0 / lip;

  double mu_eff = mu;
  // Returns false when thresholding removed all mass.
  auto step = [&](const RVec& from, RVec& out) {
    const RVec z = from + res.alpha * op.adjoint_real(CVec(y - op.apply(from)));
    out = nn_soft_threshold(z, res.alpha * mu_eff);
    const double total = out.sum();
    if (!(total > 0.0)) return false;
    out /= total;
    return true;
  };

  RVec u_prev = h_init;
  RVec s = h_init;
  double q = 1.0;
  bool momentum = false;
  for (int t = 0; t < iters; ++t) {
    RVec u;
    if (!step(s, u)) {
      res.guard_triggered = true;
      mu_eff *= 0.5;
      u = u_prev;
    }
    double d_u = fidelity(u);
    if (momentum_restart && increased(d_u, d_prev)) {
      if (momentum) {
        ++res.trace.restarts;
        q = 1.0;
        if (!step(u_prev, u)) {
          res.guard_triggered = true;
          mu_eff *= 0.5;
          u = u_prev;
        }
        d_u = fidelity(u);
      }
      if (increased(d_u, d_prev)) {
        ++res.trace.rejections;
        break;
      }
    }
    const double q_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q));
    const double beta = (q - 1.0) / q_next;
    s = u + beta * (u - u_prev);
    momentum = beta != 0.0;
    q = q_next;
    u_prev = std::move(u);
    d_prev = d_u;
    res.trace.fidelity.push_back(d_u);
  }
  res.h = u_prev;
  return res;
}

// --- tau schedule ------------------------------------------------------------

TauUpdate compute_tau(const std::vector<CVec>& residuals, const std::vector<CompositeOperatorX>& ops,
                      double gamma, double sigma, double tau_star, GridShape shape, int threads) {
  if (residuals.size() != ops.size()) throw DimensionMismatch("compute_tau: residual/operator count mismatch");
  double sumsq = 0.0;
  for (const auto& r : residuals) sumsq += r.squaredNorm();
  if (!std::isfinite(sumsq)) throw std::invalid_argument("compute_tau: non-finite residual");

  std::vector<CVec> parts(ops.size());
  parallel_for(static_cast<int>(ops.size()), threads, [&](int m) { parts[m] = ops[m].adjoint(residuals[m]); });
  const CVec g = sum_in_order(parts, shape.size());
  const double denom = polar_fused_lasso(g, gamma, shape);

  TauUpdate out;
  if (!(denom > 0.0)) {
    out.tau = tau_star;
    out.degenerate = true;
    return out;
  }
  out.increment = (sumsq - sigma * std::sqrt(sumsq)) / denom;
  out.tau = std::max(0.0, tau_star + out.increment);
  return out;
}

// --- image block -------------------------------------------------------------

double stacked_lipschitz(const std::vector<CompositeOperatorX>& ops, Index dim, int threads) {
  return power_iteration_norm(std::function<CVec(const CVec&)>([&](const CVec& v) {
                                std::vector<CVec> parts(ops.size());
                                parallel_for(static_cast<int>(ops.size()), threads,
                                             [&](int m) { parts[m] = ops[m].adjoint(ops[m].apply(v)); });
                                return sum_in_order(parts, dim);
                              }),
                              dim);
}

double data_fidelity(const std::vector<CompositeOperatorX>& ops, const std::vector<CVec>& y, const CVec& x,
                     int threads) {
  if (ops.size() != y.size()) throw DimensionMismatch("data_fidelity: operator/measurement count mismatch");
  std::vector<double> parts(ops.size());
  parallel_for(static_cast<int>(ops.size()), threads,
               [&](int m) { parts[m] = 0.5 * (y[m] - ops[m].apply(x)).squaredNorm(); });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

FpgdResult fpgd_x(const std::vector<CompositeOperatorX>& ops, const std::vector<CVec>& y, const CVec& x_init,
                  double gamma, double tau, int iters, GridShape shape, const FpgdOptions& opts) {
  if (!(tau >= 0.0)) throw std::invalid_argument("fpgd_x: tau must be non-negative");
  if (iters < 1) throw std::invalid_argument("fpgd_x: iters must be at least 1");
  if (ops.size() != y.size()) throw DimensionMismatch("fpgd_x: operator/measurement count mismatch");
  if (x_init.size() != shape.size()) throw DimensionMismatch("fpgd_x: image size mismatch");

  FpgdResult res;
  const int threads = opts.threads;
  res.alpha = opts.alpha ? *opts.alpha : 0.0;
  if (!opts.alpha) {
    const double lip = stacked_lipschitz(ops, shape.size(), threads);
    res.alpha = lip > 0.0 ? 1.0 / lip : 0.0;
  }
  if (tau == 0.0) {
    res.x = CVec::Zero(shape.size());
    res.trace.fidelity.push_back(data_fidelity(ops, y, res.x, threads));
    return res;
  }

  auto project = [&](const CVec& z) { return proj_fused_lasso(z, gamma, tau, shape, opts.projection); };
  const double slack = opts.projection.tol * std::max(1.0, tau);
  CVec u_prev = fused_lasso_value(x_init, gamma, shape) <= tau + slack ? x_init : project(x_init);
  double d_prev = data_fidelity(ops, y, u_prev, threads);
  res.trace.fidelity.push_back(d_prev);
  if (!(res.alpha > 0.0)) {
    res.x = u_prev;
    return res;
  }

  auto step = [&](const CVec& from) {
    return project(CVec(from + res.alpha * stacked_gradient(ops, y, from, threads)));
  };

  CVec s = u_prev;
  double q = 1.0;
  bool momentum = false;
  for (int t = 0; t < iters; ++t) {
    CVec u = step(s);
    double d_u = data_fidelity(ops, y, u, threads);
    if (opts.momentum_restart && increased(d_u, d_prev)) {
      if (momentum) {
        ++res.trace.restarts;
        q = 1.0;
        u = step(u_prev);
        d_u = data_fidelity(ops, y, u, threads);
      }
      if (increased(d_u, d_prev)) {
        ++res.trace.rejections;
        break;
      }
    }
    const double q_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q * q));
    const double beta = (q - 1.0) / q_next;
    s = u + beta * (u - u_prev);
    momentum = beta != 0.0;
    q = q_next;
    u_prev = std::move(u);
    d_prev = d_u;
    res.trace.fidelity.push_back(d_u);
  }
  res.x = std::move(u_prev);
  return res;
}

// --- block coordinate descent ------------------------------------------------

namespace {

double relative_change(const CVec& next, const CVec& prev) {
  const double diff = (next - prev).norm();
  if (diff == 0.0) return 0.0;
  return diff / std::max(next.norm(), prev.norm());
}

std::vector<CVec> residuals_of(const std::vector<CompositeOperatorX>& ops, const std::vector<CVec>& y,
                               const CVec& x, int threads) {
  std::vector<CVec> r(ops.size());
  parallel_for(static_cast<int>(ops.size()), threads, [&](int m) { r[m] = y[m] - ops[m].apply(x); });
  return r;
}

BcdResult run_bcd(const MeasurementSet& meas, const std::vector<OperatorPtr>& ops, const GridShape& shape,
                  const SolverConfig& cfg, bool update_kernels, const OuterCallback& on_outer) {
  cfg.validate();
  meas.validate();
  const int M = meas.size();
  if (static_cast<int>(ops.size()) != M) throw DimensionMismatch("bcd: operator count differs from pair count");
  for (int m = 0; m < M; ++m) {
    if (!ops[m]) throw std::invalid_argument("bcd: null operator");
    if (ops[m]->rows() != meas.y[m].size() || ops[m]->cols() != shape.size())
      throw DimensionMismatch("bcd: operator " + std::to_string(m) + " does not match data or grid");
  }
  const int threads = cfg.threads;
  const int n_h = cfg.n_h;

  BcdResult res;
  res.x = CVec::Zero(shape.size());
  res.kernels.assign(M, ShiftKernel::identity(n_h));
  res.kernels_tilde.assign(M, ShiftKernel::identity(n_h).values());

  FpgdOptions fopts;
  fopts.momentum_restart = cfg.momentum_restart;
  fopts.threads = threads;
  fopts.projection = cfg.projection;

  std::vector<CVec> residuals = meas.y;
  double tau_star = 0.0;
  double tau = 0.0;
  bool need_tau = true;
  int phase = 1;
  int stall_count = 0;
  res.stop_reason = "max_outer";

  for (int j = 1; j <= cfg.max_outer; ++j) {
    OuterRecord rec;
    rec.iteration = j;
    try {
      auto ops_x = make_x_operators(ops, res.kernels);
      if (need_tau) {
        const TauUpdate upd = compute_tau(residuals, ops_x, cfg.gamma, cfg.sigma, tau_star, shape, threads);
        tau = upd.tau;
        need_tau = false;
      }
      res.tau_history.push_back(tau);

      FpgdResult fp = fpgd_x(ops_x, meas.y, res.x, cfg.gamma, tau, cfg.inner_iters, shape, fopts);
      rec.x_change = relative_change(fp.x, res.x);
      rec.restarts += fp.trace.restarts;
      rec.rejections += fp.trace.rejections;
      rec.fidelity_x = fp.trace.fidelity.back();
      res.x = std::move(fp.x);
      res.inner_traces.push_back(std::move(fp.trace));

      bool kernels_changed = false;
      if (update_kernels) {
        std::vector<FistaHResult> fh(M);
        parallel_for(M, threads, [&](int m) {
          const CompositeOperatorH op_h(ops[m], res.x, n_h);
          fh[m] = fista_h(op_h, meas.y[m], res.kernels_tilde[m], cfg.mu, cfg.inner_iters, cfg.momentum_restart);
        });
        for (int m = 0; m < M; ++m) {
          res.kernels_tilde[m] = std::move(fh[m].h);
          ShiftProjection proj = shift_projector_P(res.kernels_tilde[m], n_h);
          if (proj.degenerate) ++res.degenerate_kernel_events;
          if (proj.kernel.values() != res.kernels[m].values()) kernels_changed = true;
          res.kernels[m] = std::move(proj.kernel);
          rec.restarts += fh[m].trace.restarts;
          rec.rejections += fh[m].trace.rejections;
          res.inner_traces.push_back(std::move(fh[m].trace));
        }
        ops_x = make_x_operators(ops, res.kernels);
      }

      rec.phase = phase;
      rec.tau = tau;
      rec.fidelity = update_kernels ? data_fidelity(ops_x, meas.y, res.x, threads) : rec.fidelity_x;
      rec.penalty_x = fused_lasso_value(res.x, cfg.gamma, shape);
      for (int m = 0; m < M; ++m) {
        rec.penalty_h.push_back(res.kernels_tilde[m].lpNorm<1>());
        rec.kernel_offsets.push_back(res.kernels[m].one_sparse_offset().value_or(PixelOffset{}));
      }
      res.outer_iterations = j;

      stall_count = (rec.x_change < cfg.stall_tol && !kernels_changed) ? stall_count + 1 : 0;
      const bool stalled = stall_count >= cfg.stall_window;
      res.records.push_back(rec);
      if (on_outer) on_outer(rec);
      if (!stalled) continue;

      res.tau_star_history.push_back(tau);
      if (phase >= cfg.max_tau_phases) {
        res.converged = true;
        res.stop_reason = "stationary";
        break;
      }
      residuals = residuals_of(ops_x, meas.y, res.x, threads);
      const TauUpdate upd = compute_tau(residuals, ops_x, cfg.gamma, cfg.sigma, tau, shape, threads);
      if (upd.degenerate || std::abs(upd.tau - tau) <= cfg.tau_tol * std::max(tau, 1e-300)) {
        res.converged = true;
        res.stop_reason = "tau_converged";
        break;
      }
      tau_star = tau;
      tau = upd.tau;
      ++phase;
      stall_count = 0;
    } catch (const std::exception& e) {
      throw std::runtime_error("outer iteration " + std::to_string(j) + ": " + e.what());
    }
  }
  return res;
}

}  // namespace

BcdResult bcd_autofocus(const MeasurementSet& measurements, const std::vector<OperatorPtr>& assumed_ops,
                        const GridShape& shape, const SolverConfig& config, const OuterCallback& on_outer) {
  return run_bcd(measurements, assumed_ops, shape, config, true, on_outer);
}

BcdResult fused_lasso_reconstruct(const MeasurementSet& measurements, const std::vector<OperatorPtr>& ops,
                                  const GridShape& shape, const SolverConfig& config,
                                  const OuterCallback& on_outer) {
  return run_bcd(measurements, ops, shape, config, false, on_outer);
}

}  // namespace autofocus
