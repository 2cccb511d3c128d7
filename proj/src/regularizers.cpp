#include "autofocus/regularizers.hpp"

#include "autofocus/fft2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autofocus {

void FusedLassoParams::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be finite and >= 0");
}

RVec GradientField::group_norms() const {
  const Index n = shape.size();
  RVec g(n);
  for (Index j = 0; j < n; ++j) g[j] = std::sqrt(std::norm(s[j]) + std::norm(s[n + j]));
  return g;
}

// --- Thresholding --------------------------------------------------------------

CVec soft_threshold(const CVec& z, double beta) {
  if (beta < 0.0) throw std::invalid_argument("threshold must be >= 0");
  CVec out(z.size());
  for (Index j = 0; j < z.size(); ++j) {
    const double mag = std::abs(z[j]);
    out[j] = mag > beta ? z[j] * (1.0 - beta / mag) : cplx{};
  }
  return out;
}

RVec soft_threshold(const RVec& z, double beta) {
  if (beta < 0.0) throw std::invalid_argument("threshold must be >= 0");
  RVec out(z.size());
  for (Index j = 0; j < z.size(); ++j) {
    if (z[j] > beta) {
      out[j] = z[j] - beta;
    } else if (z[j] < -beta) {
      out[j] = z[j] + beta;
    } else {
      out[j] = 0.0;
    }
  }
  return out;
}

RVec nn_soft_threshold(const RVec& z, double beta) {
  if (beta < 0.0) throw std::invalid_argument("threshold must be >= 0");
  RVec out(z.size());
  for (Index j = 0; j < z.size(); ++j) out[j] = z[j] > beta ? z[j] - beta : 0.0;
  return out;
}

// --- Finite differences --------------------------------------------------------

GradientField finite_difference(const CVec& x, GridShape shape) {
  const Index n = shape.size();
  if (x.size() != n) throw DimensionMismatch("finite difference: size mismatch");
  GradientField g{shape, CVec(2 * n)};
  for (int iy = 0; iy < shape.ny; ++iy) {
    const int iy1 = (iy + 1) % shape.ny;
    for (int ix = 0; ix < shape.nx; ++ix) {
      const int ix1 = (ix + 1) % shape.nx;
      const Index l = static_cast<Index>(iy) * shape.nx + ix;
      g.s[l] = x[static_cast<Index>(iy) * shape.nx + ix1] - x[l];
      g.s[n + l] = x[static_cast<Index>(iy1) * shape.nx + ix] - x[l];
    }
  }
  return g;
}

CVec adjoint_finite_difference(const GradientField& g) {
  const GridShape shape = g.shape;
  const Index n = shape.size();
  if (g.s.size() != 2 * n) throw DimensionMismatch("adjoint finite difference: size mismatch");
  CVec x(n);
  for (int iy = 0; iy < shape.ny; ++iy) {
    const int iym = (iy - 1 + shape.ny) % shape.ny;
    for (int ix = 0; ix < shape.nx; ++ix) {
      const int ixm = (ix - 1 + shape.nx) % shape.nx;
      const Index l = static_cast<Index>(iy) * shape.nx + ix;
      x[l] = g.s[static_cast<Index>(iy) * shape.nx + ixm] - g.s[l] +
             g.s[n + static_cast<Index>(iym) * shape.nx + ix] - g.s[n + l];
    }
  }
  return x;
}

double tv_norm(const CVec& x, GridShape shape) { return finite_difference(x, shape).group_norms().sum(); }

double fused_lasso_value(const CVec& x, double gamma, GridShape shape) {
  const double l1 = x.cwiseAbs().sum();
  return gamma == 0.0 ? l1 : l1 + gamma * tv_norm(x, shape);
}

double polar_fused_lasso(const CVec& u, double gamma, GridShape shape) {
  const double linf = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
  if (gamma == 0.0) return linf;
  const RVec groups = finite_difference(u, shape).group_norms();
  return std::max(linf, gamma * (groups.size() ? groups.maxCoeff() : 0.0));
}

// --- TV prox (ADMM) ------------------------------------------------------------

namespace {

// Eigenvalues of E^H E (circular 5-point Laplacian) in FFT order.
RVec laplacian_symbol(GridShape shape) {
  RVec eig(shape.size());
  for (int ky = 0; ky < shape.ny; ++ky) {
    const double ey = 2.0 - 2.0 * std::cos(2.0 * kPi * ky / shape.ny);
    for (int kx = 0; kx < shape.nx; ++kx) {
      eig[static_cast<Index>(ky) * shape.nx + kx] = ey + 2.0 - 2.0 * std::cos(2.0 * kPi * kx / shape.nx);
    }
  }
  return eig;
}

// In-place isotropic group shrinkage of stacked gradient pairs.
void group_shrink(CVec& s, Index n, double t) {
  for (Index j = 0; j < n; ++j) {
    const double mag = std::sqrt(std::norm(s[j]) + std::norm(s[n + j]));
    const double scale = mag > t ? 1.0 - t / mag : 0.0;
    s[j] *= scale;
    s[n + j] *= scale;
  }
}

// Scales each gradient pair down to group norm at most t.
void clip_groups(CVec& s, Index n, double t) {
  for (Index j = 0; j < n; ++j) {
    const double mag = std::sqrt(std::norm(s[j]) + std::norm(s[n + j]));
    if (mag > t) {
      s[j] *= t / mag;
      s[n + j] *= t / mag;
    }
  }
}

}  // namespace

namespace {

// argmin_u 1/2 ||u - v||^2 + l1 ||u||_1 + tv ||E u||_{2,1} by ADMM with the splits s = E u
// and (when l1 > 0) w = u. Convergence needs both residuals below tol * ||v|| and a
// relative duality gap below tol.
TvProxResult admm_prox(const CVec& v, double l1, double tv, GridShape shape, const TvProxOptions& opts) {
  const Index n = shape.size();
  const bool split_l1 = l1 > 0.0;
  const double scale = std::max(v.norm(), std::numeric_limits<double>::min());
  const auto fft = Fft2::get(shape);
  const RVec eig = laplacian_symbol(shape);
  const CVec v_hat = fft->forward(v);
  const auto objective = [&](const CVec& u) {
    return 0.5 * (u - v).squaredNorm() + l1 * u.cwiseAbs().sum() + tv * tv_norm(u, shape);
  };

  TvProxResult result{v, 0, false};
  double rho = opts.rho;
  CVec u = v;
  CVec s = finite_difference(u, shape).s;
  group_shrink(s, n, tv / rho);
  CVec w = split_l1 ? soft_threshold(u, l1 / rho) : CVec();
  CVec dual_s = CVec::Zero(2 * n);
  CVec dual_w = CVec::Zero(split_l1 ? n : 0);
  const double w_weight = split_l1 ? 1.0 : 0.0;

  for (int it = 1; it <= opts.max_iters; ++it) {
    // u-update: (I + rho E^H E + rho [l1 split] I) u = v + rho E^H (s - dual_s) + rho (w - dual_w)
    CVec rhs = rho * adjoint_finite_difference({shape, s - dual_s});
    if (split_l1) rhs += rho * (w - dual_w);
    const CVec rhs_hat = v_hat + fft->forward(rhs);
    CVec u_hat(n);
    for (Index j = 0; j < n; ++j) u_hat[j] = rhs_hat[j] / (1.0 + rho * (eig[j] + w_weight));
    u = fft->inverse(u_hat);

    const CVec eu = finite_difference(u, shape).s;
    const CVec s_old = s;
    s = eu + dual_s;
    group_shrink(s, n, tv / rho);
    dual_s += eu - s;
    double primal_sq = (eu - s).squaredNorm();
    CVec back = adjoint_finite_difference({shape, s - s_old});
    if (split_l1) {
      const CVec w_old = w;
      w = soft_threshold(CVec(u + dual_w), l1 / rho);
      dual_w += u - w;
      primal_sq += (u - w).squaredNorm();
      back += w - w_old;
    }
    const double primal = std::sqrt(primal_sq);
    const double dual_res = rho * back.norm();
    result.iterations = it;
    if (primal <= opts.tol * scale && dual_res <= opts.tol * scale) {
      // Feasible dual point from the scaled multipliers; u_q = v - E^H q_s - q_w.
      CVec q_s = rho * dual_s;
      clip_groups(q_s, n, tv);
      CVec u_q = v - adjoint_finite_difference({shape, q_s});
      if (split_l1) {
        CVec q_w = rho * dual_w;
        for (Index j = 0; j < n; ++j) {
          const double m = std::abs(q_w[j]);
          if (m > l1) q_w[j] *= l1 / m;
        }
        u_q -= q_w;
      }
      const double d_q = 0.5 * v.squaredNorm() - 0.5 * u_q.squaredNorm();
      const CVec& cand = split_l1 ? w : u;
      const double p_c = objective(cand), p_q = objective(u_q);
      const double best = std::min(p_c, p_q);
      if (best - d_q <= opts.tol * std::max(best, std::numeric_limits<double>::min())) {
        result.u = p_q < p_c ? u_q : cand;
        result.converged = true;
        return result;
      }
    }
    if (opts.balance_rho) {
      double factor = 1.0;
      if (primal > 10.0 * dual_res) factor = 2.0;
      else if (dual_res > 10.0 * primal) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        dual_s /= factor;
        dual_w /= factor;
      }
    }
  }
  result.u = split_l1 ? w : u;
  return result;
}

}  // namespace

TvProxResult tv_prox_solve(const CVec& v, double weight, GridShape shape, const TvProxOptions& opts) {
  if (weight < 0.0) throw std::invalid_argument("TV prox weight must be >= 0");
  if (v.size() != shape.size()) throw DimensionMismatch("TV prox: size mismatch");
  if (weight == 0.0) return {v, 0, true};
  return admm_prox(v, 0.0, weight, shape, opts);
}

CVec tv_prox(const CVec& v, double weight, GridShape shape, const TvProxOptions& opts) {
  return tv_prox_solve(v, weight, shape, opts).u;
}

CVec fused_lasso_prox(const CVec& v, double weight, double gamma, GridShape shape, const TvProxOptions& opts) {
  if (weight < 0.0 || gamma < 0.0) throw std::invalid_argument("fused Lasso prox weights must be >= 0");
  if (v.size() != shape.size()) throw DimensionMismatch("fused Lasso prox: size mismatch");
  if (weight == 0.0) return v;
  if (gamma == 0.0) return soft_threshold(v, weight);
  return admm_prox(v, weight, weight * gamma, shape, opts).u;
}

// --- Fused Lasso ball projection ----------------------------------------------

namespace {

double newton_slope(const CVec& u, double gamma, GridShape shape, double rel_threshold) {
  const RVec mag = u.cwiseAbs();
  const double max_mag = mag.size() ? mag.maxCoeff() : 0.0;
  double count = 0.0;
  if (max_mag > 0.0) count += static_cast<double>((mag.array() > rel_threshold * max_mag).count());
  if (gamma > 0.0) {
    const RVec groups = finite_difference(u, shape).group_norms();
    const double max_group = groups.size() ? groups.maxCoeff() : 0.0;
    if (max_group > 0.0) count += gamma * static_cast<double>((groups.array() > rel_threshold * max_group).count());
  }
  return -count;
}

}  // namespace

ProjectionResult proj_fused_lasso_solve(const CVec& z, double gamma, double tau, GridShape shape,
                                        const ProjectionOptions& opts) {
  FusedLassoParams{gamma, tau}.validate();
  if (z.size() != shape.size()) throw DimensionMismatch("projection: size mismatch");
  ProjectionResult result;
  const double r0 = fused_lasso_value(z, gamma, shape);
  if (r0 <= tau) {
    result.u = z;
    result.converged = true;
    return result;
  }
  if (tau == 0.0) {
    result.u = CVec::Zero(z.size());
    result.eta = z.cwiseAbs().maxCoeff();
    result.converged = true;
    return result;
  }

  const double accept = opts.tol * std::max(1.0, tau);
  // Bracket: f(lo) > 0 at eta = 0; at eta = ||z||_inf everything is shrunk to zero.
  double lo = 0.0, f_lo = r0 - tau;
  double hi = z.cwiseAbs().maxCoeff(), f_hi = -tau;
  CVec u_hi = CVec::Zero(z.size());
  int last_side = 0;

  double eta = 0.0;
  CVec u = z;
  double f = r0 - tau;
  bool newton = true;
  for (int it = 0; it < opts.max_newton; ++it) {
    double next = -1.0;
    if (newton) {
      const double g = newton_slope(u, gamma, shape, opts.support_threshold);
      if (g < 0.0) next = std::max(0.0, eta - f / g);
    }
    const bool fallback = !(next > lo && next < hi);
    if (fallback) {
      // Regula falsi on the bracket (Illinois variant), bisection if degenerate.
      next = f_lo - f_hi > 0.0 ? lo + f_lo * (hi - lo) / (f_lo - f_hi) : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    }
    CVec u_next = fused_lasso_prox(z, next, gamma, shape, opts.tv);
    const double f_next = fused_lasso_value(u_next, gamma, shape) - tau;
    result.bisection_steps += fallback;
    result.newton_iterations = it + 1;
    // The support-count slope overestimates |f'| when the TV prox is inexact; switch to the
    // bracket when a Newton step fails to halve the residual.
    newton = std::abs(f_next) <= 0.5 * std::abs(f);
    if (f_next > 0.0) {
      lo = next;
      f_lo = f_next;
      if (last_side == 1) f_hi *= 0.5;
      last_side = 1;
    } else {
      hi = next;
      f_hi = f_next;
      u_hi = u_next;
      if (last_side == -1) f_lo *= 0.5;
      last_side = -1;
    }
    eta = next;
    u = std::move(u_next);
    f = f_next;
    if (std::abs(f) <= accept) {
      result.converged = true;
      break;
    }
  }
  if (result.converged) {
    result.u = std::move(u);
    result.eta = eta;
  } else {
    // Best feasible point seen.
    result.u = std::move(u_hi);
    result.eta = hi;
  }
  return result;
}

CVec proj_fused_lasso(const CVec& z, double gamma, double tau, GridShape shape, const ProjectionOptions& opts) {
  return proj_fused_lasso_solve(z, gamma, tau, shape, opts).u;
}

// --- Shift projector -----------------------------------------------------------

ShiftProjection shift_projector_P(const RVec& h_tilde, int n_h) {
  if (h_tilde.size() != static_cast<Index>(n_h) * n_h) throw DimensionMismatch("shift projector: size mismatch");
  const double max_val = h_tilde.size() ? h_tilde.maxCoeff() : 0.0;
  if (!(max_val > 0.0)) return {ShiftKernel::identity(n_h), true};
  const ShiftKernel probe = ShiftKernel::identity(n_h);
  Index best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < h_tilde.size(); ++k) {
    if (max_val - h_tilde[k] > 1e-12) continue;
    const double d = probe.offset_of(k).euclidean();
    if (d < best_dist) {  // strict: equal distance keeps the lower row-major index
      best = k;
      best_dist = d;
    }
  }
  return {shift_kernel_from_offset(probe.offset_of(best), n_h), false};
}

}  // namespace autofocus
