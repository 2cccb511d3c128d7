#pragma once

// Penalties, proximal maps and projections used by the autofocus solvers.
// All images are row-major ny x nx arrays; finite differences are circular.

#include "autofocus/model.hpp"

namespace autofocus {

struct FusedLassoParams {
  double gamma = 0.5;
  double tau = 0.0;

  void validate() const;
};

/// Stacked circular first differences: entries [0, N) horizontal, [N, 2N) vertical.
struct GradientField {
  GridShape shape;
  CVec s;

  /// sqrt(|s_j|^2 + |s_{N+j}|^2) for each pixel j.
  RVec group_norms() const;
};

/// Complex soft threshold: z_j max(0, 1 - beta / |z_j|). Reduces to the real rule on real inputs.
CVec soft_threshold(const CVec& z, double beta);
RVec soft_threshold(const RVec& z, double beta);
/// z_j - beta where z_j > beta, else 0.
RVec nn_soft_threshold(const RVec& z, double beta);

GradientField finite_difference(const CVec& x, GridShape shape);
CVec adjoint_finite_difference(const GradientField& s);

double tv_norm(const CVec& x, GridShape shape);
double fused_lasso_value(const CVec& x, double gamma, GridShape shape);
/// max(||u||_inf, gamma ||E u||_{2,inf}).
double polar_fused_lasso(const CVec& u, double gamma, GridShape shape);

struct TvProxOptions {
  double rho = 1.0;
  int max_iters = 200;
  double tol = 1e-6;
  /// Residual balancing of rho (factor 2 when one residual exceeds the other tenfold).
  bool balance_rho = true;
};

struct TvProxResult {
  CVec u;
  int iterations = 0;
  bool converged = false;
};

/// argmin_u 1/2 ||u - v||^2 + weight ||E u||_{2,1}, solved by ADMM on s = E u.
TvProxResult tv_prox_solve(const CVec& v, double weight, GridShape shape, const TvProxOptions& opts = {});
CVec tv_prox(const CVec& v, double weight, GridShape shape, const TvProxOptions& opts = {});

/// Prox of weight * (||.||_1 + gamma TV), solved jointly by ADMM (closed form when gamma = 0).
CVec fused_lasso_prox(const CVec& v, double weight, double gamma, GridShape shape,
                      const TvProxOptions& opts = {});

struct ProjectionOptions {
  int max_newton = 50;
  /// Accept when |R(u) - tau| <= tol * max(1, tau).
  double tol = 1e-6;
  /// Relative threshold (to the vector max) for the l0 / l_{2,0} support counts.
  double support_threshold = 1e-12;
  TvProxOptions tv{};
};

struct ProjectionResult {
  CVec u;
  /// Threshold parameter at termination (shrinkage weight of the prox).
  double eta = 0.0;
  int newton_iterations = 0;
  int bisection_steps = 0;
  bool converged = false;
};

/// Projection of z onto {u : ||u||_1 + gamma TV(u) <= tau} through the prox
/// path u(eta) = prox_{eta R}(z), with eta found by safeguarded Newton iteration.
ProjectionResult proj_fused_lasso_solve(const CVec& z, double gamma, double tau, GridShape shape,
                                        const ProjectionOptions& opts = {});
CVec proj_fused_lasso(const CVec& z, double gamma, double tau, GridShape shape,
                      const ProjectionOptions& opts = {});

struct ShiftProjection {
  ShiftKernel kernel;
  /// Input had no positive entry; the identity kernel was returned.
  bool degenerate = false;
};

/// One-sparse unit kernel at the argmax of h_tilde. Ties (within 1e-12) go to the
/// entry closest to the kernel center, then to the lowest row-major index.
ShiftProjection shift_projector_P(const RVec& h_tilde, int n_h);

}  // namespace autofocus
