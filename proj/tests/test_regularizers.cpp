#include "autofocus/regularizers.hpp"
#include "reference_projection.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace autofocus;
using testing_support::Gen;

namespace {

double tv_objective(const CVec& u, const CVec& v, double w, GridShape s) {
  return 0.5 * (u - v).squaredNorm() + w * testing_support::tv_oracle(u, s);
}

}  // namespace

TEST(SoftThreshold, RealCases) {
  const RVec z = (RVec(2) << 2.0, -0.5).finished();
  EXPECT_EQ(soft_threshold(z, 1.0), (RVec(2) << 1.0, 0.0).finished());
  EXPECT_EQ(soft_threshold(z, 0.0), z);
  const RVec w = (RVec(3) << -3.0, 0.2, 1.5).finished();
  EXPECT_EQ(soft_threshold(w, 1.0), (RVec(3) << -2.0, 0.0, 0.5).finished());
}

TEST(SoftThreshold, ComplexPreservesPhase) {
  for (double theta : {0.0, 0.3, 1.7, -2.9, 3.14}) {
    CVec z(1);
    z[0] = std::polar(3.0, theta);
    const CVec u = soft_threshold(z, 1.0);
    EXPECT_NEAR(std::abs(u[0] - std::polar(2.0, theta)), 0.0, 1e-14);
  }
  Gen gen(1);
  const CVec z = gen.cvec(20);
  EXPECT_EQ(soft_threshold(z, 0.0), z);
}

TEST(NonNegativeSoftThreshold, Definition) {
  const RVec z = (RVec(3) << 2.0, 0.5, -3.0).finished();
  EXPECT_EQ(nn_soft_threshold(z, 1.0), (RVec(3) << 1.0, 0.0, 0.0).finished());
  EXPECT_EQ(nn_soft_threshold(z, 0.0), (RVec(3) << 2.0, 0.5, 0.0).finished());
}

TEST(NonNegativeSoftThreshold, SupportAndSign) {
  Gen gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const RVec z = gen.rvec(30);
    const double beta = gen.uniform(0.0, 1.5);
    const RVec u = nn_soft_threshold(z, beta);
    for (Index i = 0; i < z.size(); ++i) {
      EXPECT_GE(u[i], 0.0);
      if (u[i] > 0.0) EXPECT_GT(z[i], beta);
      EXPECT_EQ(u[i], z[i] > beta ? z[i] - beta : 0.0);
    }
  }
}

TEST(FiniteDifference, ConstantImageHasZeroGradient) {
  const GridShape s{5, 4};
  const CVec x = CVec::Constant(s.size(), cplx(1.5, -0.5));
  EXPECT_EQ(finite_difference(x, s).s.norm(), 0.0);
  EXPECT_EQ(tv_norm(x, s), 0.0);
  EXPECT_NEAR(fused_lasso_value(x, 0.5, s), 20 * std::abs(cplx(1.5, -0.5)), 1e-12);
  EXPECT_NEAR(polar_fused_lasso(x, 0.5, s), std::abs(cplx(1.5, -0.5)), 1e-15);
}

TEST(FiniteDifference, ImpulseStencil) {
  const GridShape s{4, 4};
  CVec x = CVec::Zero(16);
  x[1 * 4 + 2] = 1.0;
  const GradientField g = finite_difference(x, s);
  // Forward differences touch the impulse and its left (horizontal) or lower (vertical) neighbor.
  CVec expect = CVec::Zero(32);
  expect[1 * 4 + 2] = -1.0;
  expect[1 * 4 + 1] = 1.0;
  expect[16 + 1 * 4 + 2] = -1.0;
  expect[16 + 0 * 4 + 2] = 1.0;
  EXPECT_EQ(g.s, expect);
  EXPECT_EQ((g.s.head(16).array() != cplx(0.0)).count(), 2);
  EXPECT_EQ((g.s.tail(16).array() != cplx(0.0)).count(), 2);
}

TEST(FiniteDifference, AdjointIdentity) {
  Gen gen(3);
  const GridShape s{8, 8};
  for (int trial = 0; trial < 5; ++trial) {
    const CVec x = gen.cvec(64), y = gen.cvec(128);
    const GradientField ex = finite_difference(x, s);
    const CVec ety = adjoint_finite_difference({s, y});
    EXPECT_LT(std::abs(y.dot(ex.s) - ety.dot(x)), 1e-12 * x.norm() * y.norm());
  }
}

TEST(TotalVariation, ImpulseOnLargeGrid) {
  const GridShape s{32, 32};
  CVec x = CVec::Zero(s.size());
  x[16 * 32 + 16] = 1.0;
  const double tv = 2.0 + std::sqrt(2.0);
  EXPECT_NEAR(tv_norm(x, s), tv, 1e-14);
  EXPECT_NEAR(fused_lasso_value(x, 0.5, s), 1.0 + 0.5 * tv, 1e-14);
}

TEST(TotalVariation, ThreeTargetFusedLassoValue) {
  const GridShape s{8, 8};
  CVec x = CVec::Zero(64);
  x[2 * 8 + 2] = 1.0;
  x[3 * 8 + 5] = 0.8;
  x[5 * 8 + 3] = 0.6;
  EXPECT_NEAR(testing_support::fused_oracle(x, 0.5, s), 6.497056274847714, 1e-12);
  EXPECT_NEAR(fused_lasso_value(x, 0.5, s), 6.497056274847714, 1e-12);
}

TEST(TotalVariation, MatchesPixelSumOracle) {
  Gen gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const GridShape s{gen.integer(1, 9), gen.integer(1, 9)};
    const CVec x = gen.cvec(s.size());
    const double g = gen.uniform(0.0, 3.0);
    EXPECT_NEAR(fused_lasso_value(x, g, s), testing_support::fused_oracle(x, g, s), 1e-10);
  }
}

TEST(Polar, HomogeneityAndDuality) {
  Gen gen(5);
  const GridShape s{6, 5};
  for (int trial = 0; trial < 1000; ++trial) {
    const CVec u = gen.cvec(s.size()), v = gen.cvec(s.size());
    const double g = gen.uniform(0.05, 3.0);
    EXPECT_LE(u.dot(v).real(), fused_lasso_value(u, g, s) * polar_fused_lasso(v, g, s) + 1e-9);
    if (trial < 20) {
      const double a = gen.uniform(-4, 4);
      EXPECT_NEAR(polar_fused_lasso(a * u, g, s), std::abs(a) * polar_fused_lasso(u, g, s), 1e-12);
    }
  }
}

TEST(TvProx, TrivialInputs) {
  Gen gen(6);
  const GridShape s{6, 6};
  const CVec v = gen.cvec(36);
  EXPECT_EQ(tv_prox(v, 0.0, s), v);
  const CVec c = CVec::Constant(36, cplx(0.3, 0.1));
  EXPECT_LT((tv_prox(c, 2.0, s) - c).norm(), 1e-10);
}

TEST(TvProx, StaircaseMatchesTwoLevelSearch) {
  const GridShape s{8, 1};
  CVec v = CVec::Zero(8);
  v.tail(4).setConstant(1.0);
  const double w = 0.4;
  // Golden-section search on levels (t, 1 - t).
  const auto f = [&](double t) {
    CVec u(8);
    u.head(4).setConstant(t);
    u.tail(4).setConstant(1.0 - t);
    return tv_objective(u, v, w, s);
  };
  double a = 0.0, b = 0.5;
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    if (f(c) < f(d))
      b = d;
    else
      a = c;
  }
  const double t = 0.5 * (a + b);
  TvProxOptions opts;
  opts.max_iters = 5000;
  opts.tol = 1e-10;
  const CVec u = tv_prox(v, w, s, opts);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(u[i].real(), t, 1e-6);
    EXPECT_NEAR(u[4 + i].real(), 1.0 - t, 1e-6);
  }
}

TEST(TvProx, ConvergedStopMatchesLongRunObjective) {
  Gen gen(7);
  const GridShape s{10, 10};
  int converged = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const CVec v = gen.sparse_image(s, 6, 1) + 0.05 * gen.cvec(100);
    const double w = gen.uniform(0.05, 0.5);
    const TvProxResult r = tv_prox_solve(v, w, s);
    if (!r.converged) {
      EXPECT_EQ(r.iterations, 200);
      continue;
    }
    ++converged;
    TvProxOptions ref;
    ref.max_iters = 10000;
    ref.tol = 1e-13;
    const double o = tv_objective(r.u, v, w, s);
    const double o_ref = tv_objective(tv_prox(v, w, s, ref), v, w, s);
    EXPECT_LE(std::abs(o - o_ref), 1e-6 * std::abs(o_ref));
  }
  EXPECT_GE(converged, 15);
}

TEST(Projection, InsideBallIsIdentity) {
  Gen gen(8);
  const GridShape s{4, 4};
  const CVec z = 0.01 * gen.cvec(16);
  EXPECT_EQ(proj_fused_lasso(z, 0.5, fused_lasso_value(z, 0.5, s) * 1.01, s), z);
}

TEST(Projection, ZeroRadiusGivesZero) {
  Gen gen(9);
  EXPECT_EQ(proj_fused_lasso(gen.cvec(16), 0.5, 0.0, {4, 4}).norm(), 0.0);
  EXPECT_THROW(proj_fused_lasso(gen.cvec(16), 0.5, -1.0, {4, 4}), std::invalid_argument);
}

TEST(Projection, GammaZeroMatchesSortedL1Projection) {
  Gen gen(10);
  const GridShape s{5, 5};
  ProjectionOptions opts;
  opts.tol = 1e-12;
  for (int trial = 0; trial < 20; ++trial) {
    const CVec z = gen.cvec(25);
    const double tau = gen.uniform(0.1, 0.9) * fused_lasso_value(z, 0.0, s);
    const CVec u = proj_fused_lasso(z, 0.0, tau, s, opts);
    EXPECT_LT((u - testing_support::l1_ball_projection(z, tau)).norm(), 1e-6);
  }
}

TEST(Projection, MatchesEtaGridSearchOnLengthFour) {
  Gen gen(11);
  for (double gamma : {0.0, 0.5, 2.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      const CVec z = gen.cvec(4);
      const double tau = gen.uniform(0.05, 0.5) * testing_support::fused_oracle(z, gamma, {4, 1});
      const CVec ref = reference_projection::eta_grid_projection(z, gamma, tau);
      const CVec u = proj_fused_lasso(z, gamma, tau, {4, 1});
      EXPECT_LT((u - ref).norm(), 1e-4) << "gamma " << gamma;
      EXPECT_LE(std::abs(fused_lasso_value(u, gamma, {4, 1}) - tau), 1e-4 * std::max(1.0, tau));
    }
  }
}

TEST(Projection, NoCloserPointOnSampledBall) {
  Gen gen(12);
  const GridShape s{3, 3};
  for (int trial = 0; trial < 20; ++trial) {
    const CVec z = gen.cvec(9);
    const double gamma = gen.uniform(0.0, 2.0);
    const double tau = gen.uniform(0.1, 0.8) * fused_lasso_value(z, gamma, s);
    ProjectionOptions opts;
    opts.tol = 1e-9;
    const CVec u = proj_fused_lasso(z, gamma, tau, s, opts);
    const double best = (u - z).norm();
    for (int k = 0; k < 2000; ++k) {
      // Perturb the candidate and pull it back onto the ball by scaling.
      CVec c = u + gen.uniform(0.0, 0.5) * gen.cvec(9);
      const double r = fused_lasso_value(c, gamma, s);
      if (r > tau) c *= tau / r;
      EXPECT_GE((c - z).norm(), best - 1e-6);
    }
  }
}

TEST(Projection, NonExpansive) {
  Gen gen(13);
  const GridShape s{5, 5};
  for (int trial = 0; trial < 30; ++trial) {
    const CVec a = gen.cvec(25), b = a + gen.uniform(0.01, 2.0) * gen.cvec(25);
    const double w = gen.uniform(0.0, 1.0);
    EXPECT_LE((soft_threshold(a, w) - soft_threshold(b, w)).norm(), (a - b).norm() + 1e-12);
    EXPECT_LE((tv_prox(a, w, s) - tv_prox(b, w, s)).norm(), (a - b).norm() * (1 + 1e-5) + 1e-8);
    ProjectionOptions opts;
    opts.tol = 1e-9;
    EXPECT_LE((proj_fused_lasso(a, 0.5, 3.0, s, opts) - proj_fused_lasso(b, 0.5, 3.0, s, opts)).norm(),
              (a - b).norm() * (1 + 1e-5) + 1e-6);
  }
}

TEST(ShiftProjector, ArgmaxOnOneRow) {
  RVec h = RVec::Zero(9);
  h[0] = 0.1;
  h[1] = 0.7;
  h[2] = 0.2;
  const ShiftProjection p = shift_projector_P(h, 3);
  EXPECT_EQ(p.kernel.one_sparse_offset(), (PixelOffset{0, -1}));
  EXPECT_FALSE(p.degenerate);
}

TEST(ShiftProjector, TiesPreferCenterThenRowMajor) {
  RVec h = RVec::Zero(9);
  h[0] = 0.5;
  h[4] = 0.5;
  EXPECT_EQ(shift_projector_P(h, 3).kernel.one_sparse_offset(), (PixelOffset{0, 0}));
  EXPECT_EQ(shift_projector_P(RVec::Constant(25, 0.04), 5).kernel.one_sparse_offset(), (PixelOffset{0, 0}));
  RVec g = RVec::Zero(9);
  g[5] = 0.3;
  g[1] = 0.3;
  g[8] = 0.3;
  // (0,-1) at index 1 and (1,0) at index 5 are both at distance 1; index 1 comes first.
  EXPECT_EQ(shift_projector_P(g, 3).kernel.one_sparse_offset(), (PixelOffset{0, -1}));
}

TEST(ShiftProjector, DegenerateInputGivesIdentity) {
  const ShiftProjection p = shift_projector_P(RVec::Zero(9), 3);
  EXPECT_TRUE(p.degenerate);
  EXPECT_EQ(p.kernel.one_sparse_offset(), (PixelOffset{0, 0}));
  EXPECT_TRUE(shift_projector_P(RVec::Constant(9, -1.0), 3).degenerate);
}

TEST(ShiftProjector, OutputAlwaysValidUnitKernel) {
  Gen gen(14);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_h = 2 * gen.integer(0, 4) + 1;
    RVec h = gen.rvec(n_h * n_h);
    if (trial % 3 == 0) h = h.cwiseAbs().array().round() / 2.0;
    const ShiftProjection p = shift_projector_P(h, n_h);
    EXPECT_EQ(p.kernel.size(), n_h);
    EXPECT_EQ(p.kernel.values().sum(), 1.0);
    EXPECT_TRUE(p.kernel.one_sparse_offset().has_value());
    EXPECT_TRUE((p.kernel.values().array() >= 0.0).all());
  }
}
