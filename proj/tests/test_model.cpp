#include "autofocus/model.hpp"
#include "autofocus/regularizers.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace autofocus;
using testing_support::Gen;

TEST(Grid, FullSizedGridHasExpectedPointCount) {
  const SpatialGrid g = build_grid({0.0, 0.0}, 0.0125, 101, 101);
  EXPECT_EQ(g.size(), 10201);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.0125);
}

TEST(Grid, DegenerateSinglePoint) {
  const SpatialGrid g = build_grid({0.0, 0.0}, 1.0, 1, 1);
  EXPECT_EQ(g.size(), 1);
  EXPECT_EQ(g.point(0), (Point2{0.0, 0.0}));
}

TEST(Grid, RowMajorPointMapping) {
  // l = nx + 1 on a 3x3 grid is (ix, iy) = (1, 1).
  const SpatialGrid g = build_grid({0.5, -1.0}, 2.0, 3, 3);
  EXPECT_EQ(g.point(4), (Point2{2.5, 1.0}));
  EXPECT_EQ(g.coords(5), (std::pair<int, int>{2, 1}));
}

TEST(Grid, IndexRoundTrip) {
  Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int nx = gen.integer(1, 13), ny = gen.integer(1, 13);
    const SpatialGrid g({gen.uniform(-1, 1), gen.uniform(-1, 1)}, gen.uniform(0.01, 2.0), nx, ny);
    for (Index l = 0; l < g.size(); ++l) {
      const auto [ix, iy] = g.coords(l);
      EXPECT_EQ(g.index(ix, iy), l);
      const auto near = g.nearest(g.point(l));
      ASSERT_TRUE(near.has_value());
      EXPECT_EQ(g.index(near->first, near->second), l);
    }
  }
}

TEST(Grid, RejectsNonPositiveSpacing) {
  EXPECT_THROW(build_grid({0, 0}, 0.0, 4, 4), std::invalid_argument);
  EXPECT_THROW(build_grid({0, 0}, 1.0, 0, 4), std::invalid_argument);
}

TEST(Pulse, FullBandSampleCountAndEndpoints) {
  const PulseSpec p{6e9, 9e9};
  const FrequencyGrid f(1e9, 10e9, 30e6);
  ASSERT_EQ(f.size(), 301);
  const RVec s = differential_gaussian_spectrum(p, f);
  // Arbitrary-precision evaluation of (f/f*)^2 exp(-((f-fc)^2 - (f*-fc)^2)/s^2).
  EXPECT_NEAR(s[0], 0.0037044992717711426392, 1e-14);
  EXPECT_NEAR(s[300], 0.68598043948391672135, 1e-13);
  EXPECT_NEAR(differential_gaussian_spectrum(p, FrequencyGrid(6e9, 6e9, 1e9))[0], 0.73844125959500765982, 1e-13);
}

TEST(Pulse, SampledPeakNearAnalyticPeak) {
  const PulseSpec p{6e9, 9e9};
  const FrequencyGrid f(1e9, 10e9, 30e6);
  const RVec s = differential_gaussian_spectrum(p, f);
  Index k;
  const double mx = s.maxCoeff(&k);
  EXPECT_LE(mx, 1.0);
  EXPECT_GT(mx, 0.9999);
  EXPECT_NEAR(f.freq(static_cast<int>(k)), 7858733095.0568538613, f.step());
  EXPECT_TRUE((s.array() >= 0.0).all());
}

TEST(Pulse, WideBandLimitIsQuadratic) {
  const PulseSpec p{6e9, 1e15};
  const FrequencyGrid f(1e9, 4e9, 1e9);
  const RVec s = differential_gaussian_spectrum(p, f);
  for (int k = 1; k < f.size(); ++k) EXPECT_NEAR(s[k] / s[0], std::pow(f.freq(k) / f.freq(0), 2), 1e-8 * std::pow(f.freq(k) / f.freq(0), 2));
}

TEST(Pulse, RejectsNonPositiveBandwidth) {
  EXPECT_THROW(differential_gaussian_spectrum({6e9, 0.0}, FrequencyGrid(1e9, 2e9, 1e9)), std::invalid_argument);
}

TEST(Targets, ThreeUnitTargetsGiveThreeNonzeros) {
  const SpatialGrid g = build_grid({0, 0}, 0.0125, 64, 64);
  const auto px = [&](int ix, int iy) { return g.point(g.index(ix, iy)); };
  const auto img = place_targets(g, {{px(10, 10), 1.0}, {px(30, 40), 1.0}, {px(50, 20), 1.0}}, 3);
  EXPECT_EQ(img.nonzeros(), 3);
}

TEST(Targets, EmptyListGivesZeroImage) {
  const SpatialGrid g = build_grid({0, 0}, 0.0125, 8, 8);
  EXPECT_EQ(place_targets(g, {}, 3).nonzeros(), 0);
}

TEST(Targets, SnapsToNearestPixel) {
  const SpatialGrid g = build_grid({0, 0}, 0.0125, 8, 8);
  const Point2 p{0.013, 0.0};
  // Exhaustive nearest-pixel search.
  Index best = 0;
  for (Index l = 1; l < g.size(); ++l)
    if (distance(g.point(l), p) < distance(g.point(best), p)) best = l;
  EXPECT_EQ(best, g.index(1, 0));
  const auto img = place_targets(g, {{p, 1.0}}, 0);
  EXPECT_EQ(img.values[g.index(1, 0)], cplx(1.0));
  EXPECT_EQ(img.nonzeros(), 1);
}

TEST(Targets, BoundaryBandRejected) {
  const SpatialGrid g = build_grid({0, 0}, 0.0125, 8, 8);
  EXPECT_THROW(place_targets(g, {{g.point(g.index(1, 4)), 1.0}}, 2), BoundaryViolation);
  EXPECT_NO_THROW(place_targets(g, {{g.point(g.index(2, 4)), 1.0}}, 2));
  EXPECT_THROW(place_targets(g, {{{5.0, 5.0}, 1.0}}, 0), BoundaryViolation);
}

TEST(Targets, NonzeroCountEqualsDistinctSnappedPixels) {
  Gen gen(5);
  const SpatialGrid g = build_grid({-0.05, -0.05}, 0.0125, 10, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Target> ts;
    std::set<std::pair<int, int>> pixels;
    const int n = gen.integer(0, 12);
    for (int i = 0; i < n; ++i) {
      const Point2 p{gen.uniform(-0.05 + 2 * 0.0125, -0.05 + 7 * 0.0125),
                     gen.uniform(-0.05 + 2 * 0.0125, -0.05 + 7 * 0.0125)};
      ts.push_back({p, cplx(gen.uniform(0.5, 1.0), 0.0)});
      pixels.insert({static_cast<int>(std::lround((p.x + 0.05) / 0.0125)),
                     static_cast<int>(std::lround((p.y + 0.05) / 0.0125))});
    }
    EXPECT_EQ(place_targets(g, ts, 2).nonzeros(), static_cast<Index>(pixels.size()));
  }
}

TEST(Targets, BoundaryBandMeasure) {
  const SpatialGrid g = build_grid({0, 0}, 1.0, 10, 8);
  auto img = ReflectivityImage::zeros(g);
  img.values[g.index(3, 5)] = 1.0;
  EXPECT_EQ(img.boundary_band(), 2);
  EXPECT_EQ(default_boundary_band(7), 3);
  EXPECT_EQ(default_boundary_band(39), 19);
}

TEST(Kernel, IdentityOfFullSize) {
  const ShiftKernel k = shift_kernel_from_offset({0, 0}, 39);
  EXPECT_EQ(k.values().size(), 39 * 39);
  EXPECT_EQ(k.values()[19 * 39 + 19], 1.0);
  EXPECT_EQ(k.values().sum(), 1.0);
}

TEST(Kernel, OffsetEntry) {
  const ShiftKernel k = shift_kernel_from_offset({2, -1}, 5);
  // Center (2, 2); offset (2, -1) sits at column 4, row 1.
  EXPECT_EQ(k.values()[1 * 5 + 4], 1.0);
  EXPECT_EQ(k.values().sum(), 1.0);
  EXPECT_EQ(k.one_sparse_offset(), (PixelOffset{2, -1}));
}

TEST(Kernel, OutsideSupportRejected) {
  EXPECT_THROW(shift_kernel_from_offset({3, 0}, 5), std::invalid_argument);
  EXPECT_THROW(shift_kernel_from_offset({0, 0}, 4), std::invalid_argument);
  EXPECT_THROW(ShiftKernel(3, RVec::Constant(9, -1.0)), std::invalid_argument);
}

TEST(Kernel, RollMatchesIndexShift) {
  Gen gen(3);
  const GridShape s{8, 8};
  const CVec x = gen.cvec(s.size());
  EXPECT_EQ(roll(x, s, {2, -1}), testing_support::shifted(x, s, 2, -1));
  EXPECT_EQ(roll(x, s, {0, 0}), x);
}

TEST(Kernel, ProjectorFixesOneSparseKernels) {
  for (int n_h : {1, 3, 5, 7}) {
    const int c = (n_h - 1) / 2;
    for (int dy = -c; dy <= c; ++dy)
      for (int dx = -c; dx <= c; ++dx) {
        const ShiftKernel k = shift_kernel_from_offset({dx, dy}, n_h);
        const ShiftProjection p = shift_projector_P(k.values(), n_h);
        EXPECT_FALSE(p.degenerate);
        EXPECT_EQ(p.kernel.values(), k.values());
      }
  }
}
