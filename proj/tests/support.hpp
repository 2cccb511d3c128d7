#pragma once

// Shared test helpers: seeded generators for property tests and small
// brute-force reference implementations that do not reuse library code.

#include "autofocus/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testing_support {

using autofocus::cplx;
using autofocus::CVec;
using autofocus::GridShape;
using autofocus::Index;
using autofocus::RVec;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  RVec rvec(Index n) {
    RVec v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  CVec cvec(Index n) {
    CVec v(n);
    for (Index i = 0; i < n; ++i) v[i] = cplx(normal(), normal());
    return v;
  }
  RVec nonneg(Index n) {
    RVec v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform();
    return v;
  }
  /// Sparse complex image with nonzeros only at least `band` pixels from every edge.
  CVec sparse_image(GridShape s, int count, int band) {
    CVec v = CVec::Zero(s.size());
    for (int t = 0; t < count; ++t) {
      const int ix = integer(band, s.nx - 1 - band);
      const int iy = integer(band, s.ny - 1 - band);
      v[static_cast<Index>(iy) * s.nx + ix] = std::polar(uniform(0.3, 1.0), uniform(0.0, 6.283185307179586));
    }
    return v;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

/// out(ix, iy) = in(ix - dx, iy - dy), circular.
inline CVec shifted(const CVec& in, GridShape s, int dx, int dy) {
  CVec out(in.size());
  for (int iy = 0; iy < s.ny; ++iy)
    for (int ix = 0; ix < s.nx; ++ix)
      out[static_cast<Index>(iy) * s.nx + ix] = in[static_cast<Index>(wrap(iy - dy, s.ny)) * s.nx + wrap(ix - dx, s.nx)];
  return out;
}

/// Direct circular convolution with an n_h x n_h kernel whose entry (a, b) sits at offset (a - c, b - c).
inline CVec nested_conv(const CVec& x, GridShape s, const RVec& k, int n_h) {
  const int c = (n_h - 1) / 2;
  CVec out = CVec::Zero(x.size());
  for (int iy = 0; iy < s.ny; ++iy)
    for (int ix = 0; ix < s.nx; ++ix) {
      cplx acc = 0.0;
      for (int b = 0; b < n_h; ++b)
        for (int a = 0; a < n_h; ++a)
          acc += k[static_cast<Index>(b) * n_h + a] *
                 x[static_cast<Index>(wrap(iy - (b - c), s.ny)) * s.nx + wrap(ix - (a - c), s.nx)];
      out[static_cast<Index>(iy) * s.nx + ix] = acc;
    }
  return out;
}

/// Naive 2-D DFT, exp(-2 pi i (kx ix / nx + ky iy / ny)).
inline CVec naive_dft2(const CVec& x, GridShape s) {
  const double tau = 6.283185307179586;
  CVec out = CVec::Zero(x.size());
  for (int ky = 0; ky < s.ny; ++ky)
    for (int kx = 0; kx < s.nx; ++kx) {
      cplx acc = 0.0;
      for (int iy = 0; iy < s.ny; ++iy)
        for (int ix = 0; ix < s.nx; ++ix)
          acc += x[static_cast<Index>(iy) * s.nx + ix] *
                 std::polar(1.0, -tau * (static_cast<double>(kx) * ix / s.nx + static_cast<double>(ky) * iy / s.ny));
      out[static_cast<Index>(ky) * s.nx + kx] = acc;
    }
  return out;
}

/// Isotropic circular total variation summed pixel by pixel.
inline double tv_oracle(const CVec& x, GridShape s) {
  double tv = 0.0;
  for (int iy = 0; iy < s.ny; ++iy)
    for (int ix = 0; ix < s.nx; ++ix) {
      const cplx v = x[static_cast<Index>(iy) * s.nx + ix];
      const cplx h = x[static_cast<Index>(iy) * s.nx + wrap(ix + 1, s.nx)] - v;
      const cplx w = x[static_cast<Index>(wrap(iy + 1, s.ny)) * s.nx + ix] - v;
      tv += std::sqrt(std::norm(h) + std::norm(w));
    }
  return tv;
}

inline double fused_oracle(const CVec& x, double gamma, GridShape s) {
  double l1 = 0.0;
  for (Index i = 0; i < x.size(); ++i) l1 += std::abs(x[i]);
  return l1 + gamma * tv_oracle(x, s);
}

/// Sort-based Euclidean projection onto the l1 ball (complex: project magnitudes, keep phases).
inline CVec l1_ball_projection(const CVec& z, double tau) {
  const Index n = z.size();
  std::vector<double> mag(n);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += (mag[i] = std::abs(z[i]));
  if (total <= tau) return z;
  std::vector<double> sorted = mag;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cum += sorted[j];
    const double t = (cum - tau) / static_cast<double>(j + 1);
    if (sorted[j] - t > 0.0) theta = t;
  }
  CVec out(n);
  for (Index i = 0; i < n; ++i) out[i] = mag[i] > theta ? z[i] * ((mag[i] - theta) / mag[i]) : cplx(0.0);
  return out;
}

inline double rel_err(const CVec& a, const CVec& b) {
  const double d = b.norm();
  return d == 0.0 ? a.norm() : (a - b).norm() / d;
}

}  // namespace testing_support
