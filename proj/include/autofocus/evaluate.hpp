#pragma once

// Evaluation: global-shift alignment, detection ROC curves and error metrics.

#include "autofocus/forward.hpp"

#include <vector>

namespace autofocus {

struct Alignment {
  PixelOffset offset;
  CVec aligned;
  double correlation = 0.0;
};

/// Integer shift o (each |component| <= max_shift) maximizing |<roll(x_rec, o), x_true>|.
/// Ties go to the smaller shift, then to the first in row-major search order.
Alignment align_global_shift(const CVec& x_rec, const CVec& x_true, GridShape shape, int max_shift);

/// Pixels with |x| > tol * max|x|.
std::vector<bool> support_mask(const CVec& x, double tol = 0.0);
/// Mask grown by `radius` pixels in the Chebyshev sense (no wraparound).
std::vector<bool> dilate(const std::vector<bool>& mask, GridShape shape, int radius = 1);

struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> pfa;
  std::vector<double> pd;
  double auc = 0.0;
};

/// Sweeps a threshold on |x| from max|x| down to 0. Pd counts true pixels that pass; false
/// alarms are counted only outside the truth dilated by one pixel.
RocCurve roc_curve(const CVec& x_rec_aligned, const std::vector<bool>& truth_mask, GridShape shape,
                   int n_thresholds = 200);

/// Trapezoidal integral of pd over pfa.
double trapezoid_auc(const std::vector<double>& pfa, const std::vector<double>& pd);

struct KernelOffsetErrors {
  /// Most frequent (recovered - true) offset; ties go to the smallest norm.
  PixelOffset common;
  /// Per pair: Euclidean distance in pixels after removing `common`.
  std::vector<double> errors;
  int mismatches = 0;
};

KernelOffsetErrors kernel_offset_errors(const std::vector<PixelOffset>& recovered,
                                        const std::vector<PixelOffset>& truth);

struct Metrics {
  double rel_l2 = 0.0;
  double support_f1 = 0.0;
};

/// Relative l2 error and support F1 (both supports at 10% of their maxima).
Metrics image_metrics(const CVec& x_rec_aligned, const CVec& x_true);

/// Exhaustive search over all one-sparse unit kernels of size n_h:
/// argmin_o ||y - A roll(x, o)||.
PixelOffset one_sparse_oracle(const ImagingOperator& op, const CVec& x, const CVec& y, int n_h);

}  // namespace autofocus
