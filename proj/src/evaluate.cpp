#include "autofocus/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace autofocus {

Alignment align_global_shift(const CVec& x_rec, const CVec& x_true, GridShape shape, int max_shift) {
  if (x_rec.size() != shape.size() || x_true.size() != shape.size())
    throw DimensionMismatch("align_global_shift: image size mismatch");
  if (max_shift < 0) throw std::invalid_argument("align_global_shift: max_shift must be non-negative");

  Alignment best;
  best.correlation = -1.0;
  for (int dy = -max_shift; dy <= max_shift; ++dy) {
    for (int dx = -max_shift; dx <= max_shift; ++dx) {
      const PixelOffset o{dx, dy};
      CVec shifted = roll(x_rec, shape, o);
      const double c = std::abs(x_true.dot(shifted));
      const bool better = c > best.correlation ||
                          (c == best.correlation && o.euclidean() < best.offset.euclidean());
      if (better) {
        best.correlation = c;
        best.offset = o;
        best.aligned = std::move(shifted);
      }
    }
  }
  return best;
}

std::vector<bool> support_mask(const CVec& x, double tol) {
  std::vector<bool> mask(x.size(), false);
  if (x.size() == 0) return mask;
  const double peak = x.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return mask;
  for (Index i = 0; i < x.size(); ++i) mask[i] = std::abs(x[i]) > tol * peak;
  return mask;
}

std::vector<bool> dilate(const std::vector<bool>& mask, GridShape shape, int radius) {
  if (static_cast<Index>(mask.size()) != shape.size()) throw DimensionMismatch("dilate: size mismatch");
  std::vector<bool> out(mask.size(), false);
  for (int iy = 0; iy < shape.ny; ++iy)
    for (int ix = 0; ix < shape.nx; ++ix) {
      if (!mask[static_cast<Index>(iy) * shape.nx + ix]) continue;
      for (int y = std::max(0, iy - radius); y <= std::min(shape.ny - 1, iy + radius); ++y)
        for (int x = std::max(0, ix - radius); x <= std::min(shape.nx - 1, ix + radius); ++x)
          out[static_cast<Index>(y) * shape.nx + x] = true;
    }
  return out;
}

double trapezoid_auc(const std::vector<double>& pfa, const std::vector<double>& pd) {
  if (pfa.size() != pd.size()) throw DimensionMismatch("trapezoid_auc: length mismatch");
  double area = 0.0;
  for (std::size_t i = 1; i < pfa.size(); ++i) area += (pfa[i] - pfa[i - 1]) * 0.5 * (pd[i] + pd[i - 1]);
  return area;
}

RocCurve roc_curve(const CVec& x_rec_aligned, const std::vector<bool>& truth_mask, GridShape shape,
                   int n_thresholds) {
  if (x_rec_aligned.size() != shape.size() || static_cast<Index>(truth_mask.size()) != shape.size())
    throw DimensionMismatch("roc_curve: size mismatch");
  if (n_thresholds < 2) throw std::invalid_argument("roc_curve: need at least two thresholds");
  const auto n_true = std::count(truth_mask.begin(), truth_mask.end(), true);
  if (n_true == 0) throw std::invalid_argument("roc_curve: empty truth mask");

  const std::vector<bool> guard = dilate(truth_mask, shape, 1);
  const auto n_clutter = std::count(guard.begin(), guard.end(), false);
  const RVec mag = x_rec_aligned.cwiseAbs();
  const double peak = mag.maxCoeff();

  std::vector<double> local;
  for (Index l = 0; l < mag.size(); ++l)
    if (truth_mask[l]) local.push_back(mag[l]);

  RocCurve roc;
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  roc.pfa.push_back(0.0);
  roc.pd.push_back(0.0);
  for (int i = 0; i < n_thresholds; ++i) {
    const double t = peak * (1.0 - static_cast<double>(i) / (n_thresholds - 1));
    Index hits = 0;
    for (double v : local) hits += v >= t;
    Index alarms = 0;
    for (Index l = 0; l < mag.size(); ++l) alarms += !guard[l] && mag[l] >= t;
    roc.thresholds.push_back(t);
    roc.pd.push_back(static_cast<double>(hits) / n_true);
    roc.pfa.push_back(n_clutter ? static_cast<double>(alarms) / n_clutter : 1.0);
  }
  roc.auc = trapezoid_auc(roc.pfa, roc.pd);
  return roc;
}

KernelOffsetErrors kernel_offset_errors(const std::vector<PixelOffset>& recovered,
                                        const std::vector<PixelOffset>& truth) {
  if (recovered.size() != truth.size()) throw DimensionMismatch("kernel_offset_errors: length mismatch");
  KernelOffsetErrors out;
  std::map<PixelOffset, int> votes;
  for (std::size_t m = 0; m < truth.size(); ++m) ++votes[recovered[m] - truth[m]];
  int best_count = 0;
  for (const auto& [o, count] : votes) {
    if (count > best_count || (count == best_count && o.euclidean() < out.common.euclidean())) {
      best_count = count;
      out.common = o;
    }
  }
  for (std::size_t m = 0; m < truth.size(); ++m) {
    const double e = (recovered[m] - truth[m] - out.common).euclidean();
    out.errors.push_back(e);
    out.mismatches += e > 0.0;
  }
  return out;
}

Metrics image_metrics(const CVec& x_rec_aligned, const CVec& x_true) {
  if (x_rec_aligned.size() != x_true.size()) throw DimensionMismatch("image_metrics: size mismatch");
  Metrics m;
  const double ref = x_true.norm();
  m.rel_l2 = ref > 0.0 ? (x_rec_aligned - x_true).norm() / ref : x_rec_aligned.norm();
  const auto rec = support_mask(x_rec_aligned, 0.1);
  const auto tru = support_mask(x_true, 0.1);
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    tp += rec[i] && tru[i];
    fp += rec[i] && !tru[i];
    fn += !rec[i] && tru[i];
  }
  m.support_f1 = tp ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
  return m;
}

PixelOffset one_sparse_oracle(const ImagingOperator& op, const CVec& x, const CVec& y, int n_h) {
  const GridShape shape = op.grid().shape();
  const int c = (n_h - 1) / 2;
  PixelOffset best{};
  double best_r = std::numeric_limits<double>::infinity();
  for (int dy = -c; dy <= c; ++dy)
    for (int dx = -c; dx <= c; ++dx) {
      const PixelOffset o{dx, dy};
      const double r = (y - op.apply(roll(x, shape, o))).norm();
      if (r < best_r || (r == best_r && o.euclidean() < best.euclidean())) {
        best_r = r;
        best = o;
      }
    }
  return best;
}

}  // namespace autofocus
