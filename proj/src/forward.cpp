#include "autofocus/forward.hpp"

#include <cmath>
#include <random>
#include <string>

namespace autofocus {

ImagingOperator::ImagingOperator(int pair_id, Eigen::MatrixXcd matrix, FrequencyGrid freqs,
                                 SpatialGrid grid, Attenuation attenuation)
    : pair_id_(pair_id),
      matrix_(std::move(matrix)),
      freqs_(freqs),
      grid_(std::move(grid)),
      attenuation_(attenuation) {
  if (matrix_.rows() == 0 || matrix_.rows() % freqs_.size() != 0 || matrix_.cols() != grid_.size()) {
    throw DimensionMismatch("imaging matrix shape does not match frequency grid x spatial grid");
  }
}

CVec ImagingOperator::apply(const CVec& x) const {
  if (x.size() != cols()) {
    throw DimensionMismatch("forward: image has " + std::to_string(x.size()) + " entries, operator expects " +
                            std::to_string(cols()));
  }
  return matrix_ * x;
}

CVec ImagingOperator::adjoint(const CVec& y) const {
  if (y.size() != rows()) {
    throw DimensionMismatch("adjoint: measurement has " + std::to_string(y.size()) +
                            " entries, operator expects " + std::to_string(rows()));
  }
  return matrix_.adjoint() * y;
}

ImagingOperator build_imaging_operator(int pair_id, Point2 tx, Point2 rx, const SpatialGrid& grid,
                                       const FrequencyGrid& freqs, const PulseSpec& pulse,
                                       Attenuation attenuation) {
  const RVec p_eff = differential_gaussian_spectrum(pulse, freqs);
  const Index n = grid.size();
  const int nf = freqs.size();
  Eigen::MatrixXcd a(nf, n);
  for (Index l = 0; l < n; ++l) {
    const Point2 p = grid.point(l);
    const double d_tx = distance(tx, p);
    const double d_rx = distance(rx, p);
    double gain = 1.0;
    if (attenuation == Attenuation::free_space) {
      if (d_tx < 1e-12 || d_rx < 1e-12) {
        throw SingularGeometry("antenna coincides with grid point " + std::to_string(l));
      }
      gain = 1.0 / (d_tx * d_rx);
    }
    const double path = (d_tx + d_rx) / kSpeedOfLight;
    for (int k = 0; k < nf; ++k) {
      const double phase = -freqs.angular(k) * path;
      a(k, l) = p_eff[k] * gain * cplx(std::cos(phase), std::sin(phase));
    }
  }
  return ImagingOperator(pair_id, std::move(a), freqs, grid, attenuation);
}

ImagingOperator build_imaging_operator(const AntennaPair& pair, const SpatialGrid& grid,
                                       const FrequencyGrid& freqs, const PulseSpec& pulse,
                                       bool use_true_positions, Attenuation attenuation) {
  const Point2 tx = use_true_positions ? pair.tx_true : pair.tx;
  const Point2 rx = use_true_positions ? pair.rx_true : pair.rx;
  if (pair.aperture.empty()) return build_imaging_operator(pair.id, tx, rx, grid, freqs, pulse, attenuation);
  const Index nf = freqs.size();
  Eigen::MatrixXcd stacked(nf * static_cast<Index>(pair.aperture.size()), grid.size());
  for (std::size_t s = 0; s < pair.aperture.size(); ++s) {
    const Point2 a = pair.aperture[s];
    stacked.middleRows(static_cast<Index>(s) * nf, nf) =
        build_imaging_operator(pair.id, tx + a, rx + a, grid, freqs, pulse, attenuation).matrix();
  }
  return ImagingOperator(pair.id, std::move(stacked), freqs, grid, attenuation);
}

CVec apply_forward(const ImagingOperator& op, const ReflectivityImage& x) {
  if (!(x.grid == op.grid())) throw DimensionMismatch("image grid differs from operator grid");
  return op.apply(x.values);
}

CVec apply_adjoint(const ImagingOperator& op, const CVec& y) { return op.adjoint(y); }

// --- Convolution ---------------------------------------------------------------

namespace {

void check_kernel_fits(int n_h, GridShape shape) {
  if (n_h < 1 || n_h % 2 == 0) throw std::invalid_argument("kernel size must be odd and positive");
  if (n_h > shape.nx || n_h > shape.ny) {
    throw std::invalid_argument("kernel of size " + std::to_string(n_h) + " larger than grid " +
                                std::to_string(shape.nx) + "x" + std::to_string(shape.ny));
  }
}

inline Index wrap_index(int dx, int dy, GridShape shape) {
  const int ix = (dx % shape.nx + shape.nx) % shape.nx;
  const int iy = (dy % shape.ny + shape.ny) % shape.ny;
  return static_cast<Index>(iy) * shape.nx + ix;
}

}  // namespace

CVec embed_kernel(const RVec& kernel, int n_h, GridShape shape) {
  check_kernel_fits(n_h, shape);
  if (kernel.size() != static_cast<Index>(n_h) * n_h) throw DimensionMismatch("kernel size mismatch");
  const int c = (n_h - 1) / 2;
  CVec padded = CVec::Zero(shape.size());
  for (int b = 0; b < n_h; ++b) {
    for (int a = 0; a < n_h; ++a) {
      padded[wrap_index(a - c, b - c, shape)] += kernel[static_cast<Index>(b) * n_h + a];
    }
  }
  return padded;
}

CVec crop_kernel(const CVec& padded, int n_h, GridShape shape) {
  check_kernel_fits(n_h, shape);
  if (padded.size() != shape.size()) throw DimensionMismatch("padded kernel size mismatch");
  const int c = (n_h - 1) / 2;
  CVec out(static_cast<Index>(n_h) * n_h);
  for (int b = 0; b < n_h; ++b) {
    for (int a = 0; a < n_h; ++a) {
      out[static_cast<Index>(b) * n_h + a] = padded[wrap_index(a - c, b - c, shape)];
    }
  }
  return out;
}

CVec conv2_circular(const CVec& x, GridShape shape, const RVec& kernel, int n_h) {
  if (x.size() != shape.size()) throw DimensionMismatch("image size mismatch");
  const auto fft = Fft2::get(shape);
  const CVec h_hat = fft->forward(embed_kernel(kernel, n_h, shape));
  return fft->inverse(fft->forward(x).cwiseProduct(h_hat));
}

ReflectivityImage conv2_circular(const ReflectivityImage& x, const ShiftKernel& h) {
  return ReflectivityImage(x.grid, conv2_circular(x.values, x.grid.shape(), h.values(), h.size()));
}

CompositeOperatorX::CompositeOperatorX(std::shared_ptr<const ImagingOperator> base, const RVec& kernel,
                                       int n_h)
    : base_(std::move(base)), fft_(Fft2::get(base_->grid().shape())) {
  kernel_hat_ = fft_->forward(embed_kernel(kernel, n_h, base_->grid().shape()));
}

CompositeOperatorX::CompositeOperatorX(std::shared_ptr<const ImagingOperator> base, const ShiftKernel& kernel)
    : CompositeOperatorX(std::move(base), kernel.values(), kernel.size()) {}

CVec CompositeOperatorX::apply(const CVec& x) const {
  if (x.size() != base_->cols()) throw DimensionMismatch("composite x-operator: image size mismatch");
  return base_->apply(fft_->inverse(fft_->forward(x).cwiseProduct(kernel_hat_)));
}

CVec CompositeOperatorX::adjoint(const CVec& y) const {
  return fft_->inverse(fft_->forward(base_->adjoint(y)).cwiseProduct(kernel_hat_.conjugate()));
}

CompositeOperatorH::CompositeOperatorH(std::shared_ptr<const ImagingOperator> base, const CVec& image,
                                       int n_h)
    : base_(std::move(base)), fft_(Fft2::get(base_->grid().shape())), n_h_(n_h) {
  check_kernel_fits(n_h, base_->grid().shape());
  if (image.size() != base_->cols()) throw DimensionMismatch("composite h-operator: image size mismatch");
  image_hat_ = fft_->forward(image);
}

CVec CompositeOperatorH::apply(const CVec& h) const {
  if (h.size() != domain_size()) throw DimensionMismatch("composite h-operator: kernel size mismatch");
  const GridShape shape = base_->grid().shape();
  const int c = (n_h_ - 1) / 2;
  CVec padded = CVec::Zero(shape.size());
  for (int b = 0; b < n_h_; ++b) {
    for (int a = 0; a < n_h_; ++a) {
      padded[wrap_index(a - c, b - c, shape)] += h[static_cast<Index>(b) * n_h_ + a];
    }
  }
  return base_->apply(fft_->inverse(fft_->forward(padded).cwiseProduct(image_hat_)));
}

CVec CompositeOperatorH::adjoint(const CVec& y) const {
  const CVec full = fft_->inverse(fft_->forward(base_->adjoint(y)).cwiseProduct(image_hat_.conjugate()));
  return crop_kernel(full, n_h_, base_->grid().shape());
}

CVec forward_image_conv(const ImagingOperator& op, const ReflectivityImage& x, const ShiftKernel& h) {
  if (!(x.grid == op.grid())) throw DimensionMismatch("image grid differs from operator grid");
  return op.apply(conv2_circular(x, h).values);
}

// --- Decollocation check --------------------------------------------------------

Proposition1Report check_proposition1(Point2 tx, Point2 rx, const SpatialGrid& grid,
                                      const FrequencyGrid& freqs, const PulseSpec& pulse,
                                      const ReflectivityImage& x, PixelOffset e_pixels,
                                      Point2 d_offset) {
  if (!(x.grid == grid)) throw DimensionMismatch("scene grid differs from check grid");
  const int shift = e_pixels.chebyshev();
  if (x.boundary_band() < shift) {
    throw BoundaryViolation("scene boundary band " + std::to_string(x.boundary_band()) +
                            " is narrower than the shift " + std::to_string(shift));
  }
  const double h = grid.spacing();
  const Point2 e{e_pixels.dx * h, e_pixels.dy * h};
  const auto assumed = build_imaging_operator(0, tx, rx, grid, freqs, pulse);
  const auto perturbed = build_imaging_operator(0, tx + e, rx + e + d_offset, grid, freqs, pulse);

  const CVec y_true = perturbed.apply(x.values);
  // The scene seen from the perturbed antennas is x translated by -e.
  const auto kernel = shift_kernel_from_offset(-e_pixels, 2 * shift + 1);
  const CVec y_model = forward_image_conv(assumed, x, kernel);

  Proposition1Report report;
  const double scale = y_true.norm();
  report.max_rel_error = scale > 0.0 ? (y_true - y_model).norm() / scale : (y_true - y_model).norm();

  const double delta = norm(d_offset);
  const int nf = freqs.size();
  report.phase_deviation = RVec::Zero(nf);
  report.phase_bound_per_freq.resize(nf);
  for (int k = 0; k < nf; ++k) report.phase_bound_per_freq[k] = freqs.angular(k) * delta / kSpeedOfLight;
  for (Index l = 0; l < x.values.size(); ++l) {
    if (x.values[l] == cplx{}) continue;
    auto [ix, iy] = grid.coords(l);
    const Index src = grid.index(ix - e_pixels.dx, iy - e_pixels.dy);
    for (int k = 0; k < nf; ++k) {
      const cplx ratio = perturbed.matrix()(k, l) * std::conj(assumed.matrix()(k, src));
      if (std::abs(ratio) == 0.0) continue;
      report.phase_deviation[k] = std::max(report.phase_deviation[k], std::abs(std::arg(ratio)));
    }
  }
  report.max_phase_deviation = nf > 0 ? report.phase_deviation.maxCoeff() : 0.0;
  const double w_max = freqs.angular(nf - 1);
  report.phase_bound = w_max * delta / kSpeedOfLight;
  report.amplitude_bound = std::abs(std::exp(cplx(0.0, report.phase_bound)) - 1.0);
  return report;
}

// --- Power iteration -----------------------------------------------------------

namespace {

template <class Vec>
Vec start_vector(Index dim) {
  std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(dim);
  for (Index i = 0; i < dim; ++i) {
    if constexpr (std::is_same_v<Vec, CVec>) {
      const double re = u(gen);
      v[i] = cplx(re, u(gen));
    } else {
      v[i] = u(gen);
    }
  }
  return v;
}

template <class Vec>
double power_iteration(const std::function<Vec(const Vec&)>& normal_op, Index dim, int max_iters, double tol) {
  if (dim == 0) return 0.0;
  Vec v = start_vector<Vec>(dim);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vec w = normal_op(v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = std::abs(v.dot(w));  // Rayleigh quotient, v unit norm
    v = w / nw;
    if (it > 0 && std::abs(next - lambda) <= tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

}  // namespace

double power_iteration_norm(const std::function<CVec(const CVec&)>& normal_op, Index dim, int max_iters,
                            double tol) {
  return power_iteration<CVec>(normal_op, dim, max_iters, tol);
}

double power_iteration_norm(const std::function<RVec(const RVec&)>& normal_op, Index dim, int max_iters,
                            double tol) {
  return power_iteration<RVec>(normal_op, dim, max_iters, tol);
}

}  // namespace autofocus
