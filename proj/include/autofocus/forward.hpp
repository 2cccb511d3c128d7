#pragma once

// Radar imaging operators and the image-domain convolution model.

#include "autofocus/fft2.hpp"
#include "autofocus/model.hpp"

#include <functional>
#include <memory>

namespace autofocus {

enum class Attenuation { unit, free_space };

/// Dense F x N operator for one transmitter/receiver pair:
///   A[k, l] = P_eff(f_k) a(r, r', l) exp(-i w_k (|r - p_l| + |r' - p_l|) / c).
/// A pair scanning a synthetic aperture stacks one such block per scan position.
class ImagingOperator {
 public:
  ImagingOperator(int pair_id, Eigen::MatrixXcd matrix, FrequencyGrid freqs, SpatialGrid grid,
                  Attenuation attenuation);

  int pair_id() const { return pair_id_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  const FrequencyGrid& freqs() const { return freqs_; }
  const SpatialGrid& grid() const { return grid_; }
  Attenuation attenuation() const { return attenuation_; }
  Index rows() const { return matrix_.rows(); }
  int positions() const { return static_cast<int>(matrix_.rows() / freqs_.size()); }
  Index cols() const { return matrix_.cols(); }

  CVec apply(const CVec& x) const;
  CVec adjoint(const CVec& y) const;

 private:
  int pair_id_;
  Eigen::MatrixXcd matrix_;
  FrequencyGrid freqs_;
  SpatialGrid grid_;
  Attenuation attenuation_;
};

/// Operator for explicit transmitter/receiver positions.
ImagingOperator build_imaging_operator(int pair_id, Point2 tx, Point2 rx, const SpatialGrid& grid,
                                       const FrequencyGrid& freqs, const PulseSpec& pulse,
                                       Attenuation attenuation = Attenuation::unit);

/// Operator at the assumed (A_m) or true (perturbed, A~_m) positions of `pair`,
/// one block per scan position of its aperture.
ImagingOperator build_imaging_operator(const AntennaPair& pair, const SpatialGrid& grid,
                                       const FrequencyGrid& freqs, const PulseSpec& pulse,
                                       bool use_true_positions,
                                       Attenuation attenuation = Attenuation::unit);

CVec apply_forward(const ImagingOperator& op, const ReflectivityImage& x);
CVec apply_adjoint(const ImagingOperator& op, const CVec& y);

/// Zero-pad a kernel to the grid with its center at FFT index (0, 0).
CVec embed_kernel(const RVec& kernel, int n_h, GridShape shape);
/// Inverse of embed_kernel restricted to the kernel support.
CVec crop_kernel(const CVec& padded, int n_h, GridShape shape);

/// Circular 2-D convolution x * h via F2^H D_{F2 h} F2 x.
CVec conv2_circular(const CVec& x, GridShape shape, const RVec& kernel, int n_h);
ReflectivityImage conv2_circular(const ReflectivityImage& x, const ShiftKernel& h);

/// x -> A_m F2^H D_{F2 h_m} F2 x for a fixed kernel.
class CompositeOperatorX {
 public:
  CompositeOperatorX(std::shared_ptr<const ImagingOperator> base, const RVec& kernel, int n_h);
  CompositeOperatorX(std::shared_ptr<const ImagingOperator> base, const ShiftKernel& kernel);

  CVec apply(const CVec& x) const;
  CVec adjoint(const CVec& y) const;
  const ImagingOperator& base() const { return *base_; }

 private:
  std::shared_ptr<const ImagingOperator> base_;
  std::shared_ptr<const Fft2> fft_;
  CVec kernel_hat_;
};

/// h -> A_m F2^H D_{F2 x} F2 h for a fixed image; h lives on the n_h x n_h support.
class CompositeOperatorH {
 public:
  CompositeOperatorH(std::shared_ptr<const ImagingOperator> base, const CVec& image, int n_h);

  int kernel_size() const { return n_h_; }
  Index domain_size() const { return static_cast<Index>(n_h_) * n_h_; }

  CVec apply(const CVec& h) const;
  CVec apply(const RVec& h) const { return apply(CVec(h.cast<cplx>())); }
  /// Complex adjoint onto the kernel support.
  CVec adjoint(const CVec& y) const;
  /// Adjoint for the real kernel domain: Re(A_h^H y).
  RVec adjoint_real(const CVec& y) const { return adjoint(y).real(); }

 private:
  std::shared_ptr<const ImagingOperator> base_;
  std::shared_ptr<const Fft2> fft_;
  CVec image_hat_;
  int n_h_;
};

/// A_m (x * h_m).
CVec forward_image_conv(const ImagingOperator& op, const ReflectivityImage& x, const ShiftKernel& h);

struct Proposition1Report {
  /// ||A~ x - A (x * delta_e)|| / ||A~ x||.
  double max_rel_error = 0.0;
  /// Largest |arg(A~[k,l] / A[k,l-e])| over support columns and frequencies.
  double max_phase_deviation = 0.0;
  /// w_max * Delta / c.
  double phase_bound = 0.0;
  /// |exp(i w_max Delta / c) - 1|.
  double amplitude_bound = 0.0;
  /// Per-frequency phase deviations and their bounds w_k Delta / c.
  RVec phase_deviation;
  RVec phase_bound_per_freq;
};

/// Compares perturbed measurements A~ x against the image-domain model A (x * delta_e).
/// The pair's true positions are tx + e * spacing and rx + e * spacing + d.
Proposition1Report check_proposition1(Point2 tx, Point2 rx, const SpatialGrid& grid,
                                      const FrequencyGrid& freqs, const PulseSpec& pulse,
                                      const ReflectivityImage& x, PixelOffset e_pixels,
                                      Point2 d_offset);

/// Largest eigenvalue of a positive semidefinite normal operator (A^H A).
/// Returns 0 for the zero operator.
double power_iteration_norm(const std::function<CVec(const CVec&)>& normal_op, Index dim,
                            int max_iters = 500, double tol = 1e-6);
double power_iteration_norm(const std::function<RVec(const RVec&)>& normal_op, Index dim,
                            int max_iters = 500, double tol = 1e-6);

}  // namespace autofocus
