#pragma once

// Domain types for the image-domain autofocus model: spatial grids, scenes,
// shift kernels, antenna pairs, pulses and measurement sets.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace autofocus {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

/// Point-in-grid violated the zero boundary band required for exact shifts.
class BoundaryViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector or operator sizes disagree.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry makes the free-space attenuation undefined.
class SingularGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

double norm(Point2 p);
double distance(Point2 a, Point2 b);

/// Integer pixel displacement; dx along the fast (horizontal) axis.
struct PixelOffset {
  int dx = 0;
  int dy = 0;

  friend PixelOffset operator+(PixelOffset a, PixelOffset b) { return {a.dx + b.dx, a.dy + b.dy}; }
  friend PixelOffset operator-(PixelOffset a, PixelOffset b) { return {a.dx - b.dx, a.dy - b.dy}; }
  friend PixelOffset operator-(PixelOffset a) { return {-a.dx, -a.dy}; }
  friend bool operator==(PixelOffset a, PixelOffset b) = default;
  friend auto operator<=>(PixelOffset a, PixelOffset b) = default;

  int chebyshev() const;
  double euclidean() const;
};

/// Image dimensions only; what the regularizers need.
struct GridShape {
  int nx = 1;
  int ny = 1;

  Index size() const { return static_cast<Index>(nx) * ny; }
  friend bool operator==(GridShape a, GridShape b) = default;
};

/// Regular square-pixel grid. Linear index l = iy * nx + ix (x fastest).
class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(Point2 origin, double spacing, int nx, int ny);

  Point2 origin() const { return origin_; }
  double spacing() const { return spacing_; }
  int nx() const { return shape_.nx; }
  int ny() const { return shape_.ny; }
  Index size() const { return shape_.size(); }
  GridShape shape() const { return shape_; }

  Point2 point(Index l) const;
  std::pair<int, int> coords(Index l) const;
  Index index(int ix, int iy) const;
  /// Nearest grid pixel; nullopt when the point falls outside the grid cells.
  std::optional<std::pair<int, int>> nearest(Point2 p) const;

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  Point2 origin_{};
  double spacing_ = 1.0;
  GridShape shape_{};
};

SpatialGrid build_grid(Point2 origin, double spacing, int nx, int ny);

struct ReflectivityImage {
  SpatialGrid grid;
  CVec values;

  ReflectivityImage() = default;
  ReflectivityImage(SpatialGrid g, CVec v);
  static ReflectivityImage zeros(const SpatialGrid& g);

  /// Smallest distance (in pixels) from any nonzero pixel to the grid edge,
  /// i.e. the width of the all-zero boundary band. Returns max dimension when empty.
  int boundary_band() const;
  Index nonzeros(double tol = 0.0) const;
};

/// Odd-sized non-negative kernel, stored row-major with the center at
/// ((n_h-1)/2, (n_h-1)/2). Entry (a, b) represents displacement
/// (a - c, b - c) where c is the half-width.
class ShiftKernel {
 public:
  ShiftKernel() = default;
  ShiftKernel(int n_h, RVec values);

  static ShiftKernel identity(int n_h);

  int size() const { return n_h_; }
  int half_width() const { return (n_h_ - 1) / 2; }
  const RVec& values() const { return values_; }

  Index index_of(PixelOffset o) const;
  PixelOffset offset_of(Index k) const;
  /// Offset of the unique nonzero entry; nullopt if the kernel is not one-sparse.
  std::optional<PixelOffset> one_sparse_offset() const;

 private:
  int n_h_ = 1;
  RVec values_ = RVec::Ones(1);
};

/// One-sparse kernel translating an image by `offset` pixels.
ShiftKernel shift_kernel_from_offset(PixelOffset offset, int n_h);

struct AntennaPair {
  int id = 0;
  Point2 tx;
  Point2 rx;
  Point2 tx_true;
  Point2 rx_true;
  /// Scan offsets of a synthetic aperture traversed by the pair as a rigid unit
  /// (all positions share one error). Empty means a single position.
  std::vector<Point2> aperture;

  int positions() const { return aperture.empty() ? 1 : static_cast<int>(aperture.size()); }
  Point2 tx_error() const { return tx_true - tx; }
  Point2 rx_error() const { return rx_true - rx; }
  bool collocated() const { return tx_error() == rx_error(); }
};

enum class PulseKind { differential_gaussian };

struct PulseSpec {
  double f_center = 6e9;
  double bandwidth = 9e9;
  PulseKind kind = PulseKind::differential_gaussian;

  /// Gaussian envelope width s with -3 dB full width equal to the bandwidth.
  double envelope_sigma() const;
  /// Transmitted spectrum P(f) = i 2 pi f exp(-(f - fc)^2 / (2 s^2)).
  cplx spectrum(double f) const;
  double center_wavelength() const { return kSpeedOfLight / f_center; }
};

class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  /// Samples f_min, f_min + step, ... up to and including f_max (within half a step).
  FrequencyGrid(double f_min, double f_max, double step);
  static FrequencyGrid from_count(double f_min, double step, int count);

  double f_min() const { return f_min_; }
  double f_max() const { return freq(count_ - 1); }
  double step() const { return step_; }
  int size() const { return count_; }
  double freq(int k) const { return f_min_ + k * step_; }
  double angular(int k) const { return 2.0 * kPi * freq(k); }

 private:
  double f_min_ = 1e9;
  double step_ = 1e9;
  int count_ = 1;
};

struct MeasurementSet {
  std::vector<AntennaPair> pairs;
  FrequencyGrid freqs;
  std::vector<CVec> y;
  double noise_sigma = 0.0;

  void validate() const;
  int size() const { return static_cast<int>(pairs.size()); }
};

/// Effective (matched-filtered) spectrum |P(f_k)|^2, normalized by the
/// analytic peak of |P|^2 so values lie in [0, 1].
RVec differential_gaussian_spectrum(const PulseSpec& pulse, const FrequencyGrid& freqs);

struct Target {
  Point2 position;
  cplx amplitude{1.0, 0.0};
};

/// Nearest-pixel rasterization; rejects targets inside the zero boundary band.
/// Coinciding targets accumulate.
ReflectivityImage place_targets(const SpatialGrid& grid, const std::vector<Target>& targets,
                                int boundary_band);

/// Default boundary band for a kernel size: ceil((n_h - 1) / 2).
int default_boundary_band(int n_h);

/// Circular translation: out(ix, iy) = in(ix - o.dx, iy - o.dy).
CVec roll(const CVec& values, GridShape shape, PixelOffset o);
ReflectivityImage roll(const ReflectivityImage& image, PixelOffset o);

}  // namespace autofocus
