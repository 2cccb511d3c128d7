#include "autofocus/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace autofocus {

double norm(Point2 p) { return std::hypot(p.x, p.y); }
double distance(Point2 a, Point2 b) { return norm(a - b); }

int PixelOffset::chebyshev() const { return std::max(std::abs(dx), std::abs(dy)); }
double PixelOffset::euclidean() const { return std::hypot(double(dx), double(dy)); }

// --- SpatialGrid -------------------------------------------------------------

SpatialGrid::SpatialGrid(Point2 origin, double spacing, int nx, int ny)
    : origin_(origin), spacing_(spacing), shape_{nx, ny} {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("grid spacing must be positive, got " + std::to_string(spacing));
  }
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("grid dimensions must be >= 1, got " + std::to_string(nx) + "x" +
                                std::to_string(ny));
  }
}

Point2 SpatialGrid::point(Index l) const {
  auto [ix, iy] = coords(l);
  return {origin_.x + ix * spacing_, origin_.y + iy * spacing_};
}

std::pair<int, int> SpatialGrid::coords(Index l) const {
  if (l < 0 || l >= size()) throw std::out_of_range("grid index out of range");
  return {static_cast<int>(l % shape_.nx), static_cast<int>(l / shape_.nx)};
}

Index SpatialGrid::index(int ix, int iy) const {
  if (ix < 0 || iy < 0 || ix >= shape_.nx || iy >= shape_.ny) {
    throw std::out_of_range("grid coordinates out of range");
  }
  return static_cast<Index>(iy) * shape_.nx + ix;
}

std::optional<std::pair<int, int>> SpatialGrid::nearest(Point2 p) const {
  const double fx = (p.x - origin_.x) / spacing_;
  const double fy = (p.y - origin_.y) / spacing_;
  const long ix = std::lround(fx);
  const long iy = std::lround(fy);
  if (ix < 0 || iy < 0 || ix >= shape_.nx || iy >= shape_.ny) return std::nullopt;
  return std::pair<int, int>{static_cast<int>(ix), static_cast<int>(iy)};
}

SpatialGrid build_grid(Point2 origin, double spacing, int nx, int ny) {
  return SpatialGrid(origin, spacing, nx, ny);
}

// --- ReflectivityImage -------------------------------------------------------

ReflectivityImage::ReflectivityImage(SpatialGrid g, CVec v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw DimensionMismatch("image has " + std::to_string(values.size()) + " values for a grid of " +
                            std::to_string(grid.size()));
  }
}

ReflectivityImage ReflectivityImage::zeros(const SpatialGrid& g) {
  return ReflectivityImage(g, CVec::Zero(g.size()));
}

int ReflectivityImage::boundary_band() const {
  int band = std::max(grid.nx(), grid.ny());
  for (Index l = 0; l < values.size(); ++l) {
    if (values[l] == cplx{}) continue;
    auto [ix, iy] = grid.coords(l);
    band = std::min({band, ix, iy, grid.nx() - 1 - ix, grid.ny() - 1 - iy});
  }
  return band;
}

Index ReflectivityImage::nonzeros(double tol) const {
  Index n = 0;
  for (Index l = 0; l < values.size(); ++l) n += std::abs(values[l]) > tol;
  return n;
}

// --- ShiftKernel ---------------------------------------------------------------

ShiftKernel::ShiftKernel(int n_h, RVec values) : n_h_(n_h), values_(std::move(values)) {
  if (n_h < 1 || n_h % 2 == 0) {
    throw std::invalid_argument("kernel size must be odd and positive, got " + std::to_string(n_h));
  }
  if (values_.size() != static_cast<Index>(n_h) * n_h) {
    throw DimensionMismatch("kernel needs n_h^2 values");
  }
  if ((values_.array() < 0.0).any()) throw std::invalid_argument("kernel entries must be non-negative");
}

ShiftKernel ShiftKernel::identity(int n_h) { return shift_kernel_from_offset({0, 0}, n_h); }

Index ShiftKernel::index_of(PixelOffset o) const {
  const int c = half_width();
  if (o.chebyshev() > c) throw std::invalid_argument("offset outside kernel support");
  return static_cast<Index>(o.dy + c) * n_h_ + (o.dx + c);
}

PixelOffset ShiftKernel::offset_of(Index k) const {
  const int c = half_width();
  return {static_cast<int>(k % n_h_) - c, static_cast<int>(k / n_h_) - c};
}

std::optional<PixelOffset> ShiftKernel::one_sparse_offset() const {
  std::optional<PixelOffset> found;
  for (Index k = 0; k < values_.size(); ++k) {
    if (values_[k] == 0.0) continue;
    if (found || values_[k] != 1.0) return std::nullopt;
    found = offset_of(k);
  }
  return found;
}

ShiftKernel shift_kernel_from_offset(PixelOffset offset, int n_h) {
  if (n_h < 1 || n_h % 2 == 0) {
    throw std::invalid_argument("kernel size must be odd and positive, got " + std::to_string(n_h));
  }
  const int c = (n_h - 1) / 2;
  if (offset.chebyshev() > c) {
    throw std::invalid_argument("offset (" + std::to_string(offset.dx) + "," + std::to_string(offset.dy) +
                                ") outside kernel support of size " + std::to_string(n_h));
  }
  RVec v = RVec::Zero(static_cast<Index>(n_h) * n_h);
  v[static_cast<Index>(offset.dy + c) * n_h + (offset.dx + c)] = 1.0;
  return ShiftKernel(n_h, std::move(v));
}

// --- Pulse / frequencies -----------------------------------------------------

double PulseSpec::envelope_sigma() const {
  return bandwidth / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

cplx PulseSpec::spectrum(double f) const {
  const double s = envelope_sigma();
  const double d = f - f_center;
  return cplx(0.0, 2.0 * kPi * f) * std::exp(-d * d / (2.0 * s * s));
}

FrequencyGrid::FrequencyGrid(double f_min, double f_max, double step) : f_min_(f_min), step_(step) {
  if (!(f_min > 0.0)) throw std::invalid_argument("f_min must be positive");
  if (!(step > 0.0)) throw std::invalid_argument("frequency step must be positive");
  if (f_max < f_min) throw std::invalid_argument("f_max must be >= f_min");
  count_ = static_cast<int>(std::floor((f_max - f_min) / step + 0.5)) + 1;
}

FrequencyGrid FrequencyGrid::from_count(double f_min, double step, int count) {
  if (count < 1) throw std::invalid_argument("frequency count must be >= 1");
  FrequencyGrid g(f_min, f_min, step);
  g.count_ = count;
  return g;
}

RVec differential_gaussian_spectrum(const PulseSpec& pulse, const FrequencyGrid& freqs) {
  if (!(pulse.bandwidth > 0.0)) throw std::invalid_argument("pulse bandwidth must be positive");
  if (pulse.kind != PulseKind::differential_gaussian) throw std::invalid_argument("unsupported pulse kind");
  const double s = pulse.envelope_sigma();
  const double fc = pulse.f_center;
  // |f exp(-(f-fc)^2/(2s^2))| peaks where f^2 - fc f - s^2 = 0.
  const double f_peak = 0.5 * (fc + std::sqrt(fc * fc + 4.0 * s * s));
  const double peak_exp = (f_peak - fc) * (f_peak - fc);
  RVec out(freqs.size());
  for (int k = 0; k < freqs.size(); ++k) {
    const double f = freqs.freq(k);
    const double ratio = f / f_peak;
    out[k] = ratio * ratio * std::exp(-((f - fc) * (f - fc) - peak_exp) / (s * s));
  }
  return out;
}

void MeasurementSet::validate() const {
  if (y.size() != pairs.size()) throw DimensionMismatch("one measurement vector per antenna pair expected");
  for (std::size_t m = 0; m < y.size(); ++m) {
    if (y[m].size() != static_cast<Index>(freqs.size()) * pairs[m].positions())
      throw DimensionMismatch("measurement length of pair " + std::to_string(m) +
                              " differs from frequency count x scan positions");
  }
}

// --- Scenes --------------------------------------------------------------------

// ceil((n_h - 1) / 2) for positive n_h.
int default_boundary_band(int n_h) { return n_h / 2; }

ReflectivityImage place_targets(const SpatialGrid& grid, const std::vector<Target>& targets,
                                int boundary_band) {
  auto image = ReflectivityImage::zeros(grid);
  for (const auto& t : targets) {
    auto px = grid.nearest(t.position);
    if (!px) throw BoundaryViolation("target lies outside the grid");
    auto [ix, iy] = *px;
    if (ix < boundary_band || iy < boundary_band || ix >= grid.nx() - boundary_band ||
        iy >= grid.ny() - boundary_band) {
      throw BoundaryViolation("target at pixel (" + std::to_string(ix) + "," + std::to_string(iy) +
                              ") lies in the zero boundary band of width " + std::to_string(boundary_band));
    }
    image.values[grid.index(ix, iy)] += t.amplitude;
  }
  return image;
}

CVec roll(const CVec& values, GridShape shape, PixelOffset o) {
  if (values.size() != shape.size()) throw DimensionMismatch("roll: size mismatch");
  CVec out(values.size());
  for (int iy = 0; iy < shape.ny; ++iy) {
    const int sy = ((iy - o.dy) % shape.ny + shape.ny) % shape.ny;
    for (int ix = 0; ix < shape.nx; ++ix) {
      const int sx = ((ix - o.dx) % shape.nx + shape.nx) % shape.nx;
      out[static_cast<Index>(iy) * shape.nx + ix] = values[static_cast<Index>(sy) * shape.nx + sx];
    }
  }
  return out;
}

ReflectivityImage roll(const ReflectivityImage& image, PixelOffset o) {
  return ReflectivityImage(image.grid, roll(image.values, image.grid.shape(), o));
}

}  // namespace autofocus
