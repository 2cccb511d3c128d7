#include "autofocus/fft2.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace autofocus {

namespace {

// FFTW's planner is not re-entrant; execution with fftw_execute_dft is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft2::Fft2(GridShape shape) : shape_(shape) {
  if (shape.nx < 1 || shape.ny < 1) throw std::invalid_argument("FFT shape must be positive");
  std::lock_guard lock(planner_mutex());
  const auto n = static_cast<size_t>(shape.size());
  auto* a = fftw_alloc_complex(n);
  auto* b = fftw_alloc_complex(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_2d(shape.ny, shape.nx, a, b, FFTW_FORWARD, flags);
  inverse_plan_ = fftw_plan_dft_2d(shape.ny, shape.nx, a, b, FFTW_BACKWARD, flags);
  fftw_free(a);
  fftw_free(b);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("FFTW planning failed");
}

Fft2::~Fft2() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fft2::execute(void* plan, const CVec& in, CVec& out) const {
  if (in.size() != shape_.size()) throw DimensionMismatch("FFT input size mismatch");
  CVec src = in;  // FFTW may scribble over its input for some plans
  out.resize(in.size());
  fftw_execute_dft(static_cast<fftw_plan>(plan), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

CVec Fft2::forward(const CVec& v) const {
  CVec out;
  execute(forward_plan_, v, out);
  return out;
}

CVec Fft2::inverse(const CVec& v) const {
  CVec out;
  execute(inverse_plan_, v, out);
  out /= static_cast<double>(shape_.size());
  return out;
}

std::shared_ptr<const Fft2> Fft2::get(GridShape shape) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Fft2>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{shape.nx, shape.ny}];
  if (!slot) slot = std::make_shared<Fft2>(shape);
  return slot;
}

}  // namespace autofocus
