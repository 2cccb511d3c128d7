#pragma once

#include "autofocus/model.hpp"

#include <memory>

namespace autofocus {

/// Two-dimensional complex FFT over a row-major ny x nx array (x fastest).
/// forward() is unnormalized; inverse() divides by N so inverse(forward(v)) == v.
/// Instances are immutable after construction and safe to share between threads.
class Fft2 {
 public:
  explicit Fft2(GridShape shape);
  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  GridShape shape() const { return shape_; }

  CVec forward(const CVec& v) const;
  CVec inverse(const CVec& v) const;

  /// Shared plan cache keyed by shape.
  static std::shared_ptr<const Fft2> get(GridShape shape);

 private:
  void execute(void* plan, const CVec& in, CVec& out) const;

  GridShape shape_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace autofocus
