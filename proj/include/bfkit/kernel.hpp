#pragma once

#include <cstddef>
#include <vector>

#include "bfkit/grid.hpp"

namespace bfkit {

// Truncated Gaussian window of side `size`, unnormalized (center weight 1).
struct KernelSpec {
  int size = 17;
  double sigma = 4.0;
  std::vector<double> weights;  // size x size, row-major

  int radius() const noexcept { return size / 2; }
  double weight(int drow, int dcol) const {
    return weights[static_cast<std::size_t>((drow + radius()) * size + (dcol + radius()))];
  }
};

// Requires odd size >= 3, sigma > 0 and size <= 4*sigma + 1.
KernelSpec build_kernel(int size = 17, double sigma = 4.0);

// The masked, per-target renormalized kernel operator
//   w(r,s) = mask(r) mask(s) g(r-s) / sum_t mask(t) g(r-t)
// bound to one mask. apply() computes sum_s w(r,s) f(s); apply_adjoint()
// computes sum_r w(r,s) f(r). Both return 0 off the mask.
class MaskedFilter {
 public:
  MaskedFilter(Mask mask, KernelSpec kernel);

  RealGrid apply(const RealGrid& field) const;
  RealGrid apply_adjoint(const RealGrid& field) const;

  const Mask& mask() const noexcept { return mask_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  // sum_t mask(t) g(r-t) for foreground r, 0 elsewhere.
  const RealGrid& normalizer() const noexcept { return normalizer_; }

  std::size_t width() const noexcept { return mask_.width(); }
  std::size_t height() const noexcept { return mask_.height(); }

 private:
  // out(r) = mask(r) * sum_{s in window(r)} g(r-s) mask(s) f(s), window
  // visited row by row, left to right.
  RealGrid windowed_sum(const RealGrid& field) const;

  Mask mask_;
  KernelSpec kernel_;
  RealGrid normalizer_;
};

RealGrid masked_filter(const RealGrid& field, const Mask& mask, const KernelSpec& kernel);

}  // namespace bfkit
