#include "bfkit/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bfkit {

KernelSpec build_kernel(int size, double sigma) {
  if (size < 3 || size % 2 == 0) {
    throw ParameterError("kernel size must be odd and >= 3, got " + std::to_string(size));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("kernel sigma must be positive, got " + std::to_string(sigma));
  }
  if (static_cast<double>(size) > 4.0 * sigma + 1.0) {
    throw ParameterError("kernel size " + std::to_string(size) + " exceeds 4*sigma+1 = " +
                         std::to_string(4.0 * sigma + 1.0));
  }
  KernelSpec k;
  k.size = size;
  k.sigma = sigma;
  k.weights.resize(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  const int h = k.radius();
  const double denom = 2.0 * sigma * sigma;
  for (int dr = -h; dr <= h; ++dr) {
    for (int dc = -h; dc <= h; ++dc) {
      k.weights[static_cast<std::size_t>((dr + h) * size + (dc + h))] =
          std::exp(-static_cast<double>(dr * dr + dc * dc) / denom);
    }
  }
  return k;
}

MaskedFilter::MaskedFilter(Mask mask, KernelSpec kernel)
    : mask_(std::move(mask)), kernel_(std::move(kernel)) {
  if (kernel_.weights.size() != static_cast<std::size_t>(kernel_.size * kernel_.size)) {
    throw ParameterError("kernel weights do not match kernel size");
  }
  RealGrid ones(mask_.width(), mask_.height(), 1.0);
  normalizer_ = windowed_sum(ones);
}

RealGrid MaskedFilter::windowed_sum(const RealGrid& field) const {
  require_same_shape(field, mask_, "field vs mask");
  const auto width = static_cast<std::ptrdiff_t>(mask_.width());
  const auto height = static_cast<std::ptrdiff_t>(mask_.height());
  const int h = kernel_.radius();
  const int size = kernel_.size;

  // Pre-mask the field once so the inner loop is a plain weighted sum.
  RealGrid masked(mask_.width(), mask_.height());
  for (std::size_t i = 0; i < masked.size(); ++i) masked[i] = mask_[i] ? field[i] : 0.0;

  RealGrid out(mask_.width(), mask_.height());
  for (std::ptrdiff_t row = 0; row < height; ++row) {
    const std::ptrdiff_t r0 = std::max<std::ptrdiff_t>(0, row - h);
    const std::ptrdiff_t r1 = std::min<std::ptrdiff_t>(height - 1, row + h);
    for (std::ptrdiff_t col = 0; col < width; ++col) {
      if (!mask_(row, col)) continue;
      const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, col - h);
      const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(width - 1, col + h);
      double acc = 0.0;
      for (std::ptrdiff_t s_row = r0; s_row <= r1; ++s_row) {
        const double* w = &kernel_.weights[static_cast<std::size_t>((s_row - row + h) * size +
                                                                    (c0 - col + h))];
        const double* f = &masked[static_cast<std::size_t>(s_row * width + c0)];
        for (std::ptrdiff_t k = 0; k <= c1 - c0; ++k) acc += w[k] * f[k];
      }
      out(row, col) = acc;
    }
  }
  return out;
}

RealGrid MaskedFilter::apply(const RealGrid& field) const {
  RealGrid out = windowed_sum(field);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask_[i]) out[i] /= normalizer_[i];
  }
  return out;
}

RealGrid MaskedFilter::apply_adjoint(const RealGrid& field) const {
  require_same_shape(field, mask_, "field vs mask");
  // The window is symmetric, so sum_r g(r-s) mask(r) f(r)/Z(r) is the forward
  // windowed sum of f/Z.
  RealGrid scaled(field.width(), field.height());
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    scaled[i] = mask_[i] ? field[i] / normalizer_[i] : 0.0;
  }
  return windowed_sum(scaled);
}

RealGrid masked_filter(const RealGrid& field, const Mask& mask, const KernelSpec& kernel) {
  return MaskedFilter(mask, kernel).apply(field);
}

}  // namespace bfkit
