#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfkit/error.hpp"

namespace bfkit {

// Dense row-major 2D grid addressed as (row, col).
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(checked_area(width, height), fill) {}
  Grid(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_area(width, height)) {
      throw ParameterError("grid data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }
  T& operator[](std::size_t index) { return data_[index]; }
  const T& operator[](std::size_t index) const { return data_[index]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  static std::size_t checked_area(std::size_t width, std::size_t height) {
    if (width != 0 && height > static_cast<std::size_t>(-1) / width) {
      throw ParameterError("grid dimensions overflow");
    }
    return width * height;
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using RealGrid = Grid<double>;

// Acquired or corrected intensities. Values are expected finite and >= 0;
// validate() enforces that at API boundaries.
class Image2D : public Grid<double> {
 public:
  using Grid<double>::Grid;
  Image2D() = default;
  explicit Image2D(Grid<double> grid) : Grid<double>(std::move(grid)) {}

  void validate() const {
    for (std::size_t i = 0; i < size(); ++i) {
      const double v = (*this)[i];
      if (!std::isfinite(v) || v < 0.0) {
        throw RangeError("image value at index " + std::to_string(i) + " is not finite and >= 0");
      }
    }
  }
};

// Binary foreground / label mask; values are exactly 0 or 1.
class Mask : public Grid<std::uint8_t> {
 public:
  using Grid<std::uint8_t>::Grid;
  Mask() = default;

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto v : values()) n += v != 0;
    return n;
  }
  bool contains(std::size_t row, std::size_t col) const { return (*this)(row, col) != 0; }

  static Mask full(std::size_t width, std::size_t height) { return Mask(width, height, 1); }
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ParameterError(std::string("dimension mismatch: ") + what + " (" +
                         std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
  }
}

}  // namespace bfkit
