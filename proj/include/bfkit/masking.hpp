#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bfkit/grid.hpp"

namespace bfkit {

// Uniform histogram over [lo, hi]. Bin j covers (edge(j-1), edge(j)], with
// bin 0 also holding lo itself; edge(j) is the upper edge of bin j.
struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;

  std::size_t bins() const noexcept { return counts.size(); }
  double upper_edge(std::size_t bin) const;
  std::size_t bin_of(double value) const;
};

Histogram make_histogram(const Image2D& img, std::size_t bins);

struct ThresholdSet {
  std::vector<double> thresholds;       // ascending intensities
  std::vector<std::size_t> boundaries;  // bin index each threshold is the upper edge of
};

// Optimal M-threshold partition of a histogram into M+1 non-empty classes
// maximizing between-class variance. Ties resolve to the lexicographically
// smallest boundary tuple. Returns boundary bin indices.
std::vector<std::size_t> otsu_boundaries(std::span<const std::uint64_t> counts, std::size_t levels);

ThresholdSet otsu_multilevel(const Image2D& img, std::size_t levels, std::size_t bins = 256);

// mask(r) = 1 iff I(r) > min threshold.
Mask foreground_mask(const Image2D& img, std::size_t levels = 3, std::size_t bins = 256);

}  // namespace bfkit
