#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "bfkit/grid.hpp"

namespace bfkit {

// Returned by psnr() when the images are identical.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// 10 log10(peak^2 / MSE); MSE over all pixels, or over `region` when given.
double psnr(const Grid<double>& ref, const Grid<double>& test, double peak = 1.0,
            const Mask* region = nullptr);

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double window_sigma = 1.5;
  double peak = 1.0;
};

// Mean SSIM over all fully contained window positions with Gaussian-weighted
// local moments. With `region`, only positions whose window center lies in
// the region are averaged.
double ssim(const Grid<double>& ref, const Grid<double>& test, const SsimParams& params = {},
            const Mask* region = nullptr);

// Population standard deviation over mean within the region.
double cv(const Grid<double>& img, const Mask& region);

// 2|a n b| / (|a| + |b|); 1 when both are empty.
double dice(const Mask& a, const Mask& b);

// Pearson correlation over the region (all pixels when null).
double pearson(const Grid<double>& a, const Grid<double>& b, const Mask* region = nullptr);

struct WilcoxonResult {
  double w = 0.0;       // min(W+, W-)
  double w_plus = 0.0;  // rank sum of positive differences y - x
  double p = 1.0;       // two-sided
  std::size_t n = 0;    // non-zero differences
  bool exact = true;
};

// Signed-rank test on y - x with average ranks for ties. Exact two-sided p
// for n <= 12, normal approximation with tie and continuity correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
};
Summary summarize(std::span<const double> values);

}  // namespace bfkit
