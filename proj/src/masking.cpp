#include "bfkit/masking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bfkit {
namespace {

// Prefix tables of counts and first moments (bin index as value). Both stay
// exact integers in double for any realistic pixel count.
struct MomentTable {
  std::vector<double> weight;
  std::vector<double> moment;

  explicit MomentTable(std::span<const std::uint64_t> counts)
      : weight(counts.size() + 1, 0.0), moment(counts.size() + 1, 0.0) {
    for (std::size_t j = 0; j < counts.size(); ++j) {
      weight[j + 1] = weight[j] + static_cast<double>(counts[j]);
      moment[j + 1] = moment[j] + static_cast<double>(counts[j]) * static_cast<double>(j);
    }
  }

  // Bins [first, last] inclusive; -inf marks an empty class.
  double class_score(std::size_t first, std::size_t last) const {
    const double w = weight[last + 1] - weight[first];
    if (w <= 0.0) return -std::numeric_limits<double>::infinity();
    const double s = moment[last + 1] - moment[first];
    return s * s / w;
  }
};

std::size_t occupied_bins(std::span<const std::uint64_t> counts) {
  return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(),
                                                [](std::uint64_t c) { return c > 0; }));
}

}  // namespace

double Histogram::upper_edge(std::size_t bin) const {
  return lo + (hi - lo) * static_cast<double>(bin + 1) / static_cast<double>(bins());
}

std::size_t Histogram::bin_of(double value) const {
  const std::size_t last = bins() - 1;
  if (!(hi > lo)) return 0;
  const double pos = (value - lo) / (hi - lo) * static_cast<double>(bins());
  std::size_t j = pos <= 0.0 ? 0 : std::min(last, static_cast<std::size_t>(std::ceil(pos)) - 1);
  // Snap against the exact edges so that value <= upper_edge(j) always holds.
  while (j < last && value > upper_edge(j)) ++j;
  while (j > 0 && value <= upper_edge(j - 1)) --j;
  return j;
}

Histogram make_histogram(const Image2D& img, std::size_t bins) {
  if (bins == 0) throw ParameterError("histogram needs at least one bin");
  if (img.empty()) throw DegenerateInputError("empty image");
  Histogram h;
  const auto [mn, mx] = std::minmax_element(img.values().begin(), img.values().end());
  h.lo = *mn;
  h.hi = *mx;
  h.counts.assign(bins, 0);
  for (double v : img.values()) ++h.counts[h.bin_of(v)];
  return h;
}

std::vector<std::size_t> otsu_boundaries(std::span<const std::uint64_t> counts, std::size_t levels) {
  const std::size_t bins = counts.size();
  if (levels == 0) throw ParameterError("number of thresholds must be >= 1");
  if (bins < levels + 1) throw ParameterError("need at least M+1 histogram bins");
  if (occupied_bins(counts) < levels + 1) {
    throw DegenerateInputError("histogram has fewer than " + std::to_string(levels + 1) +
                               " occupied bins; cannot form non-empty classes");
  }

  const MomentTable table(counts);
  constexpr double kEmpty = -std::numeric_limits<double>::infinity();

  // best[k][j]: best score of splitting bins [0, j] into k+1 classes, and
  // the lexicographically smallest boundary tuple attaining it.
  std::vector<std::vector<double>> best(levels + 1, std::vector<double>(bins, kEmpty));
  std::vector<std::vector<std::vector<std::size_t>>> path(
      levels + 1, std::vector<std::vector<std::size_t>>(bins));
  for (std::size_t j = 0; j < bins; ++j) best[0][j] = table.class_score(0, j);

  for (std::size_t k = 1; k <= levels; ++k) {
    for (std::size_t j = k; j < bins; ++j) {
      for (std::size_t cut = k - 1; cut < j; ++cut) {
        if (best[k - 1][cut] == kEmpty) continue;
        const double tail = table.class_score(cut + 1, j);
        if (tail == kEmpty) continue;
        const double score = best[k - 1][cut] + tail;
        bool take = score > best[k][j];
        std::vector<std::size_t> candidate;
        if (!take && score == best[k][j]) {
          candidate = path[k - 1][cut];
          candidate.push_back(cut);
          take = candidate < path[k][j];
        }
        if (take) {
          if (candidate.empty()) {
            candidate = path[k - 1][cut];
            candidate.push_back(cut);
          }
          best[k][j] = score;
          path[k][j] = std::move(candidate);
        }
      }
    }
  }
  return path[levels][bins - 1];
}

ThresholdSet otsu_multilevel(const Image2D& img, std::size_t levels, std::size_t bins) {
  if (levels == 0) throw ParameterError("number of thresholds must be >= 1");
  if (bins < levels + 1) throw ParameterError("bins must be >= M+1");
  const Histogram hist = make_histogram(img, bins);
  ThresholdSet out;
  out.boundaries = otsu_boundaries(hist.counts, levels);
  for (std::size_t b : out.boundaries) out.thresholds.push_back(hist.upper_edge(b));
  return out;
}

Mask foreground_mask(const Image2D& img, std::size_t levels, std::size_t bins) {
  const ThresholdSet set = otsu_multilevel(img, levels, bins);
  const double cut = set.thresholds.front();
  Mask mask(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img[i] > cut ? 1 : 0;
  return mask;
}

}  // namespace bfkit
