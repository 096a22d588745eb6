#include "bfkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace bfkit {
namespace {

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  const double center = 0.5 * (size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[static_cast<std::size_t>(i)];
  }
  for (auto& v : w) v /= total;
  return w;
}

// Valid-mode separable filtering: output is (H-win+1) x (W-win+1).
RealGrid filter_valid(const RealGrid& in, const std::vector<double>& w) {
  const std::size_t win = w.size();
  const std::size_t ow = in.width() - win + 1;
  const std::size_t oh = in.height() - win + 1;
  RealGrid horiz(ow, in.height());
  for (std::size_t row = 0; row < in.height(); ++row) {
    for (std::size_t col = 0; col < ow; ++col) {
      double acc = 0.0;
      for (std::size_t k = 0; k < win; ++k) acc += w[k] * in(row, col + k);
      horiz(row, col) = acc;
    }
  }
  RealGrid out(ow, oh);
  for (std::size_t row = 0; row < oh; ++row) {
    for (std::size_t col = 0; col < ow; ++col) {
      double acc = 0.0;
      for (std::size_t k = 0; k < win; ++k) acc += w[k] * horiz(row + k, col);
      out(row, col) = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const Grid<double>& ref, const Grid<double>& test, double peak, const Mask* region) {
  require_same_shape(ref, test, "psnr reference vs test");
  if (!(peak > 0.0)) throw ParameterError("psnr peak must be positive");
  if (region != nullptr) require_same_shape(ref, *region, "psnr image vs region");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (region != nullptr && !(*region)[i]) continue;
    const double d = ref[i] - test[i];
    sum += d * d;
    ++count;
  }
  if (count == 0) throw DegenerateInputError("psnr over an empty region");
  const double mse = sum / static_cast<double>(count);
  if (mse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Grid<double>& ref, const Grid<double>& test, const SsimParams& params,
            const Mask* region) {
  require_same_shape(ref, test, "ssim reference vs test");
  if (params.window < 1 || !(params.window_sigma > 0.0)) throw ParameterError("invalid ssim window");
  const auto win = static_cast<std::size_t>(params.window);
  if (ref.width() < win || ref.height() < win) {
    throw ParameterError("image smaller than the ssim window");
  }
  if (region != nullptr) require_same_shape(ref, *region, "ssim image vs region");

  const auto w = gaussian_window(params.window, params.window_sigma);
  RealGrid x(ref.width(), ref.height()), y(ref.width(), ref.height());
  RealGrid xx(ref.width(), ref.height()), yy(ref.width(), ref.height()), xy(ref.width(), ref.height());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    x[i] = ref[i];
    y[i] = test[i];
    xx[i] = ref[i] * ref[i];
    yy[i] = test[i] * test[i];
    xy[i] = ref[i] * test[i];
  }
  const RealGrid mx = filter_valid(x, w), my = filter_valid(y, w);
  const RealGrid mxx = filter_valid(xx, w), myy = filter_valid(yy, w), mxy = filter_valid(xy, w);

  const double c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
  const double c2 = (params.k2 * params.peak) * (params.k2 * params.peak);
  const std::size_t half = win / 2;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t row = 0; row < mx.height(); ++row) {
    for (std::size_t col = 0; col < mx.width(); ++col) {
      if (region != nullptr && !(*region)(row + half, col + half)) continue;
      const double ux = mx(row, col);
      const double uy = my(row, col);
      const double vx = mxx(row, col) - ux * ux;
      const double vy = myy(row, col) - uy * uy;
      const double cov = mxy(row, col) - ux * uy;
      total += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) /
               ((ux * ux + uy * uy + c1) * (vx + vy + c2));
      ++count;
    }
  }
  if (count == 0) throw DegenerateInputError("ssim region has no valid window positions");
  return total / static_cast<double>(count);
}

double cv(const Grid<double>& img, const Mask& region) {
  require_same_shape(img, region, "cv image vs region");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!region[i]) continue;
    sum += img[i];
    ++count;
  }
  if (count == 0) throw DegenerateInputError("cv over an empty region");
  const double mean = sum / static_cast<double>(count);
  if (!(mean > 0.0)) throw DegenerateInputError("cv region mean is not positive");
  double ss = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    if (!region[i]) continue;
    const double d = img[i] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(count)) / mean;
}

double dice(const Mask& a, const Mask& b) {
  require_same_shape(a, b, "dice masks");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] != 0;
    nb += b[i] != 0;
    both += (a[i] != 0) && (b[i] != 0);
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

double pearson(const Grid<double>& a, const Grid<double>& b, const Mask* region) {
  require_same_shape(a, b, "pearson inputs");
  double sa = 0.0, sb = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (region != nullptr && !(*region)[i]) continue;
    sa += a[i];
    sb += b[i];
    ++n;
  }
  if (n < 2) throw DegenerateInputError("pearson needs at least two samples");
  const double ma = sa / static_cast<double>(n);
  const double mb = sb / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (region != nullptr && !(*region)[i]) continue;
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DegenerateInputError("pearson input has zero variance");
  return sab / std::sqrt(saa * sbb);
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("wilcoxon samples must have equal length");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = y[i] - x[i];
    if (d != 0.0) diffs.push_back(d);
  }
  WilcoxonResult out;
  out.n = diffs.size();
  if (out.n == 0) return out;

  std::vector<std::size_t> idx(out.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

  // Ranks are stored doubled so tied (half-integer) averages stay integral.
  std::vector<std::int64_t> doubled_rank(out.n);
  double tie_term = 0.0;
  for (std::size_t start = 0; start < out.n;) {
    std::size_t end = start;
    while (end + 1 < out.n && std::abs(diffs[idx[end + 1]]) == std::abs(diffs[idx[start]])) ++end;
    const auto first = static_cast<std::int64_t>(start + 1);
    const auto last = static_cast<std::int64_t>(end + 1);
    for (std::size_t k = start; k <= end; ++k) doubled_rank[idx[k]] = first + last;
    const double t = static_cast<double>(end - start + 1);
    tie_term += t * t * t - t;
    start = end + 1;
  }

  std::int64_t total = 0;
  std::int64_t plus = 0;
  for (std::size_t i = 0; i < out.n; ++i) {
    total += doubled_rank[i];
    if (diffs[i] > 0.0) plus += doubled_rank[i];
  }
  out.w_plus = static_cast<double>(plus) / 2.0;
  out.w = std::min(out.w_plus, static_cast<double>(total - plus) / 2.0);
  const std::int64_t observed = std::abs(2 * plus - total);

  if (out.n <= 12) {
    out.exact = true;
    // Subset-sum distribution of doubled ranks over all 2^n sign patterns.
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(total) + 1, 0);
    ways[0] = 1;
    std::int64_t reach = 0;
    for (std::int64_t r : doubled_rank) {
      for (std::int64_t s = reach; s >= 0; --s) {
        if (ways[static_cast<std::size_t>(s)] != 0) ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
      }
      reach += r;
    }
    std::uint64_t extreme = 0;
    for (std::int64_t s = 0; s <= total; ++s) {
      if (std::abs(2 * s - total) >= observed) extreme += ways[static_cast<std::size_t>(s)];
    }
    out.p = static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(out.n));
    return out;
  }

  out.exact = false;
  const double n = static_cast<double>(out.n);
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) return out;
  const double z = (std::abs(out.w_plus - mean) - 0.5) / std::sqrt(var);
  out.p = z <= 0.0 ? 1.0 : std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

}  // namespace bfkit
