#include "bfkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "bfkit/imgio.hpp"
#include "bfkit/masking.hpp"
#include "bfkit/metrics.hpp"

namespace bfkit {

std::vector<double> default_levels(std::size_t classes) {
  std::vector<double> levels(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    levels[k] = static_cast<double>(k + 1) / static_cast<double>(classes);
  }
  return levels;
}

PhantomCase make_case(const CaseSpec& spec) {
  PhantomSpec ps;
  ps.width = spec.width;
  ps.height = spec.height;
  ps.levels = default_levels(spec.classes);
  ps.geometry = spec.geometry;
  ps.seed = spec.seed;

  LegendreSpec ls;
  ls.order = spec.order;
  ls.lo = spec.lo;
  ls.hi = spec.hi;
  ls.seed = spec.seed;

  PhantomCase out;
  out.phantom = phantom(ps);
  out.true_bias = legendre_bias(spec.width, spec.height, ls);
  out.corrupted = corrupt(out.phantom.clean, out.true_bias, spec.noise, spec.seed);
  return out;
}

CorrectionResult correct_image(const Image2D& image, const Mask& mask, const SolverConfig& cfg,
                               const IterationObserver& observer) {
  const double peak = foreground_max(image, mask);
  if (!(peak > 0.0)) throw DegenerateInputError("foreground maximum is zero");
  CorrectionResult result = correct(normalize(image, mask), mask, cfg, observer);
  for (auto& v : result.corrected.values()) v *= peak;
  for (auto& c : result.centers) c *= peak;
  return result;
}

CaseMetrics evaluate_case(const PhantomCase& sample, const Mask& mask, const CorrectionResult& result) {
  const Image2D& clean = sample.phantom.clean;
  CaseMetrics m;
  m.psnr_corrupted = psnr(clean, sample.corrupted);
  m.psnr_corrected = psnr(clean, result.corrected);
  m.psnr_norm_corrupted = psnr(clean, normalize(sample.corrupted, mask));
  m.psnr_norm_corrected = psnr(clean, normalize(result.corrected, mask));
  m.ssim_corrupted = ssim(clean, sample.corrupted);
  m.ssim_corrected = ssim(clean, result.corrected);
  for (std::size_t k = 1; k < sample.phantom.labels.size(); ++k) {
    // Pixels outside the mask are left untouched by design, so tissue CV
    // is measured where the correction acts.
    Mask tissue = sample.phantom.labels[k];
    for (std::size_t i = 0; i < tissue.size(); ++i) tissue[i] = tissue[i] && mask[i];
    if (tissue.count() == 0) continue;
    m.cv_corrupted.push_back(cv(sample.corrupted, tissue));
    m.cv_corrected.push_back(cv(result.corrected, tissue));
  }
  m.bias_correlation = pearson(result.bias, sample.true_bias, &mask);
  m.iterations = result.report.iterations.size();
  return m;
}

std::vector<CaseMetrics> run_bench(const BenchOptions& options, const RunConfig& cfg) {
  std::vector<CaseMetrics> rows(options.seeds.size());
  std::vector<std::exception_ptr> failures(options.seeds.size());
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < options.seeds.size(); i = next++) {
      try {
        CaseSpec spec = options.base;
        spec.seed = options.seeds[i];
        const PhantomCase sample = make_case(spec);
        const Mask mask = foreground_mask(sample.corrupted, cfg.mask_levels, cfg.mask_bins);
        SolverConfig solver = cfg.solver;
        solver.seed = spec.seed;
        const CorrectionResult result = correct_image(sample.corrupted, mask, solver);
        rows[i] = evaluate_case(sample, mask, result);
        rows[i].seed = spec.seed;
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const unsigned threads = std::max(
      1u, std::min<unsigned>(options.threads == 0 ? worker_count() : options.threads,
                             static_cast<unsigned>(std::max<std::size_t>(1, options.seeds.size()))));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return rows;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : summarize(v).mean;
}

}  // namespace

std::string bench_csv(const std::vector<CaseMetrics>& rows) {
  constexpr int kColumns = 10;
  std::string out =
      "seed,psnr_corrupted,psnr_corrected,psnr_norm_corrupted,psnr_norm_corrected,ssim_corrupted,"
      "ssim_corrected,cv_corrupted,cv_corrected,bias_corr,iterations\n";
  std::vector<double> cols[kColumns];
  for (const auto& r : rows) {
    const double values[kColumns] = {r.psnr_corrupted,      r.psnr_corrected,
                                     r.psnr_norm_corrupted, r.psnr_norm_corrected,
                                     r.ssim_corrupted,      r.ssim_corrected,
                                     mean_of(r.cv_corrupted), mean_of(r.cv_corrected),
                                     r.bias_correlation,    static_cast<double>(r.iterations)};
    out += std::to_string(r.seed);
    for (int c = 0; c < kColumns; ++c) {
      cols[c].push_back(values[c]);
      out += ',' + (c == kColumns - 1 ? std::to_string(r.iterations) : format_number(values[c]));
    }
    out += '\n';
  }
  std::string mean_row = "mean", std_row = "std", p_row = "wilcoxon_p";
  for (int c = 0; c < kColumns; ++c) {
    const Summary s = summarize(cols[c]);
    mean_row += ',' + format_number(s.mean);
    std_row += ',' + format_number(s.stddev);
    // Paired test of corrected against uncorrected, reported in the corrected column.
    const bool corrected_column = c == 1 || c == 3 || c == 5 || c == 7;
    p_row += ',';
    if (corrected_column) p_row += format_number(wilcoxon_signed_rank(cols[c - 1], cols[c]).p);
  }
  out += mean_row + '\n' + std_row + '\n' + p_row + '\n';
  return out;
}

std::vector<SweepRow> sweep_clusters(const Image2D& image, const Mask& mask, const SolverConfig& cfg,
                                     const Image2D& clean, const std::vector<Mask>& tissues,
                                     std::size_t first, std::size_t last) {
  if (first < 2 || last > 8 || first > last) throw ParameterError("cluster range must lie within [2, 8]");
  std::vector<SweepRow> rows;
  for (std::size_t n = first; n <= last; ++n) {
    SolverConfig c = cfg;
    c.clusters = n;
    const CorrectionResult result = correct_image(image, mask, c);
    SweepRow row;
    row.clusters = n;
    row.psnr = psnr(clean, result.corrected);
    row.ssim = ssim(clean, result.corrected);
    for (const Mask& t : tissues) row.cv.push_back(cv(result.corrected, t));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "N,psnr,ssim";
  const std::size_t tissues = rows.empty() ? 0 : rows.front().cv.size();
  for (std::size_t k = 0; k < tissues; ++k) out += ",cv_" + std::to_string(k + 1);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.clusters) + ',' + format_number(r.psnr) + ',' + format_number(r.ssim);
    for (double v : r.cv) out += ',' + format_number(v);
    out += '\n';
  }
  return out;
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParameterError("'" + std::string(text) + "' is not a non-negative integer");
  }
  return v;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const std::uint64_t a = parse_u64(text.substr(0, dots));
    const std::uint64_t b = parse_u64(text.substr(dots + 2));
    if (b < a) throw ParameterError("seed range end precedes start");
    for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
  }
  while (!text.empty()) {
    const auto comma = text.find(',');
    seeds.push_back(parse_u64(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (seeds.empty()) throw ParameterError("empty seed list");
  return seeds;
}

std::pair<std::size_t, std::size_t> parse_count_range(std::string_view text) {
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    return {parse_u64(text.substr(0, dots)), parse_u64(text.substr(dots + 2))};
  }
  const auto n = parse_u64(text);
  return {n, n};
}

unsigned worker_count() {
  if (const char* env = std::getenv("BFKIT_THREADS"); env != nullptr && *env != '\0') {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

}  // namespace bfkit
