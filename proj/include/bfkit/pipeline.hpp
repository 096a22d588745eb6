#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bfkit/config.hpp"
#include "bfkit/simulate.hpp"
#include "bfkit/solver.hpp"

namespace bfkit {

// One simulated acquisition: phantom, Legendre bias and their product.
struct CaseSpec {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t classes = 4;
  PhantomGeometry geometry = PhantomGeometry::nested_ellipses;
  int order = 3;
  double lo = 0.3;
  double hi = 1.7;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

// Levels k/n for k = 1..n.
std::vector<double> default_levels(std::size_t classes);

struct PhantomCase {
  Phantom phantom;
  BiasField true_bias;
  Image2D corrupted;
};

PhantomCase make_case(const CaseSpec& spec);

// Scales the image to unit foreground maximum, runs correct() and maps the
// corrected image and centers back to the input scale.
CorrectionResult correct_image(const Image2D& image, const Mask& mask, const SolverConfig& cfg,
                               const IterationObserver& observer = {});

struct CaseMetrics {
  std::uint64_t seed = 0;
  double psnr_corrupted = 0.0;
  double psnr_corrected = 0.0;
  // Both images scaled to unit foreground maximum first: the solver fixes
  // the bias to mean 1, so the absolute intensity scale is not identified.
  double psnr_norm_corrupted = 0.0;
  double psnr_norm_corrected = 0.0;
  double ssim_corrupted = 0.0;
  double ssim_corrected = 0.0;
  std::vector<double> cv_corrupted;  // per tissue class, over label and mask
  std::vector<double> cv_corrected;
  double bias_correlation = 0.0;     // Pearson over the mask
  std::size_t iterations = 0;
};

CaseMetrics evaluate_case(const PhantomCase& sample, const Mask& mask, const CorrectionResult& result);

struct BenchOptions {
  CaseSpec base;
  std::vector<std::uint64_t> seeds;
  unsigned threads = 0;  // 0: BFKIT_THREADS or hardware concurrency
};

// simulate -> mask -> correct -> metrics per seed. Rows come back ordered by
// seed position regardless of which worker finished first.
std::vector<CaseMetrics> run_bench(const BenchOptions& options, const RunConfig& cfg);
std::string bench_csv(const std::vector<CaseMetrics>& rows);

struct SweepRow {
  std::size_t clusters = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  std::vector<double> cv;  // per tissue label
};

std::vector<SweepRow> sweep_clusters(const Image2D& image, const Mask& mask, const SolverConfig& cfg,
                                     const Image2D& clean, const std::vector<Mask>& tissues,
                                     std::size_t first, std::size_t last);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// "0..9" (inclusive) or a comma list "1,4,7".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
// "2..6" inclusive or a single count.
std::pair<std::size_t, std::size_t> parse_count_range(std::string_view text);

unsigned worker_count();
std::string format_number(double value);

}  // namespace bfkit
