// bfkit command-line front end: simulate, mask, correct, targets, metrics,
// bench and sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bfkit/config.hpp"
#include "bfkit/imgio.hpp"
#include "bfkit/masking.hpp"
#include "bfkit/metrics.hpp"
#include "bfkit/pipeline.hpp"
#include "bfkit/simulate.hpp"
#include "bfkit/solver.hpp"

namespace fs = std::filesystem;
using namespace bfkit;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// CSV/text goes to a file when a path is given, stdout otherwise.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

RunConfig config_from(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

Mask mask_for(const Image2D& image, const std::string& mask_path, const RunConfig& cfg) {
  if (!mask_path.empty()) {
    Mask m = read_mask(mask_path);
    require_same_shape(image, m, "image vs mask");
    return m;
  }
  return foreground_mask(image, cfg.mask_levels, cfg.mask_bins);
}

// 8-bit preview scaled by the image maximum.
Grid<double> preview(const Grid<double>& img) {
  double peak = 0.0;
  for (double v : img.values()) peak = std::max(peak, v);
  Grid<double> out = img;
  for (auto& v : out.values()) v = peak > 0.0 ? std::round(255.0 * v / peak) : 0.0;
  return out;
}

// Label masks labels_1.pgm, labels_2.pgm, ... from a directory (labels_0 is
// background and skipped).
std::vector<Mask> read_tissue_labels(const fs::path& dir) {
  std::vector<Mask> labels;
  for (int k = 1;; ++k) {
    const fs::path p = dir / ("labels_" + std::to_string(k) + ".pgm");
    if (!fs::exists(p)) break;
    labels.push_back(read_mask(p));
  }
  if (labels.empty()) throw IoError("no labels_<k>.pgm files found in '" + dir.string() + "'");
  return labels;
}

std::string report_csv(const EnergyReport& report) {
  std::string out = "iter,E,loss_tv,lambda,dmax_b,dmax_u\n";
  for (std::size_t i = 0; i < report.iterations.size(); ++i) {
    const auto& r = report.iterations[i];
    out += std::to_string(i) + ',' + format_number(r.energy) + ',' + format_number(r.loss_tv) + ',' +
           format_number(r.lambda) + ',' + format_number(r.dmax_b) + ',' + format_number(r.dmax_u) + '\n';
  }
  return out;
}

struct SimulateArgs {
  std::size_t width = 128;
  std::size_t height = 128;
  std::size_t classes = 4;
  int order = 3;
  std::string range = "0.3,1.7";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string geometry = "nested-ellipses";
  std::string out = ".";
};

std::pair<double, double> parse_range(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ParameterError("range must be 'lo,hi'");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ParameterError("range must be 'lo,hi', got '" + text + "'");
  }
}

CaseSpec case_spec(const SimulateArgs& a) {
  CaseSpec spec;
  spec.width = a.width;
  spec.height = a.height;
  spec.classes = a.classes;
  spec.geometry = parse_phantom_geometry(a.geometry);
  spec.order = a.order;
  std::tie(spec.lo, spec.hi) = parse_range(a.range);
  spec.noise = a.noise;
  spec.seed = a.seed;
  return spec;
}

void run_simulate(const SimulateArgs& a) {
  const PhantomCase sample = make_case(case_spec(a));
  const fs::path dir = a.out;
  ensure_dir(dir);
  write_image(dir / "clean.bf32", sample.phantom.clean, ImageFormat::bf32);
  write_image(dir / "bias.bf32", sample.true_bias, ImageFormat::bf32);
  write_image(dir / "corrupted.bf32", sample.corrupted, ImageFormat::bf32);
  for (std::size_t k = 0; k < sample.phantom.labels.size(); ++k) {
    write_mask(dir / ("labels_" + std::to_string(k) + ".pgm"), sample.phantom.labels[k]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bfkit: bias-field correction toolkit for 2D MR-like images"};
  app.set_version_flag("--version", std::string("bfkit ") + BFKIT_VERSION);
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  bool dump_config = false;
  bool verbose = false;
  app.add_option("--config", config_path, "run configuration JSON");
  app.add_flag("--dump-config", dump_config, "print the effective configuration and exit");
  app.add_flag("-v,--verbose", verbose, "log one line per solver iteration to stderr");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "phantom x Legendre bias (+ noise)");
  simulate->add_option("--width", sim.width);
  simulate->add_option("--height", sim.height);
  simulate->add_option("--classes", sim.classes);
  simulate->add_option("--order", sim.order, "Legendre order");
  simulate->add_option("--range", sim.range, "bias range lo,hi");
  simulate->add_option("--noise", sim.noise, "additive Gaussian sigma");
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--geometry", sim.geometry)->check(CLI::IsMember({"nested-ellipses", "voronoi-blobs"}));
  simulate->add_option("--out", sim.out, "output directory");

  std::string mask_in, mask_out = "mask.pgm";
  std::optional<std::size_t> mask_levels;
  std::optional<std::size_t> mask_bins;
  auto* mask_cmd = app.add_subcommand("mask", "multi-threshold Otsu foreground mask");
  mask_cmd->add_option("--in", mask_in)->required();
  mask_cmd->add_option("--levels", mask_levels, "number of thresholds (default 3)");
  mask_cmd->add_option("--bins", mask_bins, "histogram bins (default 256)");
  mask_cmd->add_option("--out", mask_out);

  std::string correct_in, correct_mask, correct_out;
  auto* correct_cmd = app.add_subcommand("correct", "estimate and remove the bias field");
  correct_cmd->add_option("--in", correct_in)->required();
  correct_cmd->add_option("--mask", correct_mask, "foreground mask (computed when absent)");
  correct_cmd->add_option("--out", correct_out, "output directory (default: io.output_dir)");

  std::string targets_in, targets_b, targets_mask, targets_out;
  std::vector<std::string> targets_u;
  auto* targets_cmd = app.add_subcommand("targets", "reconstruction targets and losses for predicted (u, b)");
  targets_cmd->add_option("--in", targets_in)->required();
  targets_cmd->add_option("--u", targets_u, "predicted membership planes, one file per cluster")->required();
  targets_cmd->add_option("--b", targets_b, "predicted bias field")->required();
  targets_cmd->add_option("--mask", targets_mask);
  targets_cmd->add_option("--out", targets_out);

  std::string m_ref, m_test, m_region, m_labels, m_out;
  std::vector<std::string> m_dice;
  double m_peak = 1.0;
  bool m_normalize = false;
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR, SSIM, CV and Dice");
  metrics_cmd->add_option("--ref", m_ref)->required();
  metrics_cmd->add_option("--test", m_test)->required();
  metrics_cmd->add_option("--region", m_region, "restrict PSNR/SSIM to a mask");
  metrics_cmd->add_option("--labels", m_labels, "directory of labels_<k>.pgm for per-class CV");
  metrics_cmd->add_option("--dice", m_dice, "two label masks to compare")->expected(2);
  metrics_cmd->add_option("--peak", m_peak, "PSNR/SSIM peak value");
  metrics_cmd->add_flag("--normalize", m_normalize, "scale both images to unit maximum over the region first");
  metrics_cmd->add_option("--out", m_out, "CSV path (stdout when absent)");

  SimulateArgs bench_case;
  bench_case.width = bench_case.height = 64;
  std::string bench_seeds = "0..9", bench_out;
  unsigned bench_threads = 0;
  auto* bench_cmd = app.add_subcommand("bench", "simulate -> correct -> metrics over seeds");
  bench_cmd->add_option("--seeds", bench_seeds, "'a..b' or comma list");
  bench_cmd->add_option("--width", bench_case.width);
  bench_cmd->add_option("--height", bench_case.height);
  bench_cmd->add_option("--classes", bench_case.classes);
  bench_cmd->add_option("--order", bench_case.order);
  bench_cmd->add_option("--range", bench_case.range);
  bench_cmd->add_option("--noise", bench_case.noise);
  bench_cmd->add_option("--geometry", bench_case.geometry)->check(CLI::IsMember({"nested-ellipses", "voronoi-blobs"}));
  bench_cmd->add_option("--threads", bench_threads, "workers (default BFKIT_THREADS or all cores)");
  bench_cmd->add_option("--out", bench_out, "CSV path (stdout when absent)");

  std::string sw_in, sw_clean, sw_labels, sw_mask, sw_range = "2..6", sw_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "correct with each cluster count and score against ground truth");
  sweep_cmd->add_option("--in", sw_in)->required();
  sweep_cmd->add_option("--clean", sw_clean)->required();
  sweep_cmd->add_option("--labels", sw_labels, "directory of labels_<k>.pgm")->required();
  sweep_cmd->add_option("--mask", sw_mask);
  sweep_cmd->add_option("--n", sw_range, "cluster counts 'a..b' within [2, 8]");
  sweep_cmd->add_option("--out", sw_out, "CSV path (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg = config_from(config_path);
    if (dump_config) {
      std::cout << dump_run_config(cfg);
      return 0;
    }
    const IterationObserver log_line = [&](std::size_t it, const IterationRecord& r) {
      if (!verbose) return;
      std::fprintf(stderr, "iter %zu E=%s tv=%s lambda=%s dmax_b=%s dmax_u=%s\n", it,
                   format_number(r.energy).c_str(), format_number(r.loss_tv).c_str(),
                   format_number(r.lambda).c_str(), format_number(r.dmax_b).c_str(),
                   format_number(r.dmax_u).c_str());
    };

    if (*simulate) {
      run_simulate(sim);
    } else if (*mask_cmd) {
      const Image2D image = read_image(mask_in);
      write_mask(mask_out, foreground_mask(image, mask_levels.value_or(cfg.mask_levels),
                                           mask_bins.value_or(cfg.mask_bins)));
    } else if (*correct_cmd) {
      const Image2D image = read_image(correct_in);
      const Mask mask = mask_for(image, correct_mask, cfg);
      const CorrectionResult result = correct_image(image, mask, cfg.solver, log_line);
      const fs::path dir = correct_out.empty() ? fs::path(cfg.output_dir) : fs::path(correct_out);
      ensure_dir(dir);
      write_image(dir / "corrected.bf32", result.corrected, ImageFormat::bf32);
      write_image(dir / "corrected.pgm", preview(result.corrected), ImageFormat::pgm8);
      write_image(dir / "bias.bf32", result.bias, ImageFormat::bf32);
      for (std::size_t k = 0; k < result.memberships.clusters(); ++k) {
        write_image(dir / ("membership_" + std::to_string(k) + ".bf32"), result.memberships.plane_grid(k),
                    ImageFormat::bf32);
      }
      write_text(dir / "report.csv", report_csv(result.report));
      for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*targets_cmd) {
      const Image2D raw = read_image(targets_in);
      const Mask mask = mask_for(raw, targets_mask, cfg);
      const Image2D image = normalize(raw, mask);
      MembershipMap u_pred(targets_u.size(), image.width(), image.height());
      for (std::size_t k = 0; k < targets_u.size(); ++k) u_pred.set_plane(k, read_image(targets_u[k]));
      const Image2D b_pred = read_image(targets_b);
      SolverConfig solver = cfg.solver;
      solver.clusters = targets_u.size();
      const ReconstructionTargets t = reconstruction_targets(image, mask, u_pred, b_pred, solver);
      const Losses l = losses(u_pred, t.memberships, b_pred, t.bias, mask, solver.epsilon, solver.tv_variant);
      const fs::path dir = targets_out.empty() ? fs::path(cfg.output_dir) : fs::path(targets_out);
      ensure_dir(dir);
      for (std::size_t k = 0; k < t.memberships.clusters(); ++k) {
        write_image(dir / ("u_target_" + std::to_string(k) + ".bf32"), t.memberships.plane_grid(k),
                    ImageFormat::bf32);
      }
      write_image(dir / "b_target.bf32", t.bias, ImageFormat::bf32);
      nlohmann::json j = {{"loss_clus", l.loss_clus}, {"loss_bias", l.loss_bias}, {"loss_tv", l.loss_tv},
                          {"lambda", l.lambda},       {"total_bias_loss", l.total_bias_loss},
                          {"centers", t.centers}};
      write_text(dir / "losses.json", j.dump(2) + "\n");
    } else if (*metrics_cmd) {
      Image2D ref = read_image(m_ref);
      Image2D test = read_image(m_test);
      std::optional<Mask> region;
      if (!m_region.empty()) region = read_mask(m_region);
      if (m_normalize) {
        const Mask scope = region ? *region : Mask::full(ref.width(), ref.height());
        ref = normalize(ref, scope);
        test = normalize(test, scope);
      }
      const Mask* rp = region ? &*region : nullptr;
      const std::string where = region ? "region" : "all";
      std::string csv = "metric,region,value\n";
      csv += "psnr," + where + ',' + format_number(psnr(ref, test, m_peak, rp)) + '\n';
      SsimParams sp;
      sp.peak = m_peak;
      csv += "ssim," + where + ',' + format_number(ssim(ref, test, sp, rp)) + '\n';
      if (!m_labels.empty()) {
        const auto labels = read_tissue_labels(m_labels);
        for (std::size_t k = 0; k < labels.size(); ++k) {
          csv += "cv," + std::to_string(k + 1) + ',' + format_number(cv(test, labels[k])) + '\n';
        }
      }
      if (m_dice.size() == 2) {
        csv += "dice,all," + format_number(dice(read_mask(m_dice[0]), read_mask(m_dice[1]))) + '\n';
      }
      emit(m_out, csv);
    } else if (*bench_cmd) {
      BenchOptions options;
      options.base = case_spec(bench_case);
      options.seeds = parse_seed_list(bench_seeds);
      options.threads = bench_threads;
      emit(bench_out, bench_csv(run_bench(options, cfg)));
    } else if (*sweep_cmd) {
      const Image2D image = read_image(sw_in);
      const Image2D clean = read_image(sw_clean);
      const Mask mask = mask_for(image, sw_mask, cfg);
      const auto [first, last] = parse_count_range(sw_range);
      const auto rows = sweep_clusters(image, mask, cfg.solver, clean, read_tissue_labels(sw_labels), first, last);
      emit(sw_out, sweep_csv(rows));
    } else {
      std::cout << app.help();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
