#include <algorithm>
#include <cmath>
#include <string>

#include "bfkit/rng.hpp"
#include "bfkit/solver.hpp"
#include "solver_detail.hpp"

namespace bfkit {
namespace {

bool strictly_spread(const ClusterCenters& c, double epsilon) {
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (!(c[k] - c[k - 1] > epsilon)) return false;
  }
  return true;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs_diff(const MembershipMap& a, const MembershipMap& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.clusters(); ++i) m = std::max(m, max_abs_diff(a.plane(i), b.plane(i)));
  return m;
}

}  // namespace

ClusterCenters initial_centers(const Image2D& image, const Mask& mask, std::size_t clusters,
                               double epsilon) {
  require_same_shape(image, mask, "image vs mask");
  std::vector<double> fg;
  fg.reserve(mask.count());
  for (std::size_t r = 0; r < image.size(); ++r) {
    if (mask[r]) fg.push_back(image[r]);
  }
  if (fg.empty()) throw DegenerateInputError("mask has no foreground pixels");
  std::sort(fg.begin(), fg.end());

  const auto n = static_cast<double>(fg.size());
  ClusterCenters centers(clusters);
  for (std::size_t k = 0; k < clusters; ++k) {
    const double q = (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(clusters));
    const auto idx = std::min(fg.size() - 1, static_cast<std::size_t>(std::floor(q * n)));
    centers[k] = fg[idx];
  }
  if (strictly_spread(centers, epsilon)) return centers;

  const double lo = fg.front();
  const double hi = fg.back();
  if (!(hi - lo > epsilon * static_cast<double>(clusters))) {
    throw DegenerateInputError("foreground intensities are constant; cannot initialize clusters");
  }
  for (std::size_t k = 0; k < clusters; ++k) {
    const double q = (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(clusters));
    centers[k] = lo + q * (hi - lo);
  }
  return centers;
}

CorrectionResult correct(const Image2D& image, const Mask& mask, const SolverConfig& cfg,
                         const IterationObserver& observer) {
  cfg.validate();
  require_same_shape(image, mask, "image vs mask");
  if (mask.count() == 0) throw DegenerateInputError("mask has no foreground pixels");
  image.validate();

  const MaskedFilter filter(mask, build_kernel(cfg.kernel_size, cfg.kernel_sigma));
  const UpdateParams params = UpdateParams::from(cfg);

  CorrectionResult result;
  result.centers = initial_centers(image, mask, cfg.clusters, cfg.epsilon);
  if (cfg.jitter) {
    Rng rng(stream_seed(cfg.seed, "solver.jitter"));
    for (auto& c : result.centers) c += rng.uniform(-1e-3, 1e-3);
    std::sort(result.centers.begin(), result.centers.end());
  }
  result.bias = BiasField::ones(image.width(), image.height());
  result.memberships = update_memberships(image, filter, result.centers, result.bias, params);

  double previous = energy(image, filter, result.memberships, result.centers, result.bias, cfg.fuzziness);
  result.report.initial_energy = previous;
  const std::size_t fg_count = mask.count();

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    const int iteration = static_cast<int>(it);
    try {
      IterationRecord rec;
      MembershipMap u = update_memberships(image, filter, result.centers, result.bias, params);

      CenterUpdate cu = update_centers(image, filter, u, result.bias, params);
      u = u.permuted(cu.order);
      ClusterCenters centers = std::move(cu.centers);

      BiasUpdate bu = update_bias(image, filter, u, centers, params);
      if (bu.floored * 100 > fg_count) {
        result.report.warnings.push_back("iteration " + std::to_string(it) +
                                         ": bias denominator floored on " +
                                         std::to_string(bu.floored) + " foreground pixels");
      }
      BiasField bias = std::move(bu.bias);

      if (cfg.tv_enabled) {
        // Adaptive weight: the change produced by the local update balanced
        // against the global roughness of its result.
        detail::CompensatedSum proxy;
        for (std::size_t r = 0; r < bias.size(); ++r) {
          if (!mask[r]) continue;
          const double d = bias[r] - result.bias[r];
          proxy.add(d * d);
        }
        rec.loss_tv = tv_energy(bias, mask, cfg.tv_variant);
        const double loss_bias = proxy.value();
        rec.lambda = (loss_bias == 0.0 && rec.loss_tv == 0.0)
                         ? 0.0
                         : loss_bias / std::max(rec.loss_tv, cfg.epsilon);
        bias = tv_smooth_step(bias, mask, rec.lambda, cfg.tv_step_size, cfg.tv_steps, cfg.epsilon,
                              cfg.tv_variant);
      }

      NormalizedBias nb = normalize_bias(bias, mask);
      for (auto& c : centers) c *= nb.scale;

      rec.energy = energy(image, filter, u, centers, nb.bias, cfg.fuzziness);
      if (!std::isfinite(rec.energy)) {
        throw NumericalError("non-finite energy at iteration " + std::to_string(it));
      }
      if (!cfg.tv_enabled) rec.loss_tv = tv_energy(nb.bias, mask, cfg.tv_variant);
      rec.dmax_b = max_abs_diff(nb.bias.values(), result.bias.values());
      rec.dmax_u = max_abs_diff(u, result.memberships);

      result.memberships = std::move(u);
      result.centers = std::move(centers);
      result.bias = std::move(nb.bias);
      result.report.iterations.push_back(rec);
      if (observer) observer(it, rec);

      const double change = std::abs(rec.energy - previous);
      const double scale = std::abs(previous);
      previous = rec.energy;
      if (change == 0.0 || change < cfg.tol * scale) {
        result.report.stop = StopReason::converged;
        break;
      }
    } catch (const DegenerateClusterError& e) {
      throw DegenerateClusterError(e.cluster(), iteration);
    }
  }

  // Memberships consistent with the returned centers and bias.
  if (!result.report.iterations.empty()) {
    result.memberships = update_memberships(image, filter, result.centers, result.bias, params);
  }

  result.corrected = image;
  for (std::size_t r = 0; r < image.size(); ++r) {
    if (mask[r]) result.corrected[r] = image[r] / std::max(result.bias[r], cfg.epsilon);
  }
  return result;
}

ReconstructionTargets reconstruction_targets(const Image2D& image, const Mask& mask,
                                             const MembershipMap& u_pred, const Grid<double>& b_pred,
                                             const SolverConfig& cfg) {
  cfg.validate();
  const MaskedFilter filter(mask, build_kernel(cfg.kernel_size, cfg.kernel_sigma));
  const UpdateParams params = UpdateParams::from(cfg);

  CenterUpdate cu = update_centers(image, filter, u_pred, b_pred, params);
  // Centers in the predicted map's label order.
  ClusterCenters by_label(cu.centers.size());
  for (std::size_t k = 0; k < cu.order.size(); ++k) by_label[cu.order[k]] = cu.centers[k];

  ReconstructionTargets out;
  out.memberships = update_memberships(image, filter, by_label, b_pred, params);
  out.bias = update_bias(image, filter, u_pred, by_label, params).bias;
  out.centers = std::move(cu.centers);
  out.order = std::move(cu.order);
  return out;
}

}  // namespace bfkit
