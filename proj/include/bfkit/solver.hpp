#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bfkit/grid.hpp"
#include "bfkit/kernel.hpp"

namespace bfkit {

// Distance used by the membership update.
//  literal: d_i(r) = (I(r) - c_i (K*b)(r))^2
//  exact:   d_i(s) = sum_r w(r,s) (I(s) - b(r) c_i)^2, the true block minimizer
enum class MembershipMode { literal, exact };

// How the inner integral over r in the center update is evaluated.
//  adjoint:   sum_r w(r,s) b(r), consistent with the energy
//  symmetric: sum_t w(s,t) b(t), i.e. the forward filter at s
enum class CenterConvention { adjoint, symmetric };

// squared_grad: sum of squared forward differences.
// laplacian:    sum of second differences (signed).
enum class TvVariant { squared_grad, laplacian };

std::string_view to_string(MembershipMode mode);
std::string_view to_string(CenterConvention convention);
std::string_view to_string(TvVariant variant);
MembershipMode parse_membership_mode(std::string_view name);
CenterConvention parse_center_convention(std::string_view name);
TvVariant parse_tv_variant(std::string_view name);

// Strictly positive on the foreground, 1 on the background.
class BiasField : public Grid<double> {
 public:
  using Grid<double>::Grid;
  BiasField() = default;
  explicit BiasField(Grid<double> grid) : Grid<double>(std::move(grid)) {}

  static BiasField ones(std::size_t width, std::size_t height) { return BiasField(width, height, 1.0); }
};

// N stacked row-major probability planes u_i(r).
class MembershipMap {
 public:
  MembershipMap() = default;
  MembershipMap(std::size_t clusters, std::size_t width, std::size_t height)
      : clusters_(clusters), width_(width), height_(height), data_(clusters * width * height, 0.0) {}

  std::size_t clusters() const noexcept { return clusters_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixels() const noexcept { return width_ * height_; }

  double& operator()(std::size_t cluster, std::size_t index) { return data_[cluster * pixels() + index]; }
  double operator()(std::size_t cluster, std::size_t index) const { return data_[cluster * pixels() + index]; }

  std::span<double> plane(std::size_t cluster) { return {data_.data() + cluster * pixels(), pixels()}; }
  std::span<const double> plane(std::size_t cluster) const {
    return {data_.data() + cluster * pixels(), pixels()};
  }
  RealGrid plane_grid(std::size_t cluster) const;
  void set_plane(std::size_t cluster, const Grid<double>& values);

  // Plane k of the result is plane order[k] of this map.
  MembershipMap permuted(std::span<const std::size_t> order) const;

  template <typename T>
  bool same_shape(const Grid<T>& grid) const noexcept {
    return width_ == grid.width() && height_ == grid.height();
  }
  bool operator==(const MembershipMap&) const = default;

 private:
  std::size_t clusters_ = 0;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

using ClusterCenters = std::vector<double>;

struct SolverConfig {
  std::size_t clusters = 4;
  double fuzziness = 2.0;
  int kernel_size = 17;
  double kernel_sigma = 4.0;
  std::size_t max_iters = 100;
  double tol = 1e-5;
  bool tv_enabled = true;
  TvVariant tv_variant = TvVariant::squared_grad;
  std::size_t tv_steps = 5;
  double tv_step_size = 0.1;
  double epsilon = 1e-10;
  std::uint64_t seed = 0;
  bool jitter = false;
  MembershipMode membership_mode = MembershipMode::literal;
  CenterConvention center_convention = CenterConvention::adjoint;

  void validate() const;
};

// Scalars shared by the closed-form updates.
struct UpdateParams {
  double fuzziness = 2.0;
  double epsilon = 1e-10;
  MembershipMode membership_mode = MembershipMode::literal;
  CenterConvention center_convention = CenterConvention::adjoint;

  static UpdateParams from(const SolverConfig& cfg) {
    return {cfg.fuzziness, cfg.epsilon, cfg.membership_mode, cfg.center_convention};
  }
};

struct IterationRecord {
  double energy = 0.0;
  double loss_tv = 0.0;
  double lambda = 0.0;
  double dmax_b = 0.0;
  double dmax_u = 0.0;
};

enum class StopReason { converged, max_iters };
std::string_view to_string(StopReason reason);

struct EnergyReport {
  double initial_energy = 0.0;
  std::vector<IterationRecord> iterations;
  StopReason stop = StopReason::max_iters;
  std::vector<std::string> warnings;
};

// sum_r sum_i sum_s w(r,s) u_i(s)^p (I(s) - b(r) c_i)^2 over the foreground.
double energy(const Image2D& image, const MaskedFilter& filter, const MembershipMap& u,
              const ClusterCenters& centers, const Grid<double>& bias, double fuzziness);

struct CenterUpdate {
  ClusterCenters centers;          // ascending
  std::vector<std::size_t> order;  // centers[k] was computed for input cluster order[k]
};

// Closed-form center update; throws DegenerateClusterError for an empty cluster.
CenterUpdate update_centers(const Image2D& image, const MaskedFilter& filter, const MembershipMap& u,
                            const Grid<double>& bias, const UpdateParams& params);

// Closed-form fuzzy membership update. Background rows are all zero.
MembershipMap update_memberships(const Image2D& image, const MaskedFilter& filter,
                                 const ClusterCenters& centers, const Grid<double>& bias,
                                 const UpdateParams& params);

struct BiasUpdate {
  BiasField bias;
  std::size_t floored = 0;  // foreground pixels whose denominator hit epsilon
};

BiasUpdate update_bias(const Image2D& image, const MaskedFilter& filter, const MembershipMap& u,
                       const ClusterCenters& centers, const UpdateParams& params);

double tv_energy(const Grid<double>& bias, const Mask& mask,
                 TvVariant variant = TvVariant::squared_grad);

// Explicit gradient steps on lambda * tv_energy over the foreground. A step
// that would raise tv_energy is halved up to six times and skipped after that.
BiasField tv_smooth_step(const Grid<double>& bias, const Mask& mask, double lambda, double step,
                         std::size_t steps, double epsilon = 1e-10,
                         TvVariant variant = TvVariant::squared_grad);

struct NormalizedBias {
  BiasField bias;
  double scale = 1.0;  // bias = input / scale; multiply centers by scale
};

NormalizedBias normalize_bias(const Grid<double>& bias, const Mask& mask);

// Quantile initialization at (2k-1)/(2N); falls back to evenly spaced centers
// over the foreground range when quantiles coincide.
ClusterCenters initial_centers(const Image2D& image, const Mask& mask, std::size_t clusters,
                               double epsilon);

struct CorrectionResult {
  Image2D corrected;
  BiasField bias;
  MembershipMap memberships;
  ClusterCenters centers;
  EnergyReport report;
};

// Called after every completed iteration with its zero-based index.
using IterationObserver = std::function<void(std::size_t, const IterationRecord&)>;

CorrectionResult correct(const Image2D& image, const Mask& mask, const SolverConfig& cfg,
                         const IterationObserver& observer = {});

struct ReconstructionTargets {
  MembershipMap memberships;       // in the label order of the predicted map
  BiasField bias;
  ClusterCenters centers;          // ascending
  std::vector<std::size_t> order;  // centers[k] belongs to predicted label order[k]
};

ReconstructionTargets reconstruction_targets(const Image2D& image, const Mask& mask,
                                             const MembershipMap& u_pred, const Grid<double>& b_pred,
                                             const SolverConfig& cfg);

struct Losses {
  double loss_clus = 0.0;
  double loss_bias = 0.0;
  double loss_tv = 0.0;
  double lambda = 0.0;
  double total_bias_loss = 0.0;
};

Losses losses(const MembershipMap& u_pred, const MembershipMap& u_target, const Grid<double>& b_pred,
              const Grid<double>& b_target, const Mask& mask, double epsilon = 1e-10,
              TvVariant variant = TvVariant::squared_grad);

}  // namespace bfkit
