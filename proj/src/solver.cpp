#include "bfkit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "solver_detail.hpp"

namespace bfkit {

using detail::CompensatedSum;
using detail::membership_powers;

std::string_view to_string(MembershipMode mode) {
  return mode == MembershipMode::literal ? "literal" : "exact";
}
std::string_view to_string(CenterConvention convention) {
  return convention == CenterConvention::adjoint ? "adjoint" : "symmetric";
}
std::string_view to_string(TvVariant variant) {
  return variant == TvVariant::squared_grad ? "squared_grad" : "laplacian";
}
std::string_view to_string(StopReason reason) {
  return reason == StopReason::converged ? "converged" : "max_iters";
}

MembershipMode parse_membership_mode(std::string_view name) {
  if (name == "literal") return MembershipMode::literal;
  if (name == "exact") return MembershipMode::exact;
  throw ParameterError("unknown membership mode '" + std::string(name) + "'");
}
CenterConvention parse_center_convention(std::string_view name) {
  if (name == "adjoint") return CenterConvention::adjoint;
  if (name == "symmetric") return CenterConvention::symmetric;
  throw ParameterError("unknown center convention '" + std::string(name) + "'");
}
TvVariant parse_tv_variant(std::string_view name) {
  if (name == "squared_grad") return TvVariant::squared_grad;
  if (name == "laplacian") return TvVariant::laplacian;
  throw ParameterError("unknown tv variant '" + std::string(name) + "'");
}

RealGrid MembershipMap::plane_grid(std::size_t cluster) const {
  const auto p = plane(cluster);
  return RealGrid(width_, height_, std::vector<double>(p.begin(), p.end()));
}

void MembershipMap::set_plane(std::size_t cluster, const Grid<double>& values) {
  if (!same_shape(values)) throw ParameterError("membership plane has wrong dimensions");
  std::copy(values.values().begin(), values.values().end(), plane(cluster).begin());
}

MembershipMap MembershipMap::permuted(std::span<const std::size_t> order) const {
  if (order.size() != clusters_) throw ParameterError("permutation length does not match clusters");
  MembershipMap out(clusters_, width_, height_);
  for (std::size_t k = 0; k < clusters_; ++k) {
    const auto src = plane(order[k]);
    std::copy(src.begin(), src.end(), out.plane(k).begin());
  }
  return out;
}

void SolverConfig::validate() const {
  std::vector<std::string> problems;
  if (clusters < 2) problems.push_back("clusters must be >= 2");
  if (!(fuzziness > 1.0)) problems.push_back("fuzziness must be > 1");
  if (!(tol > 0.0)) problems.push_back("tol must be > 0");
  if (!(epsilon > 0.0)) problems.push_back("epsilon must be > 0");
  if (!(tv_step_size >= 0.0)) problems.push_back("tv_step_size must be >= 0");
  if (problems.empty()) return;
  std::string msg = "invalid solver config:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw ParameterError(msg);
}

namespace {

void check_inputs(const Image2D& image, const MaskedFilter& filter, const MembershipMap* u,
                  const Grid<double>* bias) {
  require_same_shape(image, filter.mask(), "image vs mask");
  if (u != nullptr && !u->same_shape(image)) throw ParameterError("dimension mismatch: memberships vs image");
  if (bias != nullptr) require_same_shape(image, *bias, "image vs bias");
}

void check_distinct(const ClusterCenters& centers, double epsilon) {
  ClusterCenters sorted = centers;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (!(sorted[k] - sorted[k - 1] > epsilon)) {
      throw ParameterError("cluster centers are not distinct (gap <= epsilon)");
    }
  }
}

// Fuzzy assignment from per-cluster distances at one pixel, written to `out`.
void assign_from_distances(std::span<const double> dist, double fuzziness, double epsilon,
                           std::span<double> out) {
  const std::size_t n = dist.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i] == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      out[i] = 1.0;
      return;
    }
  }
  double dmin = std::max(dist[0], epsilon);
  for (std::size_t i = 1; i < n; ++i) dmin = std::min(dmin, std::max(dist[i], epsilon));
  const double exponent = 1.0 / (fuzziness - 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // (dmin/d_i)^(1/(p-1)) lies in (0, 1], so nothing overflows.
    const double ratio = dmin / std::max(dist[i], epsilon);
    out[i] = exponent == 1.0 ? ratio : std::pow(ratio, exponent);
    total += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= total;
}

}  // namespace

double energy(const Image2D& image, const MaskedFilter& filter, const MembershipMap& u,
              const ClusterCenters& centers, const Grid<double>& bias, double fuzziness) {
  check_inputs(image, filter, &u, &bias);
  if (centers.size() != u.clusters()) throw ParameterError("centers/memberships cluster count mismatch");
  const Mask& mask = filter.mask();
  const auto up = membership_powers(u, mask, fuzziness);
  const KernelSpec& k = filter.kernel();
  const int h = k.radius();
  const auto width = static_cast<std::ptrdiff_t>(image.width());
  const auto height = static_cast<std::ptrdiff_t>(image.height());
  const std::size_t n = centers.size();

  CompensatedSum total;
  for (std::ptrdiff_t row = 0; row < height; ++row) {
    for (std::ptrdiff_t col = 0; col < width; ++col) {
      if (!mask(row, col)) continue;
      const double b = bias(row, col);
      double acc = 0.0;
      for (std::ptrdiff_t sr = std::max<std::ptrdiff_t>(0, row - h);
           sr <= std::min<std::ptrdiff_t>(height - 1, row + h); ++sr) {
        for (std::ptrdiff_t sc = std::max<std::ptrdiff_t>(0, col - h);
             sc <= std::min<std::ptrdiff_t>(width - 1, col + h); ++sc) {
          if (!mask(sr, sc)) continue;
          const std::size_t s = static_cast<std::size_t>(sr * width + sc);
          const double intensity = image[s];
          double inner = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double residual = intensity - b * centers[i];
            inner += up[i][s] * residual * residual;
          }
          acc += k.weight(static_cast<int>(sr - row), static_cast<int>(sc - col)) * inner;
        }
      }
      total.add(acc / filter.normalizer()(row, col));
    }
  }
  return total.value();
}

CenterUpdate update_centers(const Image2D& image, const MaskedFilter& filter, const MembershipMap& u,
                            const Grid<double>& bias, const UpdateParams& params) {
  check_inputs(image, filter, &u, &bias);
  const Mask& mask = filter.mask();
  RealGrid b(bias.width(), bias.height());
  RealGrid b2(bias.width(), bias.height());
  for (std::size_t r = 0; r < b.size(); ++r) {
    b[r] = bias[r];
    b2[r] = bias[r] * bias[r];
  }
  const bool adjoint = params.center_convention == CenterConvention::adjoint;
  const RealGrid fb = adjoint ? filter.apply_adjoint(b) : filter.apply(b);
  const RealGrid fb2 = adjoint ? filter.apply_adjoint(b2) : filter.apply(b2);
  const auto up = membership_powers(u, mask, params.fuzziness);

  ClusterCenters raw(u.clusters());
  for (std::size_t i = 0; i < u.clusters(); ++i) {
    CompensatedSum num;
    CompensatedSum den;
    for (std::size_t s = 0; s < image.size(); ++s) {
      if (!mask[s]) continue;
      num.add(image[s] * up[i][s] * fb[s]);
      den.add(up[i][s] * fb2[s]);
    }
    if (!(den.value() > params.epsilon)) throw DegenerateClusterError(i);
    raw[i] = num.value() / den.value();
  }

  CenterUpdate out;
  out.order.resize(raw.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  out.centers.reserve(raw.size());
  for (std::size_t k : out.order) out.centers.push_back(raw[k]);
  return out;
}

MembershipMap update_memberships(const Image2D& image, const MaskedFilter& filter,
                                 const ClusterCenters& centers, const Grid<double>& bias,
                                 const UpdateParams& params) {
  check_inputs(image, filter, nullptr, &bias);
  if (centers.empty()) throw ParameterError("no cluster centers");
  check_distinct(centers, params.epsilon);
  const Mask& mask = filter.mask();
  const std::size_t n = centers.size();
  MembershipMap u(n, image.width(), image.height());
  std::vector<double> dist(n);
  std::vector<double> row_out(n);

  if (params.membership_mode == MembershipMode::literal) {
    RealGrid b(bias.width(), bias.height());
    for (std::size_t r = 0; r < b.size(); ++r) b[r] = bias[r];
    const RealGrid kb = filter.apply(b);
    for (std::size_t r = 0; r < image.size(); ++r) {
      if (!mask[r]) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const double residual = image[r] - centers[i] * kb[r];
        dist[i] = residual * residual;
      }
      assign_from_distances(dist, params.fuzziness, params.epsilon, row_out);
      for (std::size_t i = 0; i < n; ++i) u(i, r) = row_out[i];
    }
    return u;
  }

  // exact: d_i(s) = sum_r g(r-s) mask(r) / Z(r) * (I(s) - b(r) c_i)^2
  const KernelSpec& k = filter.kernel();
  const int h = k.radius();
  const auto width = static_cast<std::ptrdiff_t>(image.width());
  const auto height = static_cast<std::ptrdiff_t>(image.height());
  RealGrid inv_norm(image.width(), image.height());
  for (std::size_t r = 0; r < inv_norm.size(); ++r) {
    inv_norm[r] = mask[r] ? 1.0 / filter.normalizer()[r] : 0.0;
  }
  for (std::ptrdiff_t row = 0; row < height; ++row) {
    for (std::ptrdiff_t col = 0; col < width; ++col) {
      if (!mask(row, col)) continue;
      const double intensity = image(row, col);
      std::fill(dist.begin(), dist.end(), 0.0);
      for (std::ptrdiff_t rr = std::max<std::ptrdiff_t>(0, row - h);
           rr <= std::min<std::ptrdiff_t>(height - 1, row + h); ++rr) {
        for (std::ptrdiff_t rc = std::max<std::ptrdiff_t>(0, col - h);
             rc <= std::min<std::ptrdiff_t>(width - 1, col + h); ++rc) {
          const std::size_t r = static_cast<std::size_t>(rr * width + rc);
          if (!mask[r]) continue;
          const double w = k.weight(static_cast<int>(rr - row), static_cast<int>(rc - col)) * inv_norm[r];
          for (std::size_t i = 0; i < n; ++i) {
            const double residual = intensity - bias[r] * centers[i];
            dist[i] += w * residual * residual;
          }
        }
      }
      assign_from_distances(dist, params.fuzziness, params.epsilon, row_out);
      const auto idx = static_cast<std::size_t>(row * width + col);
      for (std::size_t i = 0; i < n; ++i) u(i, idx) = row_out[i];
    }
  }
  return u;
}

BiasUpdate update_bias(const Image2D& image, const MaskedFilter& filter, const MembershipMap& u,
                       const ClusterCenters& centers, const UpdateParams& params) {
  check_inputs(image, filter, &u, nullptr);
  if (centers.size() != u.clusters()) throw ParameterError("centers/memberships cluster count mismatch");
  const Mask& mask = filter.mask();
  const auto up = membership_powers(u, mask, params.fuzziness);
  RealGrid num_field(image.width(), image.height());
  RealGrid den_field(image.width(), image.height());
  for (std::size_t s = 0; s < image.size(); ++s) {
    if (!mask[s]) continue;
    double cu = 0.0;
    double c2u = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      cu += centers[i] * up[i][s];
      c2u += centers[i] * centers[i] * up[i][s];
    }
    num_field[s] = image[s] * cu;
    den_field[s] = c2u;
  }
  const RealGrid num = filter.apply(num_field);
  const RealGrid den = filter.apply(den_field);

  BiasUpdate out{BiasField::ones(image.width(), image.height()), 0};
  for (std::size_t r = 0; r < image.size(); ++r) {
    if (!mask[r]) continue;
    double d = den[r];
    if (!(d > params.epsilon)) {
      d = params.epsilon;
      ++out.floored;
    }
    out.bias[r] = std::max(num[r] / d, params.epsilon);
  }
  return out;
}

NormalizedBias normalize_bias(const Grid<double>& bias, const Mask& mask) {
  require_same_shape(bias, mask, "bias vs mask");
  CompensatedSum sum;
  std::size_t count = 0;
  for (std::size_t r = 0; r < bias.size(); ++r) {
    if (!mask[r]) continue;
    sum.add(bias[r]);
    ++count;
  }
  if (count == 0) throw DegenerateInputError("mask has no foreground pixels");
  const double mean = sum.value() / static_cast<double>(count);
  if (!(mean > 0.0)) throw NumericalError("bias field mean is not positive");
  NormalizedBias out{BiasField::ones(bias.width(), bias.height()), mean};
  for (std::size_t r = 0; r < bias.size(); ++r) {
    if (mask[r]) out.bias[r] = bias[r] / mean;
  }
  return out;
}

Losses losses(const MembershipMap& u_pred, const MembershipMap& u_target, const Grid<double>& b_pred,
              const Grid<double>& b_target, const Mask& mask, double epsilon, TvVariant variant) {
  require_same_shape(b_pred, mask, "predicted bias vs mask");
  require_same_shape(b_target, mask, "target bias vs mask");
  if (!u_pred.same_shape(mask) || !u_target.same_shape(mask) ||
      u_pred.clusters() != u_target.clusters()) {
    throw ParameterError("dimension mismatch: membership maps");
  }
  CompensatedSum clus;
  CompensatedSum bias;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (!mask[r]) continue;
    for (std::size_t i = 0; i < u_pred.clusters(); ++i) {
      const double d = u_target(i, r) - u_pred(i, r);
      clus.add(d * d);
    }
    const double d = b_target[r] - b_pred[r];
    bias.add(d * d);
  }
  Losses out;
  out.loss_clus = clus.value();
  out.loss_bias = bias.value();
  out.loss_tv = tv_energy(b_pred, mask, variant);
  if (out.loss_bias == 0.0 && out.loss_tv == 0.0) {
    out.lambda = 0.0;
  } else {
    out.lambda = out.loss_bias / std::max(out.loss_tv, epsilon);
  }
  out.total_bias_loss = out.loss_bias + out.lambda * out.loss_tv;
  return out;
}

}  // namespace bfkit
