#include <algorithm>
#include <cmath>

#include "bfkit/solver.hpp"
#include "solver_detail.hpp"

namespace bfkit {
namespace {

// Visits every forward-difference pair (p, q) with both pixels foreground.
template <typename Fn>
void for_each_pair(const Mask& mask, Fn&& fn) {
  const std::size_t width = mask.width();
  const std::size_t height = mask.height();
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t col = 0; col < width; ++col) {
      const std::size_t p = row * width + col;
      if (!mask[p]) continue;
      if (col + 1 < width && mask[p + 1]) fn(p, p + 1);
      if (row + 1 < height && mask[p + width]) fn(p, p + width);
    }
  }
}

// Visits every centered triple (a, p, c) along x and y with all three foreground.
template <typename Fn>
void for_each_triple(const Mask& mask, Fn&& fn) {
  const std::size_t width = mask.width();
  const std::size_t height = mask.height();
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t col = 0; col < width; ++col) {
      const std::size_t p = row * width + col;
      if (!mask[p]) continue;
      if (col > 0 && col + 1 < width && mask[p - 1] && mask[p + 1]) fn(p - 1, p, p + 1);
      if (row > 0 && row + 1 < height && mask[p - width] && mask[p + width]) fn(p - width, p, p + width);
    }
  }
}

RealGrid tv_gradient(const Grid<double>& bias, const Mask& mask, TvVariant variant) {
  RealGrid grad(bias.width(), bias.height());
  if (variant == TvVariant::squared_grad) {
    for_each_pair(mask, [&](std::size_t p, std::size_t q) {
      const double diff = bias[q] - bias[p];
      grad[p] -= 2.0 * diff;
      grad[q] += 2.0 * diff;
    });
  } else {
    for_each_triple(mask, [&](std::size_t a, std::size_t p, std::size_t c) {
      grad[a] += 1.0;
      grad[p] -= 2.0;
      grad[c] += 1.0;
    });
  }
  return grad;
}

}  // namespace

double tv_energy(const Grid<double>& bias, const Mask& mask, TvVariant variant) {
  require_same_shape(bias, mask, "bias vs mask");
  detail::CompensatedSum total;
  if (variant == TvVariant::squared_grad) {
    for_each_pair(mask, [&](std::size_t p, std::size_t q) {
      const double diff = bias[q] - bias[p];
      total.add(diff * diff);
    });
  } else {
    for_each_triple(mask, [&](std::size_t a, std::size_t p, std::size_t c) {
      total.add(bias[a] - 2.0 * bias[p] + bias[c]);
    });
  }
  return total.value();
}

BiasField tv_smooth_step(const Grid<double>& bias, const Mask& mask, double lambda, double step,
                         std::size_t steps, double epsilon, TvVariant variant) {
  require_same_shape(bias, mask, "bias vs mask");
  BiasField current(Grid<double>(bias.width(), bias.height(),
                                 std::vector<double>(bias.values().begin(), bias.values().end())));
  if (steps == 0 || !(lambda > 0.0) || !(step > 0.0)) return current;

  constexpr int kMaxHalvings = 6;
  double current_tv = tv_energy(current, mask, variant);
  for (std::size_t it = 0; it < steps; ++it) {
    const RealGrid grad = tv_gradient(current, mask, variant);
    bool accepted = false;
    double trial_step = step;
    for (int attempt = 0; attempt <= kMaxHalvings && !accepted; ++attempt, trial_step *= 0.5) {
      BiasField trial = current;
      for (std::size_t r = 0; r < trial.size(); ++r) {
        if (mask[r]) trial[r] = std::max(current[r] - trial_step * lambda * grad[r], epsilon);
      }
      const double trial_tv = tv_energy(trial, mask, variant);
      if (trial_tv <= current_tv) {
        current = std::move(trial);
        current_tv = trial_tv;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  return current;
}

}  // namespace bfkit
