#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bfkit/solver.hpp"

namespace bfkit::detail {

// Compensated (Neumaier) accumulator; keeps long foreground sums reproducible
// and accurate to a few ulps regardless of image size.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double fuzzy_power(double u, double p) {
  if (p == 2.0) return u * u;
  return u <= 0.0 ? 0.0 : std::pow(u, p);
}

// u_i^p per cluster, zero off the mask.
inline std::vector<RealGrid> membership_powers(const MembershipMap& u, const Mask& mask, double p) {
  std::vector<RealGrid> out;
  out.reserve(u.clusters());
  for (std::size_t i = 0; i < u.clusters(); ++i) {
    RealGrid g(u.width(), u.height());
    for (std::size_t r = 0; r < g.size(); ++r) g[r] = mask[r] ? fuzzy_power(u(i, r), p) : 0.0;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace bfkit::detail
