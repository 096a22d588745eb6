// Naive reference implementations used as test oracles. Each one is written
// straight from the defining formula with plain loops and shares no code with
// the library beyond the container types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bfkit/grid.hpp"
#include "bfkit/solver.hpp"

namespace oracle {

using bfkit::Grid;
using bfkit::Mask;

// splitmix64; deterministic on every platform.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
};

inline Grid<double> random_grid(TestRng& rng, std::size_t w, std::size_t h, double lo, double hi) {
  Grid<double> g(w, h);
  for (auto& v : g.values()) v = rng.uniform(lo, hi);
  return g;
}

inline Mask random_mask(TestRng& rng, std::size_t w, std::size_t h, double fill) {
  Mask m(w, h);
  for (auto& v : m.values()) v = rng.uniform() < fill ? 1 : 0;
  return m;
}

inline long long idiff(std::size_t a, std::size_t b) {
  return static_cast<long long>(a) - static_cast<long long>(b);
}

inline double gauss(long long dr, long long dc, double sigma) {
  return std::exp(-static_cast<double>(dr * dr + dc * dc) / (2.0 * sigma * sigma));
}

// Row-normalized masked kernel weight w(r, s) over a d x d window.
struct Kernel {
  const Mask& mask;
  int d;
  double sigma;

  bool inside(std::size_t r, std::size_t s) const {
    const std::size_t w = mask.width();
    const long long h = d / 2;
    return std::llabs(idiff(r / w, s / w)) <= h && std::llabs(idiff(r % w, s % w)) <= h;
  }
  double raw(std::size_t r, std::size_t s) const {
    if (!mask[r] || !mask[s] || !inside(r, s)) return 0.0;
    const std::size_t w = mask.width();
    return gauss(idiff(r / w, s / w), idiff(r % w, s % w), sigma);
  }
  double norm(std::size_t r) const {
    double z = 0.0;
    for (std::size_t s = 0; s < mask.size(); ++s) z += raw(r, s);
    return z;
  }
  // Dense weight matrix; fine for the small grids used in tests.
  std::vector<double> matrix() const {
    const std::size_t n = mask.size();
    std::vector<double> m(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      if (!mask[r]) continue;
      const double z = norm(r);
      for (std::size_t s = 0; s < n; ++s) m[r * n + s] = raw(r, s) / z;
    }
    return m;
  }
};

inline Grid<double> filter(const Grid<double>& f, const Mask& mask, int d, double sigma) {
  const Kernel k{mask, d, sigma};
  const auto w = k.matrix();
  const std::size_t n = mask.size();
  Grid<double> out(mask.width(), mask.height());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) out[r] += w[r * n + s] * f[s];
  }
  return out;
}

using Planes = std::vector<std::vector<double>>;  // planes[i][pixel]

// E = sum_r sum_s w(r,s) sum_i u_i(s)^p (I(s) - b(r) c_i)^2
inline double energy(const Grid<double>& img, const Mask& mask, const Planes& u,
                     const std::vector<double>& c, const Grid<double>& b, int d, double sigma,
                     double p) {
  const Kernel k{mask, d, sigma};
  const auto w = k.matrix();
  const std::size_t n = mask.size();
  long double total = 0.0L;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) {
      if (w[r * n + s] == 0.0) continue;
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double e = img[s] - b[r] * c[i];
        total += w[r * n + s] * std::pow(u[i][s], p) * e * e;
      }
    }
  }
  return static_cast<double>(total);
}

// Stationary centers of E for fixed (u, b); `adjoint` integrates the kernel
// over its first argument, otherwise the r-normalized filter of b is used.
inline std::vector<double> centers(const Grid<double>& img, const Mask& mask, const Planes& u,
                                   const Grid<double>& b, int d, double sigma, double p,
                                   bool adjoint = true) {
  const Kernel k{mask, d, sigma};
  const auto w = k.matrix();
  const std::size_t n = mask.size();
  std::vector<double> out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t s = 0; s < n; ++s) {
        const double weight = adjoint ? w[r * n + s] : w[s * n + r];
        if (weight == 0.0) continue;
        const double up = std::pow(u[i][s], p);
        num += weight * up * img[s] * b[r];
        den += weight * up * b[r] * b[r];
      }
    }
    out.push_back(static_cast<double>(num / den));
  }
  return out;
}

// b(r) = sum_s w(r,s) I(s) sum_i u_i^p c_i / sum_s w(r,s) sum_i u_i^p c_i^2
inline Grid<double> bias(const Grid<double>& img, const Mask& mask, const Planes& u,
                         const std::vector<double>& c, int d, double sigma, double p) {
  const Kernel k{mask, d, sigma};
  const auto w = k.matrix();
  const std::size_t n = mask.size();
  Grid<double> out(mask.width(), mask.height(), 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (!mask[r]) continue;
    long double num = 0.0L, den = 0.0L;
    for (std::size_t s = 0; s < n; ++s) {
      if (w[r * n + s] == 0.0) continue;
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double up = std::pow(u[i][s], p);
        num += w[r * n + s] * img[s] * up * c[i];
        den += w[r * n + s] * up * c[i] * c[i];
      }
    }
    out[r] = static_cast<double>(num / den);
  }
  return out;
}

// u_i = 1 / sum_j (d_i / d_j)^(1/(p-1))
inline std::vector<double> fcm_weights(const std::vector<double>& dist, double p) {
  std::vector<double> u(dist.size(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] == 0.0) {
      u[i] = 1.0;
      return u;
    }
  }
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) s += std::pow(dist[i] / dist[j], 1.0 / (p - 1.0));
    u[i] = 1.0 / s;
  }
  return u;
}

inline Planes memberships_literal(const Grid<double>& img, const Mask& mask, const std::vector<double>& c,
                                  const Grid<double>& b, int d, double sigma, double p) {
  const Grid<double> kb = filter(b, mask, d, sigma);
  Planes u(c.size(), std::vector<double>(mask.size(), 0.0));
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (!mask[r]) continue;
    std::vector<double> dist;
    for (double ci : c) dist.push_back((img[r] - ci * kb[r]) * (img[r] - ci * kb[r]));
    const auto w = fcm_weights(dist, p);
    for (std::size_t i = 0; i < c.size(); ++i) u[i][r] = w[i];
  }
  return u;
}

inline Planes memberships_exact(const Grid<double>& img, const Mask& mask, const std::vector<double>& c,
                                const Grid<double>& b, int d, double sigma, double p) {
  const Kernel k{mask, d, sigma};
  const auto w = k.matrix();
  const std::size_t n = mask.size();
  Planes u(c.size(), std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    if (!mask[s]) continue;
    std::vector<double> dist(c.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        dist[i] += w[r * n + s] * (img[s] - b[r] * c[i]) * (img[s] - b[r] * c[i]);
      }
    }
    const auto wts = fcm_weights(dist, p);
    for (std::size_t i = 0; i < c.size(); ++i) u[i][s] = wts[i];
  }
  return u;
}

// Sum of squared forward differences between horizontally and vertically
// adjacent foreground pixels.
inline double tv(const Grid<double>& b, const Mask& mask) {
  double total = 0.0;
  for (std::size_t row = 0; row < b.height(); ++row) {
    for (std::size_t col = 0; col < b.width(); ++col) {
      if (!mask(row, col)) continue;
      if (col + 1 < b.width() && mask(row, col + 1)) total += std::pow(b(row, col + 1) - b(row, col), 2);
      if (row + 1 < b.height() && mask(row + 1, col)) total += std::pow(b(row + 1, col) - b(row, col), 2);
    }
  }
  return total;
}

// Exhaustive multi-threshold Otsu: every boundary tuple t_1 < ... < t_M
// (class k = bins (t_{k-1}, t_k]) scored by between-class variance with the
// bin index as intensity. Returns the first maximizer in lexicographic order.
inline std::vector<std::size_t> otsu(const std::vector<std::uint64_t>& counts, std::size_t levels) {
  const std::size_t bins = counts.size();
  double total = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < bins; ++j) {
    total += static_cast<double>(counts[j]);
    mean += static_cast<double>(counts[j]) * static_cast<double>(j);
  }
  mean /= total;
  std::vector<std::size_t> t(levels), best;
  double best_score = -1.0;
  for (std::size_t k = 0; k < levels; ++k) t[k] = k;
  while (true) {
    double score = 0.0;
    bool empty = false;
    std::size_t first = 0;
    for (std::size_t k = 0; k <= levels && !empty; ++k) {
      const std::size_t last = k < levels ? t[k] : bins - 1;
      double w = 0.0, m = 0.0;
      for (std::size_t j = first; j <= last; ++j) {
        w += static_cast<double>(counts[j]);
        m += static_cast<double>(counts[j]) * static_cast<double>(j);
      }
      if (w == 0.0) empty = true;
      else score += w / total * std::pow(m / w - mean, 2);
      first = last + 1;
    }
    if (!empty && score > best_score * (1.0 + 1e-12)) {
      best_score = score;
      best = t;
    }
    // Next combination of `levels` values from [0, bins - 2].
    std::size_t k = levels;
    while (k > 0 && t[k - 1] == bins - 2 - (levels - k)) --k;
    if (k == 0) break;
    ++t[k - 1];
    for (std::size_t j = k; j < levels; ++j) t[j] = t[j - 1] + 1;
  }
  return best;
}

inline double psnr(const Grid<double>& a, const Grid<double>& b, double peak) {
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  mse /= static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

// Per-window SSIM with centered Gaussian-weighted moments.
inline double ssim(const Grid<double>& x, const Grid<double>& y, int win = 11, double sigma = 1.5,
                   double peak = 1.0) {
  std::vector<double> w2(static_cast<std::size_t>(win * win));
  double z = 0.0;
  const double c = 0.5 * (win - 1);
  for (int i = 0; i < win; ++i) {
    for (int j = 0; j < win; ++j) {
      const double v = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2.0 * sigma * sigma));
      w2[static_cast<std::size_t>(i * win + j)] = v;
      z += v;
    }
  }
  for (auto& v : w2) v /= z;
  const double c1 = std::pow(0.01 * peak, 2), c2 = std::pow(0.03 * peak, 2);
  const auto uw = static_cast<std::size_t>(win);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r0 = 0; r0 + uw <= x.height(); ++r0) {
    for (std::size_t c0 = 0; c0 + uw <= x.width(); ++c0) {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < uw; ++i) {
        for (std::size_t j = 0; j < uw; ++j) {
          mx += w2[i * uw + j] * x(r0 + i, c0 + j);
          my += w2[i * uw + j] * y(r0 + i, c0 + j);
        }
      }
      double vx = 0, vy = 0, cxy = 0;
      for (std::size_t i = 0; i < uw; ++i) {
        for (std::size_t j = 0; j < uw; ++j) {
          const double dx = x(r0 + i, c0 + j) - mx, dy = y(r0 + i, c0 + j) - my;
          vx += w2[i * uw + j] * dx * dx;
          vy += w2[i * uw + j] * dy * dy;
          cxy += w2[i * uw + j] * dx * dy;
        }
      }
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

// Two-sided exact signed-rank p by enumerating all 2^n sign assignments.
inline double wilcoxon_exact_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] != x[i]) d.push_back(y[i] - x[i]);
  }
  const std::size_t n = d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++below;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double total = 0, wplus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) wplus += rank[i];
  }
  const double observed = std::abs(wplus - total / 2);
  std::uint64_t extreme = 0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (bits >> i & 1U) s += rank[i];
    }
    if (std::abs(s - total / 2) >= observed) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(std::uint64_t{1} << n);
}

// Closed-form Legendre polynomials up to degree 5.
inline double legendre(int k, double t) {
  switch (k) {
    case 0: return 1.0;
    case 1: return t;
    case 2: return (3 * t * t - 1) / 2;
    case 3: return (5 * t * t * t - 3 * t) / 2;
    case 4: return (35 * std::pow(t, 4) - 30 * t * t + 3) / 8;
    case 5: return (63 * std::pow(t, 5) - 70 * t * t * t + 15 * t) / 8;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

// Min-max rescaled Legendre surface; coeffs[m * (order+1) + n] multiplies
// P_m(x) P_n(y) with x along columns.
inline Grid<double> legendre_surface(std::size_t w, std::size_t h, int order, const std::vector<double>& coeffs,
                                     double lo, double hi) {
  const auto n = static_cast<std::size_t>(order + 1);
  Grid<double> raw(w, h);
  for (std::size_t row = 0; row < h; ++row) {
    for (std::size_t col = 0; col < w; ++col) {
      const double x = -1.0 + 2.0 * static_cast<double>(col) / static_cast<double>(w - 1);
      const double y = -1.0 + 2.0 * static_cast<double>(row) / static_cast<double>(h - 1);
      double v = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t k = 0; k < n; ++k) {
          v += coeffs[m * n + k] * legendre(static_cast<int>(m), x) * legendre(static_cast<int>(k), y);
        }
      }
      raw(row, col) = v;
    }
  }
  double mn = raw[0], mx = raw[0];
  for (double v : raw.values()) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  for (auto& v : raw.values()) v = lo + (v - mn) / (mx - mn) * (hi - lo);
  return raw;
}

inline Planes to_planes(const bfkit::MembershipMap& u) {
  Planes out;
  for (std::size_t i = 0; i < u.clusters(); ++i) {
    const auto p = u.plane(i);
    out.emplace_back(p.begin(), p.end());
  }
  return out;
}

inline bfkit::MembershipMap from_planes(const Planes& planes, std::size_t w, std::size_t h) {
  bfkit::MembershipMap u(planes.size(), w, h);
  for (std::size_t i = 0; i < planes.size(); ++i) {
    std::copy(planes[i].begin(), planes[i].end(), u.plane(i).begin());
  }
  return u;
}

// Random fuzzy memberships on the mask (rows sum to 1), zero elsewhere.
inline Planes random_planes(TestRng& rng, const Mask& mask, std::size_t clusters) {
  Planes u(clusters, std::vector<double>(mask.size(), 0.0));
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (!mask[r]) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < clusters; ++i) s += (u[i][r] = rng.uniform(0.05, 1.0));
    for (std::size_t i = 0; i < clusters; ++i) u[i][r] /= s;
  }
  return u;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace oracle
