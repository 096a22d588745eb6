#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "bfkit/grid.hpp"
#include "bfkit/solver.hpp"

namespace bfkit {

struct LegendreSpec {
  int order = 3;
  // (order+1) x (order+1) row-major, coeffs[m*(order+1)+n] multiplies
  // P_m(x) P_n(y). Empty: drawn uniformly from [-1, 1] using `seed`.
  std::vector<double> coeffs;
  double lo = 0.3;
  double hi = 1.7;
  std::uint64_t seed = 0;

  void validate() const;
};

// P_k(t) by the three-term recurrence.
double legendre(int degree, double t);

// Legendre surface over the grid (x from columns, y from rows, both mapped
// to [-1, 1]), affinely rescaled to [lo, hi]. A constant raw surface maps to
// (lo + hi) / 2 everywhere.
BiasField legendre_bias(std::size_t width, std::size_t height, const LegendreSpec& spec);

// Draws the coefficient grid used when spec.coeffs is empty.
std::vector<double> legendre_coefficients(const LegendreSpec& spec);

enum class PhantomGeometry { nested_ellipses, voronoi_blobs };
PhantomGeometry parse_phantom_geometry(std::string_view name);
std::string_view to_string(PhantomGeometry geometry);

struct PhantomSpec {
  std::size_t width = 128;
  std::size_t height = 128;
  std::vector<double> levels = {0.25, 0.5, 0.75, 1.0};
  PhantomGeometry geometry = PhantomGeometry::nested_ellipses;
  std::uint64_t seed = 0;

  std::size_t classes() const noexcept { return levels.size(); }
  void validate() const;
};

struct Phantom {
  Image2D clean;
  std::vector<Mask> labels;  // labels[0] background, labels[k] class k (level k-1)
};

Phantom phantom(const PhantomSpec& spec);

// I = clean * bias + n, n ~ N(0, noise_sigma^2) per pixel, clamped at 0.
Image2D corrupt(const Image2D& clean, const Grid<double>& bias, double noise_sigma, std::uint64_t seed);

}  // namespace bfkit
