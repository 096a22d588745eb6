#include "bfkit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bfkit/rng.hpp"

namespace bfkit {
namespace {

constexpr std::size_t kShellCycles = 3;

double grid_coordinate(std::size_t index, std::size_t extent) {
  if (extent < 2) return 0.0;
  return 2.0 * static_cast<double>(index) / static_cast<double>(extent - 1) - 1.0;
}

}  // namespace

void LegendreSpec::validate() const {
  if (order < 0) throw ParameterError("legendre order must be >= 0");
  if (!(lo > 0.0) || !(lo < hi)) throw ParameterError("legendre range needs 0 < lo < hi");
  const auto n = static_cast<std::size_t>(order + 1);
  if (!coeffs.empty() && coeffs.size() != n * n) {
    throw ParameterError("legendre coefficient grid must be (order+1)^2 = " + std::to_string(n * n));
  }
}

double legendre(int degree, double t) {
  if (degree == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int k = 1; k < degree; ++k) {
    const double next = ((2.0 * k + 1.0) * t * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> legendre_coefficients(const LegendreSpec& spec) {
  spec.validate();
  if (!spec.coeffs.empty()) return spec.coeffs;
  const auto n = static_cast<std::size_t>(spec.order + 1);
  Rng rng(stream_seed(spec.seed, "simulate.bias"));
  std::vector<double> coeffs(n * n);
  for (auto& c : coeffs) c = rng.uniform(-1.0, 1.0);
  return coeffs;
}

BiasField legendre_bias(std::size_t width, std::size_t height, const LegendreSpec& spec) {
  const std::vector<double> coeffs = legendre_coefficients(spec);
  const auto n = static_cast<std::size_t>(spec.order + 1);

  std::vector<double> px(width * n);
  std::vector<double> py(height * n);
  for (std::size_t col = 0; col < width; ++col) {
    for (std::size_t m = 0; m < n; ++m) {
      px[col * n + m] = legendre(static_cast<int>(m), grid_coordinate(col, width));
    }
  }
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t m = 0; m < n; ++m) {
      py[row * n + m] = legendre(static_cast<int>(m), grid_coordinate(row, height));
    }
  }

  BiasField raw(width, height, 0.0);
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t col = 0; col < width; ++col) {
      double v = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t k = 0; k < n; ++k) v += coeffs[m * n + k] * px[col * n + m] * py[row * n + k];
      }
      raw(row, col) = v;
    }
  }

  const auto [mn_it, mx_it] = std::minmax_element(raw.values().begin(), raw.values().end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  const double spread = mx - mn;
  BiasField out(width, height, 0.5 * (spec.lo + spec.hi));
  if (!(spread > 1e-12 * std::max(1.0, std::max(std::abs(mn), std::abs(mx))))) return out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    out[i] = v == mx ? spec.hi : spec.lo + (v - mn) / spread * (spec.hi - spec.lo);
  }
  return out;
}

PhantomGeometry parse_phantom_geometry(std::string_view name) {
  if (name == "nested-ellipses") return PhantomGeometry::nested_ellipses;
  if (name == "voronoi-blobs") return PhantomGeometry::voronoi_blobs;
  throw ParameterError("unknown phantom geometry '" + std::string(name) + "'");
}

std::string_view to_string(PhantomGeometry geometry) {
  return geometry == PhantomGeometry::nested_ellipses ? "nested-ellipses" : "voronoi-blobs";
}

void PhantomSpec::validate() const {
  if (width == 0 || height == 0) throw ParameterError("phantom dimensions must be positive");
  if (levels.empty()) throw ParameterError("phantom needs at least one class level");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0) || levels[k] > 1.0) throw ParameterError("phantom levels must lie in (0, 1]");
    if (k > 0 && !(levels[k] > levels[k - 1])) throw ParameterError("phantom levels must be strictly ascending");
  }
}

Phantom phantom(const PhantomSpec& spec) {
  spec.validate();
  const std::size_t n = spec.classes();
  Rng rng(stream_seed(spec.seed, "simulate.phantom"));
  const double w = static_cast<double>(spec.width);
  const double h = static_cast<double>(spec.height);

  // Outer head-like ellipse, slightly perturbed per seed.
  const double cx = 0.5 * (w - 1.0) + rng.uniform(-0.03, 0.03) * w;
  const double cy = 0.5 * (h - 1.0) + rng.uniform(-0.03, 0.03) * h;
  const double ax = 0.42 * w * rng.uniform(0.95, 1.05);
  const double ay = 0.42 * h * rng.uniform(0.95, 1.05);
  const double angle = rng.uniform(-0.3, 0.3);
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  auto radius = [&](double x, double y) {
    const double dx = x - cx;
    const double dy = y - cy;
    const double u = (ca * dx + sa * dy) / ax;
    const double v = (-sa * dx + ca * dy) / ay;
    return std::sqrt(u * u + v * v);
  };

  std::vector<std::size_t> cls(spec.width * spec.height, 0);
  if (spec.geometry == PhantomGeometry::nested_ellipses) {
    // Thin shells cycling through the classes from the outside in, like a
    // folded cortex: shell j spans normalized radii (1 - (j+1)/S, 1 - j/S]
    // and takes class j mod n + 1; every shell center drifts a little.
    const std::size_t shells = kShellCycles * n;
    std::vector<double> ox(shells), oy(shells);
    for (std::size_t j = 0; j < shells; ++j) {
      const double depth = static_cast<double>(j) / static_cast<double>(shells);
      ox[j] = rng.uniform(-0.08, 0.08) * depth;
      oy[j] = rng.uniform(-0.08, 0.08) * depth;
    }
    for (std::size_t row = 0; row < spec.height; ++row) {
      for (std::size_t col = 0; col < spec.width; ++col) {
        std::size_t label = 0;
        for (std::size_t j = 0; j < shells; ++j) {
          const double scale = 1.0 - static_cast<double>(j) / static_cast<double>(shells);
          const double rx = static_cast<double>(col) - ox[j] * ax;
          const double ry = static_cast<double>(row) - oy[j] * ay;
          if (radius(rx, ry) <= scale) label = j % n + 1;
        }
        cls[row * spec.width + col] = label;
      }
    }
  } else {
    const std::size_t sites = 4 * n;
    std::vector<double> sx, sy;
    while (sx.size() < sites) {
      const double x = rng.uniform(0.0, w);
      const double y = rng.uniform(0.0, h);
      if (radius(x, y) <= 1.0) {
        sx.push_back(x);
        sy.push_back(y);
      }
    }
    for (std::size_t row = 0; row < spec.height; ++row) {
      for (std::size_t col = 0; col < spec.width; ++col) {
        const double x = static_cast<double>(col);
        const double y = static_cast<double>(row);
        if (radius(x, y) > 1.0) continue;
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < sites; ++j) {
          const double d = (sx[j] - x) * (sx[j] - x) + (sy[j] - y) * (sy[j] - y);
          if (d < best) {
            best = d;
            nearest = j;
          }
        }
        cls[row * spec.width + col] = nearest % n + 1;
      }
    }
  }

  Phantom out;
  out.clean = Image2D(spec.width, spec.height, 0.0);
  out.labels.assign(n + 1, Mask(spec.width, spec.height, 0));
  for (std::size_t i = 0; i < cls.size(); ++i) {
    out.labels[cls[i]][i] = 1;
    if (cls[i] > 0) out.clean[i] = spec.levels[cls[i] - 1];
  }
  for (std::size_t k = 1; k <= n; ++k) {
    if (out.labels[k].count() == 0) {
      throw ParameterError("phantom geometry produced an empty class " + std::to_string(k));
    }
  }
  return out;
}

Image2D corrupt(const Image2D& clean, const Grid<double>& bias, double noise_sigma, std::uint64_t seed) {
  require_same_shape(clean, bias, "clean vs bias");
  if (!(noise_sigma >= 0.0)) throw ParameterError("noise sigma must be >= 0");
  Image2D out(clean.width(), clean.height(), 0.0);
  Rng rng(stream_seed(seed, "simulate.noise"));
  for (std::size_t i = 0; i < clean.size(); ++i) {
    double v = clean[i] * bias[i];
    if (noise_sigma > 0.0) v += noise_sigma * rng.normal();
    out[i] = std::max(v, 0.0);
  }
  return out;
}

}  // namespace bfkit
