#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "bfkit/simulate.hpp"
#include "oracles.hpp"

using namespace bfkit;

TEST_CASE("legendre recurrence matches the closed forms") {
  for (int k = 0; k <= 5; ++k) {
    for (double t = -1.0; t <= 1.0; t += 0.0625) CHECK(std::abs(legendre(k, t) - oracle::legendre(k, t)) <= 1e-14);
  }
}

TEST_CASE("order 0 bias is the range midpoint") {
  LegendreSpec spec;
  spec.order = 0;
  const BiasField b = legendre_bias(8, 6, spec);
  for (double v : b.values()) CHECK(v == 1.0);
}

TEST_CASE("order 1 bias with only the y term is a vertical ramp") {
  LegendreSpec spec;
  spec.order = 1;
  spec.coeffs = {0.0, 1.0, 0.0, 0.0};
  const BiasField b = legendre_bias(5, 11, spec);
  for (std::size_t row = 0; row < 11; ++row) {
    for (std::size_t col = 0; col < 5; ++col) {
      CHECK(std::abs(b(row, col) - (0.3 + 1.4 * static_cast<double>(row) / 10.0)) <= 1e-12);
    }
  }
}

TEST_CASE("order 3 seed 0 fixture pixels") {
  LegendreSpec spec;
  const BiasField b = legendre_bias(64, 64, spec);
  const auto want = oracle::legendre_surface(64, 64, 3, legendre_coefficients(spec), 0.3, 1.7);
  const auto [mn, mx] = std::minmax_element(b.values().begin(), b.values().end());
  CHECK(*mn == 0.3);
  CHECK(*mx == 1.7);
  struct Fixture { std::size_t row, col; double value; };
  for (const Fixture& f : {Fixture{0, 0, 0.73483513674399625}, Fixture{63, 63, 1.7},
                           Fixture{10, 50, 0.49543563615454222}, Fixture{32, 32, 0.85805509534721125},
                           Fixture{50, 7, 1.3946905061210462}}) {
    CHECK(std::abs(b(f.row, f.col) - f.value) <= 1e-12);
    CHECK(std::abs(b(f.row, f.col) - want(f.row, f.col)) <= 1e-12);
  }
}

TEST_CASE("bias range is exact and seeded") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    LegendreSpec spec;
    spec.seed = seed;
    spec.order = static_cast<int>(1 + seed % 4);
    spec.lo = 0.5;
    spec.hi = 1.5;
    const BiasField b = legendre_bias(33, 17, spec);
    const auto [mn, mx] = std::minmax_element(b.values().begin(), b.values().end());
    CHECK(std::abs(*mn - 0.5) <= 1e-12);
    CHECK(std::abs(*mx - 1.5) <= 1e-12);
    CHECK(legendre_bias(33, 17, spec) == b);
  }
  LegendreSpec bad;
  bad.lo = 2.0;
  CHECK_THROWS_AS(legendre_bias(4, 4, bad), ParameterError);
}

TEST_CASE("phantom levels, labels and distinct values") {
  for (PhantomGeometry g : {PhantomGeometry::nested_ellipses, PhantomGeometry::voronoi_blobs}) {
    for (std::vector<double> levels : {std::vector<double>{0.4, 0.9}, std::vector<double>{0.25, 0.5, 0.75, 1.0}}) {
      PhantomSpec spec;
      spec.width = 64;
      spec.height = 48;
      spec.levels = levels;
      spec.geometry = g;
      const Phantom p = phantom(spec);
      REQUIRE(p.labels.size() == levels.size() + 1);
      std::set<double> distinct(p.clean.values().begin(), p.clean.values().end());
      CHECK(distinct.size() == levels.size() + 1);
      for (std::size_t i = 0; i < p.clean.size(); ++i) {
        std::size_t owners = 0;
        for (std::size_t k = 0; k < p.labels.size(); ++k) {
          if (p.labels[k][i]) {
            ++owners;
            CHECK(p.clean[i] == (k == 0 ? 0.0 : levels[k - 1]));
          }
        }
        CHECK(owners == 1);
      }
      CHECK(phantom(spec).clean == p.clean);
    }
  }
}

TEST_CASE("phantom rejects empty classes and bad levels") {
  PhantomSpec tiny;
  tiny.width = tiny.height = 3;
  tiny.levels = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  CHECK_THROWS_AS(phantom(tiny), ParameterError);
  PhantomSpec unsorted;
  unsorted.levels = {0.5, 0.4};
  CHECK_THROWS_AS(phantom(unsorted), ParameterError);
  CHECK(parse_phantom_geometry("voronoi-blobs") == PhantomGeometry::voronoi_blobs);
  CHECK_THROWS_AS(parse_phantom_geometry("spiral"), ParameterError);
}

TEST_CASE("corrupt without noise is the exact product") {
  const Image2D clean(4, 4, 0.5);
  const Image2D same = corrupt(clean, BiasField::ones(4, 4), 0.0, 1);
  CHECK(same == clean);
  const Image2D scaled = corrupt(clean, BiasField(4, 4, 1.4), 0.0, 1);
  for (double v : scaled.values()) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));

  PhantomSpec spec;
  const Phantom p = phantom(spec);
  const BiasField b = legendre_bias(128, 128, LegendreSpec{});
  const Image2D c = corrupt(p.clean, b, 0.0, 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (p.clean[i] > 0.0) CHECK(std::abs(c[i] / b[i] - p.clean[i]) <= 1e-12);
  }
}

TEST_CASE("seeded noise has the half-normal mean") {
  const Image2D clean(128, 128, 0.5);
  const BiasField b(128, 128, 1.0);
  const Image2D noisy = corrupt(clean, b, 0.01, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) total += std::abs(noisy[i] - 0.5);
  const double expected = 0.01 * std::sqrt(2.0 / std::acos(-1.0));
  CHECK(std::abs(total / static_cast<double>(noisy.size()) - expected) <= 0.1 * expected);
  CHECK(corrupt(clean, b, 0.01, 0) == noisy);
  CHECK(!(corrupt(clean, b, 0.01, 1) == noisy));
  const Image2D clamped = corrupt(Image2D(64, 64, 0.0), BiasField(64, 64, 1.0), 0.5, 3);
  for (double v : clamped.values()) CHECK(v >= 0.0);
}
