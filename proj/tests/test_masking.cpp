#include <doctest.h>

#include "bfkit/masking.hpp"
#include "oracles.hpp"

using namespace bfkit;

TEST_CASE("two-level image splits between the levels") {
  Image2D img(10, 10, 0.0);
  for (std::size_t i = 50; i < 100; ++i) img[i] = 255.0;
  const ThresholdSet t = otsu_multilevel(img, 1, 256);
  REQUIRE(t.thresholds.size() == 1);
  CHECK(t.thresholds[0] > 0.0);
  CHECK(t.thresholds[0] < 255.0);
  // Every split between the two occupied bins scores the same; the smallest wins.
  CHECK(t.boundaries[0] == 0);

  const Mask m = foreground_mask(img, 1);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK((m[i] != 0) == (img[i] == 255.0));
}

TEST_CASE("constant images are degenerate") {
  CHECK_THROWS_AS(otsu_multilevel(Image2D(4, 4, 0.7), 1), DegenerateInputError);
  Image2D two(4, 4, 0.0);
  two[0] = 1.0;
  CHECK_THROWS_AS(otsu_multilevel(two, 3), DegenerateInputError);
}

TEST_CASE("seed-0 sixteen-bin fixture matches exhaustive search") {
  oracle::TestRng rng(0);
  std::vector<std::uint64_t> counts(16);
  for (auto& c : counts) c = rng.below(50);
  const auto expected = oracle::otsu(counts, 3);
  CHECK(expected == std::vector<std::size_t>{2, 5, 10});
  CHECK(otsu_boundaries(counts, 3) == expected);
}

TEST_CASE("dynamic programme equals exhaustive search on random histograms") {
  oracle::TestRng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t bins = 4 + rng.below(61);
    const std::size_t levels = 1 + rng.below(3);
    std::vector<std::uint64_t> counts(bins);
    const double sparsity = rng.uniform(0.0, 0.6);
    for (auto& c : counts) c = rng.uniform() < sparsity ? 0 : rng.below(200);
    std::size_t occupied = 0;
    for (auto c : counts) occupied += c > 0;
    if (occupied < levels + 1) {
      CHECK_THROWS_AS(otsu_boundaries(counts, levels), DegenerateInputError);
      continue;
    }
    CHECK(otsu_boundaries(counts, levels) == oracle::otsu(counts, levels));
  }
}

TEST_CASE("four-level phantom mask drops only the zero level") {
  Image2D img(16, 16);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = std::vector<double>{0.0, 0.3, 0.6, 0.9}[(i / 7) % 4];
  const Mask m = foreground_mask(img, 3);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK((m[i] != 0) == (img[i] > 0.0));
}

TEST_CASE("minimum threshold leaves at least one bin below it") {
  oracle::TestRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Image2D img(oracle::random_grid(rng, 20, 20, 0.0, 1.0));
    const Mask m = foreground_mask(img, 3);
    CHECK(m.count() < img.size());
  }
}

TEST_CASE("thresholds follow increasing affine maps within one bin") {
  oracle::TestRng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Image2D img(oracle::random_grid(rng, 24, 24, 0.0, 1.0));
    Image2D mapped = img;
    const double a = rng.uniform(0.5, 4.0), b = rng.uniform(0.0, 10.0);
    for (auto& v : mapped.values()) v = a * v + b;
    const auto t0 = otsu_multilevel(img, 3);
    const auto t1 = otsu_multilevel(mapped, 3);
    const Histogram h = make_histogram(mapped, 256);
    const double bin = (h.hi - h.lo) / 256.0;
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(a * t0.thresholds[k] + b - t1.thresholds[k]) <= bin * 1.0001);
  }
}

TEST_CASE("recomputing the mask on a mask-confined image stays inside the mask") {
  oracle::TestRng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Image2D img(oracle::random_grid(rng, 24, 24, 0.0, 1.0));
    const Mask m = foreground_mask(img, 3);
    Image2D confined = img;
    for (std::size_t i = 0; i < img.size(); ++i) confined[i] *= m[i];
    const Mask again = foreground_mask(confined, 3);
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (again[i]) CHECK(m[i]);
    }
  }
}

TEST_CASE("histogram bins are upper-edge inclusive") {
  Image2D img(4, 1, std::vector<double>{0.0, 0.25, 0.5, 1.0});
  const Histogram h = make_histogram(img, 4);
  CHECK(h.counts == std::vector<std::uint64_t>{2, 1, 0, 1});
  CHECK(h.upper_edge(0) == 0.25);
  CHECK(h.bin_of(0.2500001) == 1);
}
