#include <doctest.h>

#include <string>

#include "bfkit/config.hpp"

using namespace bfkit;

TEST_CASE("empty document yields the defaults") {
  const RunConfig cfg = parse_run_config("{}");
  CHECK(cfg.solver.clusters == 4);
  CHECK(cfg.solver.fuzziness == 2.0);
  CHECK(cfg.solver.kernel_size == 17);
  CHECK(cfg.solver.kernel_sigma == 4.0);
  CHECK(cfg.solver.max_iters == 100);
  CHECK(cfg.solver.tol == 1e-5);
  CHECK(cfg.solver.tv_enabled);
  CHECK(cfg.solver.tv_steps == 5);
  CHECK(cfg.solver.tv_step_size == 0.1);
  CHECK(cfg.solver.epsilon == 1e-10);
  CHECK(cfg.mask_levels == 3);
  CHECK(cfg.mask_bins == 256);
  CHECK(cfg.format == ImageFormat::bf32);
}

TEST_CASE("sections populate the run configuration") {
  const RunConfig cfg = parse_run_config(R"({
    "solver": {"clusters": 3, "fuzziness": 2.5, "max_iters": 7, "membership_mode": "exact"},
    "kernel": {"size": 9, "sigma": 2.0},
    "mask": {"levels": 2, "bins": 128},
    "tv": {"enabled": false, "variant": "laplacian", "steps": 2, "step_size": 0.05},
    "io": {"format": "pgm16", "output_dir": "out"},
    "seed": 12
  })");
  CHECK(cfg.solver.clusters == 3);
  CHECK(cfg.solver.fuzziness == 2.5);
  CHECK(cfg.solver.max_iters == 7);
  CHECK(cfg.solver.membership_mode == MembershipMode::exact);
  CHECK(cfg.solver.kernel_size == 9);
  CHECK(cfg.solver.kernel_sigma == 2.0);
  CHECK(cfg.mask_levels == 2);
  CHECK(cfg.mask_bins == 128);
  CHECK(!cfg.solver.tv_enabled);
  CHECK(cfg.solver.tv_variant == TvVariant::laplacian);
  CHECK(cfg.solver.tv_steps == 2);
  CHECK(cfg.format == ImageFormat::pgm16);
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.seed == 12);
  CHECK(cfg.solver.seed == 12);
}

TEST_CASE("every problem is reported at once") {
  try {
    parse_run_config(R"({"solver": {"clustrs": 3, "tol": -1, "max_iters": -2},
                         "kernel": {"size": 19}, "extra": 1, "seed": "x"})");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const char* key : {"solver.clustrs", "solver.tol", "solver.max_iters", "kernel.size", "extra", "seed"}) {
      CHECK(msg.find(key) != std::string::npos);
    }
    CHECK(std::string(e.kind()) == "config");
  }
  CHECK_THROWS_AS(parse_run_config("[1, 2"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"tv": {"variant": "l1"}})"), ConfigError);
}

TEST_CASE("dumped configuration re-parses to the same values") {
  RunConfig cfg;
  cfg.solver.clusters = 5;
  cfg.solver.tol = 3e-7;
  cfg.solver.center_convention = CenterConvention::symmetric;
  cfg.mask_bins = 64;
  cfg.seed = 99;
  const std::string text = dump_run_config(cfg);
  const RunConfig back = parse_run_config(text);
  CHECK(dump_run_config(back) == text);
  CHECK(back.solver.clusters == 5);
  CHECK(back.solver.tol == 3e-7);
  CHECK(back.solver.center_convention == CenterConvention::symmetric);
  CHECK(back.seed == 99);
}
