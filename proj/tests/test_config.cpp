#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "aeelab/config.hpp"

using namespace aeelab;

TEST_CASE("preset defaults") {
  const ExperimentConfig sine = config_from_preset("sine");
  CHECK(sine.n == 64);
  CHECK(sine.rho_decay == 2.0);
  CHECK(sine.beta == 2.0);
  CHECK(sine.T == 1.0);
  CHECK(sine.refine == 64);
  CHECK(sine.proj_dim == 5);
  CHECK(sine.iota == 0.75);
  CHECK(sine.nl.kind() == NonlinearityKind::Sine);
  CHECK(sine.order_m_list() == std::vector<std::size_t>{8, 16, 32, 64, 128});
  CHECK(sine.dist_m_list() == std::vector<std::size_t>{16, 64, 256});
  CHECK(sine.iota_bound() == doctest::Approx(0.5));

  CHECK(config_from_preset("linear").nl.kind() == NonlinearityKind::Linear);
  CHECK(config_from_preset("linear").nl.param() == 0.5);
  CHECK(config_from_preset("zero").nl.kind() == NonlinearityKind::Zero);
  CHECK_THROWS_AS(config_from_preset("bogus"), ConfigError);
}

TEST_CASE("config text parsing") {
  SUBCASE("overrides and sections") {
    const std::string text =
        "# comment\n"
        "preset=linear\n"
        "model.n = 16\n"
        "model.nonlinearity = sine:0.25\n"
        "run.m_list = 4, 8, 16\n"
        "run.n_replicas=100\n"
        "run.seed=99\n"
        "out.dir=results\n"
        "sode.C = -3, 0.5; 0.5, -4\n";
    const ExperimentConfig cfg = parse_config_text(text, "test");
    CHECK(cfg.preset == "linear");
    CHECK(cfg.n == 16);
    CHECK(cfg.nl.kind() == NonlinearityKind::Sine);
    CHECK(cfg.nl.param() == 0.25);
    CHECK(cfg.m_list.value() == std::vector<std::size_t>{4, 8, 16});
    CHECK(cfg.n_replicas.value() == 100);
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.out_dir == "results");
    CHECK(cfg.sode_C(0, 0) == -3.0);
    CHECK(cfg.sode_C(0, 1) == 0.5);
    CHECK(cfg.sode_C(1, 1) == -4.0);
  }
  SUBCASE("preset key applies before other keys regardless of order") {
    const ExperimentConfig cfg = parse_config_text("model.n=8\npreset=zero\n", "test");
    CHECK(cfg.nl.kind() == NonlinearityKind::Zero);
    CHECK(cfg.n == 8);
  }
  SUBCASE("rejects malformed input") {
    CHECK_THROWS_AS(parse_config_text("not a key value line\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("unknown.key=1\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("model.n=abc\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("model.nonlinearity=cubic:1\n", "test"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("run.m_list=\n", "test"), ConfigError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config_file("/nonexistent/aeelab.cfg"), ConfigError);
  }
}

TEST_CASE("model building") {
  SUBCASE("defaults") {
    const ExperimentConfig cfg = config_from_preset("sine");
    const ModelSpec model = cfg.build_model();
    CHECK(model.modes() == 64);
    CHECK(model.X0.coeff[0] == 1.0);
    CHECK(model.X0.coeff[1] == 0.0);
    CHECK(model.noise.q[0] == doctest::Approx(std::pow(model.op.eigenvalue(0), -2.0)));
    CHECK_NOTHROW(model.validate());
  }
  SUBCASE("x0 variants") {
    ExperimentConfig cfg = config_from_preset("sine");
    cfg.n = 4;
    cfg.x0 = "zero";
    CHECK(cfg.build_model().X0.coeff == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    cfg.x0 = "list:0.5,-0.25";
    CHECK(cfg.build_model().X0.coeff == std::vector<double>{0.5, -0.25, 0.0, 0.0});
    cfg.x0 = "list:1,2,3,4,5";
    CHECK_THROWS_AS(cfg.build_model(), ConfigError);
    cfg.x0 = "garbage";
    CHECK_THROWS_AS(cfg.build_model(), ConfigError);
  }
  SUBCASE("sode model building") {
    ExperimentConfig cfg = config_from_preset("sine");
    const SodeModel model = cfg.build_sode_model();
    CHECK(model.dim() == 2);
    CHECK(model.b.kind() == SodeDriftKind::Linear);
    CHECK(model.b.linear_matrix()(0, 0) == 0.25);
    CHECK_NOTHROW(model.validate());

    cfg.sode_b = "sine:0.3";
    CHECK(cfg.build_sode_model().b.kind() == SodeDriftKind::Sine);
    cfg.sode_b = "nope";
    CHECK_THROWS_AS(cfg.build_sode_model(), ConfigError);
  }
}
