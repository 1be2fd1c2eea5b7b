#include <doctest.h>

#include <cstdio>
#include <string>

#include "jumpfilter/config.hpp"
#include "jumpfilter/errors.hpp"
#include "jumpfilter/measure.hpp"
#include "jumpfilter/models.hpp"
#include "jumpfilter/report.hpp"
#include "jumpfilter/rng.hpp"

using namespace jumpfilter;

TEST_CASE("config parsing") {
  const std::string text =
      "# comment line\n"
      "model = jump-shared-1d\n"
      "T = 1.5\n"
      "dt = 0.002\n"
      "particles = 500\n"
      "seed = 42\n"
      "model.rate = 3.0   # inline comment\n"
      "runs = 10\n";
  const ExperimentConfig cfg = ExperimentConfig::parse_string(text, "test.cfg");
  CHECK(cfg.model_id == "jump-shared-1d");
  CHECK(cfg.T == 1.5);
  CHECK(cfg.dt == 0.002);
  CHECK(cfg.particles == 500);
  CHECK(cfg.seed == 42);
  CHECK(cfg.model_params.at("rate") == 3.0);
  CHECK(cfg.extra("runs", 0.0) == 10.0);
  CHECK(cfg.extra("absent", -1.0) == -1.0);
}

TEST_CASE("config rejects unknown keys with line context") {
  const std::string text = "model = trivial-constants\nseed = 1\nbogus = 3\n";
  try {
    ExperimentConfig::parse_string(text, "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.cfg:3") != std::string::npos);
    CHECK(what.find("bogus") != std::string::npos);
  }
}

TEST_CASE("config requires model and seed") {
  CHECK_THROWS_AS(ExperimentConfig::parse_string("model = trivial-constants\n"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_string("seed = 3\n"), ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::parse_string("model = trivial-constants\nseed = 1\nT = -2\n"),
      ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse_string(
                      "model = trivial-constants\nseed = 1\nnot a kv line\n"),
                  ConfigError);
}

TEST_CASE("canonical rendering and hash are stable") {
  const std::string a = "model = trivial-constants\nseed = 9\nT = 1\n";
  const std::string b = "T = 1\nseed = 9\nmodel = trivial-constants\n";
  const ExperimentConfig ca = ExperimentConfig::parse_string(a);
  const ExperimentConfig cb = ExperimentConfig::parse_string(b);
  CHECK(ca.canonical() == cb.canonical());
  CHECK(ca.hash() == cb.hash());

  const ExperimentConfig cc =
      ExperimentConfig::parse_string("model = trivial-constants\nseed = 10\nT = 1\n");
  CHECK(ca.hash() != cc.hash());
}

TEST_CASE("measure CSV round trip") {
  Rng rng(7);
  ParticleMeasure mu(2);
  for (int i = 0; i < 13; ++i) {
    Vec x(2);
    x << rng.normal(), rng.uniform(-2.0, 2.0);
    mu.add(x, rng.uniform(-1.0, 1.0));
  }
  const std::string path = "/tmp/jumpfilter-test-measure.csv";
  write_measure_csv(path, mu, 0xabcdULL, 9);
  const ParticleMeasure back = read_measure_csv(path);
  REQUIRE(back.dim() == 2);
  REQUIRE(back.size() == mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    // %.17g rendering round-trips doubles exactly.
    CHECK(back.atoms()[i].x == mu.atoms()[i].x);
    CHECK(back.atoms()[i].w == mu.atoms()[i].w);
  }
  std::remove(path.c_str());
}

TEST_CASE("model registry") {
  for (const std::string& id : model_registry_ids()) {
    const ModelSpec m = make_model(id);
    CHECK(m.id == id);
    CHECK(m.coeffs.d >= 1);
  }
  CHECK_THROWS_AS(make_model("no-such-model"), ConfigError);
  CHECK_THROWS_AS(make_model("jump-shared-1d", {{"bogus_param", 1.0}}), ConfigError);

  // Parameters reach the coefficients.
  const ModelSpec m = make_model("clipped-linear-1d", {{"sigma", 2.0}});
  Vec x(1), y(1);
  x << 0.0;
  y << 0.0;
  CHECK(m.coeffs.sigma(0.0, x, y)(0, 0) == 2.0);
}
