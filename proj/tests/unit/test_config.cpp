#include <doctest.h>

#include <sstream>

#include "sgdpce/config.hpp"
#include "sgdpce/experiments.hpp"

using namespace sgdpce;

TEST_CASE("every experiment has defaults that round-trip") {
  for (const auto &id : experiment_ids()) {
    CAPTURE(id);
    const auto config = ExperimentConfig::defaults(id);
    CHECK(config.experiment() == id);
    const auto again = ExperimentConfig::parse(config.serialize());
    CHECK(again == config);
    CHECK(again.serialize() == config.serialize());
    CHECK(again.hash() == config.hash());
    CHECK(config.hash().size() == 16);
  }
  CHECK_THROWS_AS(ExperimentConfig::defaults("table9"), ConfigError);
}

TEST_CASE("parsing applies values over the experiment defaults") {
  const auto config = ExperimentConfig::parse(
      "# comment\n[experiment]\nid = table2\nseed = 17\n\n[sgd]\niterations = 12\n"
      "init_std = 0.5\n[evaluation]\nrates = 1, 2.5\n");
  CHECK(config.seed() == 17);
  CHECK(config.integer("sgd.iterations") == 12);
  CHECK(config.real("sgd.init_std") == 0.5);
  CHECK(config.reals("evaluation.rates") == std::vector<double>{1.0, 2.5});
  CHECK(config.text("problem.kind") ==
        ExperimentConfig::defaults("table2").text("problem.kind"));
}

TEST_CASE("unknown and malformed keys are rejected with their line") {
  try {
    ExperimentConfig::parse("[experiment]\nid = table1\n[sgd]\nlearning = 3\n");
    FAIL("expected rejection");
  } catch (const ConfigError &e) {
    CHECK(e.line() == 4);
    CHECK(e.key() == "sgd.learning");
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK_THROWS_AS(ExperimentConfig::parse("[sgd]\niterations = ten\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[sgd]\niterations = 1\niterations = 2\n"),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("iterations = 1\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[sgd\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[sgd]\ncv_mode = order2\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("overrides") {
  auto config = ExperimentConfig::defaults("solve");
  config.apply_override("sgd.batch_gradient=32");
  CHECK(config.count("sgd.batch_gradient") == 32);
  CHECK_THROWS_AS(config.apply_override("sgd.batch_gradient"), ConfigError);
  CHECK_THROWS_AS(config.apply_override("batch_gradient=3"), ConfigError);
  CHECK_THROWS_AS(config.apply_override("sgd.nope=3"), ConfigError);
  const auto before = config.hash();
  config.apply_override("experiment.seed=99");
  CHECK(config.hash() != before);
}

TEST_CASE("coefficient dump round-trips exactly") {
  CoefficientVector c(3, 2);
  c.data() = {0.1, -1.0 / 3.0, 1e-300, 2.5e17, -0.0, 7.0};
  std::stringstream out;
  write_coefficients(out, c);
  CHECK(out.str().rfind("# sgdpce coefficients\n", 0) == 0);
  std::stringstream in(out.str());
  const auto back = read_coefficients(in);
  CHECK(back == c);
  std::stringstream broken("# sgdpce coefficients\nspatial_size 2\nchaos_size 1\n0 5 0x1p+0\n");
  CHECK_THROWS(read_coefficients(broken));
}

TEST_CASE("csv output carries a metadata block") {
  const auto config = ExperimentConfig::defaults("table1");
  CsvTable t{"demo", {"a", "b"}, {{"1", "2"}, {"3", format_number(0.1)}}};
  const auto text = render_csv(t, config);
  CHECK(text.find("# config_hash: " + config.hash()) != std::string::npos);
  CHECK(text.find("# seed: ") != std::string::npos);
  CHECK(text.find("# sgdpce " + library_version()) != std::string::npos);
  CHECK(text.find("\na,b\n1,2\n3,0.10000000000000001\n") != std::string::npos);
  CHECK(t.column("b") == 1);
  CHECK(format_number(1.0 / 0.0) == "inf");
}

TEST_CASE("solve runs reproduce and reload") {
  auto config = ExperimentConfig::defaults("solve");
  config.apply_override("problem.interior=8");
  config.apply_override("problem.degree=1");
  config.apply_override("sgd.iterations=0");
  config.apply_override("sgd.switch_iteration=0");
  config.apply_override("sgd.init=gaussian");
  config.apply_override("sgd.monitor_samples=100");
  config.apply_override("evaluation.n_mc=200");
  const auto zero = run_solve(config);
  const auto problem = make_problem(config);
  const Assembler a(problem, make_mesh(problem), make_basis(problem));
  CHECK(zero.coefficients == initial_coefficients(a, make_sgd_config(config)));

  config.apply_override("sgd.iterations=10");
  const auto first = run_solve(config);
  const auto second = run_solve(config);
  CHECK(first.coefficients == second.coefficients);
  for (std::size_t t = 0; t < first.output.tables.size(); ++t) {
    CHECK(render_csv(first.output.tables[t], config) ==
          render_csv(second.output.tables[t], config));
  }
  std::stringstream dump;
  write_coefficients(dump, first.coefficients);
  const auto reloaded = read_coefficients(dump);
  const GermSampler s(problem.germ_dimension(), 3);
  CHECK(estimate_energy(a, reloaded, 200, s).mean ==
        estimate_energy(a, first.coefficients, 200, s).mean);
}
