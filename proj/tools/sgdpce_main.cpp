#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgdpce/config.hpp"
#include "sgdpce/evaluation.hpp"
#include "sgdpce/experiments.hpp"

using namespace sgdpce;

namespace {

ExperimentConfig build_config(const std::string &id, const std::string &path,
                              const std::vector<std::string> &overrides,
                              const std::string &seed, const std::string &out) {
  ExperimentConfig config =
      path.empty() ? ExperimentConfig::defaults(id) : ExperimentConfig::load(path);
  if (!path.empty() && config.experiment() != id) {
    throw ConfigError("config file '" + path + "' is for experiment '" +
                      config.experiment() + "', not '" + id + "'");
  }
  for (const auto &o : overrides) {
    config.apply_override(o);
  }
  if (!seed.empty()) config.set("experiment.seed", seed);
  if (!out.empty()) config.set("experiment.output", out);
  return config;
}

void report(const ExperimentOutput &output, const std::vector<std::string> &paths) {
  for (const auto &p : paths) {
    std::printf("wrote %s\n", p.c_str());
  }
  for (const auto &c : output.checks) {
    std::printf("[%s] %s: %s %s %s\n", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), format_number(c.value).c_str(),
                c.relation.c_str(), format_number(c.threshold).c_str());
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Stochastic-gradient polynomial chaos solver for random "
               "elliptic problems"};
  app.require_subcommand(1);

  std::string config_path, seed, out_dir;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--config", config_path, "config file (key = value sections)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "root seed, overrides experiment.seed");
    cmd->add_option("--out", out_dir, "output directory, overrides experiment.output");
    cmd->add_option("--override", overrides, "section.key=value, repeatable");
  };

  auto *solve = app.add_subcommand("solve", "run SGD and dump coefficients");
  add_common(solve);

  std::string experiment_id;
  auto *experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("id", experiment_id, "experiment id")
      ->required()
      ->check(CLI::IsMember(experiment_ids()));
  add_common(experiment);

  std::string print_id = "solve";
  auto *print = app.add_subcommand("print-config",
                                   "print the resolved config of an experiment");
  print->add_option("id", print_id, "experiment id")
      ->check(CLI::IsMember(experiment_ids()));
  add_common(print);

  std::string eval_config, eval_dump;
  auto *energy = app.add_subcommand("energy", "estimate J(c) for a coefficient dump");
  energy->add_option("--config", eval_config, "config of the run")->required();
  energy->add_option("--coefficients", eval_dump, "coefficient dump")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*print) {
      std::cout << build_config(print_id, config_path, overrides, seed, out_dir).serialize();
      return 0;
    }
    if (*energy) {
      const auto config = ExperimentConfig::load(eval_config);
      const auto problem = make_problem(config);
      std::ifstream in(eval_dump);
      if (!in) throw std::runtime_error("cannot open '" + eval_dump + "'");
      const auto c = read_coefficients(in);
      const auto e = estimate_energy(problem, make_mesh(problem), make_basis(problem),
                                     c, config.count("evaluation.n_mc"), config.seed());
      std::printf("energy,energy_se,samples\n%s,%s,%zu\n", format_number(e.mean).c_str(),
                  format_number(e.standard_error).c_str(), e.sample_count);
      return 0;
    }
    if (*solve) {
      const auto config = build_config("solve", config_path, overrides, seed, out_dir);
      const auto result = run_solve(config);
      const std::string dir = config.text("experiment.output");
      auto paths = write_outputs(result.output, config, dir);
      const std::string dump = dir + "/coefficients.txt";
      std::ofstream file(dump, std::ios::binary);
      write_coefficients(file, result.coefficients);
      paths.push_back(dump);
      std::ofstream(dir + "/config.txt", std::ios::binary) << config.serialize();
      report(result.output, paths);
      return 0;
    }
    const auto config =
        build_config(experiment_id, config_path, overrides, seed, out_dir);
    const auto output = run_experiment(config);
    const std::string dir = config.text("experiment.output");
    const auto paths = write_outputs(output, config, dir);
    std::ofstream(dir + "/config.txt", std::ios::binary) << config.serialize();
    report(output, paths);
    return output.passed() ? 0 : 2;
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
