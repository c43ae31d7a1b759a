#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sgdpce/config.hpp"
#include "sgdpce/estimators.hpp"
#include "sgdpce/problem.hpp"
#include "sgdpce/sgd.hpp"

namespace sgdpce {

std::string library_version();

struct CsvTable {
  std::string name; // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name; throws std::out_of_range.
  std::size_t column(const std::string &name) const;
};

/// One pass/fail assertion of an experiment.
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation; // e.g. "<=", ">", "flag"
  double threshold = 0.0;
  bool passed = false;
};

struct ExperimentOutput {
  std::vector<CsvTable> tables;
  std::vector<Check> checks;

  bool passed() const;
  const CsvTable &table(const std::string &name) const;
  const Check &check(const std::string &name) const;
};

/// Shortest round-trip decimal rendering ("%.17g", "inf", "nan").
std::string format_number(double value);

ProblemInstance make_problem(const ExperimentConfig &config);
SgdConfig make_sgd_config(const ExperimentConfig &config);

ExperimentOutput run_table1(const ExperimentConfig &config);
ExperimentOutput run_table2(const ExperimentConfig &config);
ExperimentOutput run_table3(const ExperimentConfig &config);
ExperimentOutput run_fig_convergence(const ExperimentConfig &config);
ExperimentOutput run_fig_cdf(const ExperimentConfig &config);
ExperimentOutput run_fig_staged_hessian(const ExperimentConfig &config);
ExperimentOutput run_fig_batch_study(const ExperimentConfig &config);

struct SolveOutput {
  ExperimentOutput output;
  CoefficientVector coefficients;
};
SolveOutput run_solve(const ExperimentConfig &config);

/// Dispatches on experiment.id. For "solve" the coefficient dump is written
/// as an extra table-less file by write_outputs.
ExperimentOutput run_experiment(const ExperimentConfig &config);

/// CSV text: metadata comment block, header row, data rows.
std::string render_csv(const CsvTable &table, const ExperimentConfig &config);
std::string render_checks(const std::vector<Check> &checks,
                          const ExperimentConfig &config);

/// Writes every table as <dir>/<name>.csv plus <dir>/<experiment>_checks.csv.
/// Returns the written paths.
std::vector<std::string> write_outputs(const ExperimentOutput &output,
                                       const ExperimentConfig &config,
                                       const std::string &directory);

/// Plain-text coefficient dump:
///   # sgdpce coefficients
///   spatial_size M
///   chaos_size P
///   i j value      (0-based, value as C99 hexadecimal float)
void write_coefficients(std::ostream &out, const CoefficientVector &c);
CoefficientVector read_coefficients(std::istream &in);

} // namespace sgdpce
