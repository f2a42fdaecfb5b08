#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pnlab/profile.hpp"

namespace pnlab {

const std::vector<std::string>& experiment_names();

// Parsed from a flat key-value config with [experiment], [profile], [grid]
// and [params] sections. Unknown keys or a name outside experiment_names()
// are rejected up front.
struct ExperimentConfig {
  std::string experiment;

  std::string profile_kind = "sine";  // sine | sawtooth | constant | tabulated
  double amplitude = 1.0;
  double offset = 0.0;
  double phase = 0.0;
  std::string profile_path;  // tabulated only

  int nx = 65;  // strip-length axis for cell-identity
  int ny = 65;

  std::vector<double> eps_list;
  std::vector<double> T_list;
  std::vector<double> p_list;
  std::vector<double> amplitude_list;
  double t_end = 0.0;  // <= 0 picks a per-experiment default
  double tol = 1e-8;
  double tol_facet = 0.0;  // facet classification threshold; <= 0 picks 10*hy
  int pairs = 20;  // comparison-batch size
  unsigned long long seed = 1;
  std::string output_dir = "out";

  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  PeriodicProfile make_profile() const;
  void validate() const;
};

struct Assertion {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
};

// Everything a run produces, held as payload bytes so writing is a separate
// (and testable) concern. Identical config and seed give identical CSV bytes.
struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> tables;  // name -> csv
  std::vector<std::pair<std::string, std::string>> svgs;    // name -> svg
  std::string summary_json;
  std::vector<Assertion> assertions;

  bool pass() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Tables land as <name>.csv, renders as <name>.svg, the summary as
// summary.json. Returns the paths written.
std::vector<std::string> write_report(const ExperimentReport& rep, const std::string& dir);

// Relative directories resolve under $PNLAB_OUTPUT_ROOT when it is set.
std::string resolve_output_dir(const std::string& dir);

}  // namespace pnlab
