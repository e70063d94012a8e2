#pragma once

#include <memory>

#include "run_config.hpp"
#include "sbm/geometry.hpp"

namespace sbm::cli {

struct ResultRow {
  std::string experiment;
  std::string geometry;
  int level = 0;
  double h = 0;
  double lambda = 0;
  std::string metric;
  double value = 0;
  double walltime_seconds = 0;
};

struct TimingRow {
  std::string experiment;
  std::string geometry;
  int level = 0;
  double lambda = 0;
  std::string stage;
  double seconds = 0;
};

struct RunOutputs {
  std::vector<ResultRow> rows;
  std::vector<TimingRow> timings;
};

inline const char* kResultHeader = "experiment,geometry,level,h,lambda,metric,value,walltime_seconds";
inline const char* kTimingHeader = "experiment,geometry,level,lambda,stage,seconds";

std::unique_ptr<Geometry> make_geometry(const RunConfig& config);

/// Execute the configured experiment and write results.csv, timings.csv and
/// config.effective.txt (plus optional VTK/marker dumps) under out_dir.
RunOutputs run_experiment(const RunConfig& config);

/// `run <config> [--out DIR] [--threads N] [--seed S]`. Exit codes: 0 ok,
/// 2 config error, 3 solver failure, 4 geometry error, 1 anything else.
int run_cli(int argc, const char* const* argv);

}  // namespace sbm::cli
