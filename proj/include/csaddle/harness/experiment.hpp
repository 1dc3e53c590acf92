#pragma once

#include <optional>

#include "csaddle/harness/config.hpp"

namespace csaddle::harness {

struct RunOptions {
  bool trace = false;
  std::string out_dir_override;
  std::optional<std::uint64_t> seed_override;
  bool write_outputs = true;
};

struct RunResult {
  Field final_phi;
  std::vector<CycleReport> cycles;
  double energy = 0.0;
  double grad_norm = 0.0;
  std::vector<double> spectrum;
  long total_inner = 0;
  bool diverged = false;
  double initial_grad_norm = 0.0;
  double initial_mass = 0.0;
};

/// Execute a spec (relax or IMF) and write result.csv, final.field,
/// spectrum.csv, and trace.csv (with trace on) into the output directory.
/// Divergence is a recorded outcome, not an error.
RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts = {});

struct ConvergenceSeries {
  std::uint64_t seed = 0;
  std::vector<double> errors;  // ||delta F|| per cycle, starting at cycle 0
};

/// Per-cycle error series of the IMF run (one per seed when the spec carries
/// a perturbation). Writes convergence.csv when an output directory is set.
std::vector<ConvergenceSeries> convergence_study(const ExperimentSpec& spec,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const std::string& out_dir = "");

/// Least-squares slope of log e_{k+1} against log e_k over the last
/// `pairs` resolvable cycles (both errors above the floor).
double fitted_order(const std::vector<double>& errors, int pairs = 3, double floor = 1e-12);

}  // namespace csaddle::harness
