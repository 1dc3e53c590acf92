#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "csaddle/harness/experiment.hpp"
#include "csaddle/harness/initial.hpp"
#include "csaddle/harness/tables.hpp"

using namespace csaddle;
using namespace csaddle::harness;

namespace {

// exit codes: 0 success, 1 validation error, 2 runtime failure
constexpr int kOk = 0, kValidation = 1, kRuntime = 2;

int run_spec(const std::string& config, bool trace, const std::string& out,
             std::optional<std::uint64_t> seed, bool force_relax) {
  ExperimentSpec spec = load_config(config);
  if (force_relax) spec.mode = ExperimentSpec::Mode::Relax;
  RunOptions opts;
  opts.trace = trace;
  opts.out_dir_override = out;
  opts.seed_override = seed;
  RunResult res = run_experiment(spec, opts);
  const std::string dir = out.empty() ? spec.out_dir : out;
  std::printf("%s: %s  F=%.10g  |dF|=%.3e  cycles=%zu  inner=%ld%s\n", spec.name.c_str(),
              res.diverged ? "DIVERGED" : "converged", res.energy, res.grad_norm,
              res.cycles.size(), res.total_inner, (", results in " + dir).c_str());
  if (!res.spectrum.empty()) {
    std::printf("lambda head:");
    for (double lam : res.spectrum) std::printf(" %.6g", lam);
    std::printf("\n");
  }
  return res.diverged ? kRuntime : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transition-state search for gradient-flow energy functionals "
               "(IMF outer loop, convex-splitting inner steppers)"};
  app.require_subcommand(1);

  std::string config, out_dir, data_dir;
  bool trace = false;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd, bool with_config = true) {
    if (with_config) cmd->add_option("config", config, "experiment config file")->required();
    cmd->add_flag("--trace", trace, "write per-iteration trace.csv");
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; }, "perturbation seed override");
  };

  auto* run = app.add_subcommand("run", "run an experiment (IMF saddle search or relaxation)");
  add_common(run);
  auto* relax_cmd = app.add_subcommand("relax", "run the v=0 relaxation flow of a config");
  add_common(relax_cmd);
  auto* eig = app.add_subcommand("eig", "print the spectrum head of the configured state");
  add_common(eig);
  auto* table = app.add_subcommand("table", "reproduce one of the benchmark tables");
  std::string table_id;
  table->add_option("id", table_id, "table id (T1a..T5b)")->required();
  table->add_option("--out", out_dir, "output directory");
  table->add_option("--data", data_dir, "reference data directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_spec(config, trace, out_dir, seed, false);
    if (relax_cmd->parsed()) return run_spec(config, trace, out_dir, seed, true);
    if (eig->parsed()) {
      ExperimentSpec spec = load_config(config);
      const GridPtr grid = spec.make_grid();
      Field phi = build_initial(spec.init, grid, spec.metric);
      const Metric metric =
          spec.metric == MetricKind::L2 ? Metric::l2(grid) : Metric::hminus1(grid);
      auto head = spectrum_head(spec.model, phi, spec.spectrum_k, metric);
      std::printf("index,lambda\n");
      for (size_t i = 0; i < head.size(); ++i) std::printf("%zu,%.12g\n", i, head[i]);
      return kOk;
    }
    if (table->parsed()) {
      TableResult res = reproduce_table(table_id, out_dir.empty() ? "." : out_dir, data_dir);
      int pass = 0;
      for (const auto& c : res.cells)
        if (c.status == TableCell::Status::Pass) ++pass;
      std::printf("%s: %d/%zu cells pass, %d soft, %d fail (see %s/%s.csv)\n", res.id.c_str(),
                  pass, res.cells.size(), res.soft_failures, res.hard_failures,
                  out_dir.empty() ? "." : out_dir.c_str(), res.id.c_str());
      return kOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
