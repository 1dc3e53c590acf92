#include "csaddle/harness/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "csaddle/harness/initial.hpp"
#include "csaddle/io.hpp"
#include "csaddle/ops.hpp"

namespace csaddle::harness {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

Metric make_metric(const ExperimentSpec& spec, const GridPtr& grid) {
  return spec.metric == MetricKind::L2 ? Metric::l2(grid) : Metric::hminus1(grid);
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  const GridPtr grid = spec.make_grid();
  check_compatible(spec.model, *grid);
  InitialCondition init = spec.init;
  if (opts.seed_override) {
    init.seed = *opts.seed_override;
    init.seed_given = true;
  }
  Field phi0 = build_initial(init, grid, spec.metric);
  const Metric metric = make_metric(spec, grid);

  RunResult res;
  res.initial_mass = mass(phi0);
  res.initial_grad_norm = metric.grad_norm(gradient_l2(spec.model, phi0));

  std::string trace;
  if (opts.trace) trace = "cycle,iter,L,normdL,F,normdF\n";

  if (spec.mode == ExperimentSpec::Mode::Relax) {
    StepperConfig cfg = spec.stepper_config();
    auto stepper = make_relax_stepper(cfg, spec.model, grid);
    Field phi = phi0;
    double grad = res.initial_grad_norm;
    long it = 0;
    bool diverged = false;
    while (grad > spec.outer_tol && it < spec.relax_max_steps) {
      phi = stepper->step(phi);
      ++it;
      if (!phi.all_finite() || phi.max_abs() > 1e6) {
        diverged = true;
        break;
      }
      grad = metric.grad_norm(gradient_l2(spec.model, phi));
      if (opts.trace) {
        const double F = energy(spec.model, phi);
        trace += "0," + std::to_string(it) + "," + fmt(F) + "," + fmt(grad) + "," + fmt(F) +
                 "," + fmt(grad) + "\n";
      }
      if (!std::isfinite(grad)) {
        diverged = true;
        break;
      }
    }
    res.final_phi = phi;
    res.total_inner = it;
    res.diverged = diverged;
    res.grad_norm = grad;
    if (!diverged) res.energy = energy(spec.model, phi);
  } else {
    ImfOptions iopts{metric, spec.stepper_config()};
    iopts.inner = spec.inner;
    iopts.outer_tol = spec.outer_tol;
    iopts.max_cycles = spec.max_cycles;
    iopts.eig_tol = spec.eig_tol;
    iopts.eig_max_iterations = spec.eig_max_iter;
    iopts.deflate = spec.deflate;
    iopts.deflate_angle_deg = spec.deflate_angle_deg;
    iopts.guard_cap = spec.guard_cap;
    if (opts.trace) {
      iopts.observer = [&trace](int cycle, long iter, const Field&, double L, double gradL,
                                double F, double gradF) {
        trace += std::to_string(cycle) + "," + std::to_string(iter) + "," + fmt(L) + "," +
                 fmt(gradL) + "," + fmt(F) + "," + fmt(gradF) + "\n";
      };
    }
    auto [phi, reports] = run_imf(spec.model, phi0, iopts);
    res.final_phi = phi;
    res.cycles = std::move(reports);
    for (const auto& r : res.cycles) {
      res.total_inner += r.inner_iterations;
      res.diverged = res.diverged || r.diverged;
    }
    res.grad_norm = metric.grad_norm(gradient_l2(spec.model, res.final_phi));
    if (!res.diverged) res.energy = energy(spec.model, res.final_phi);
  }

  if (!res.diverged && res.final_phi.all_finite())
    res.spectrum = spectrum_head(spec.model, res.final_phi, spec.spectrum_k, metric);

  if (opts.write_outputs) {
    namespace fs = std::filesystem;
    const std::string dir = opts.out_dir_override.empty() ? spec.out_dir : opts.out_dir_override;
    fs::create_directories(dir);

    std::string result = "name,F,grad_norm";
    for (size_t i = 0; i < res.spectrum.size(); ++i) result += ",lambda" + std::to_string(i + 1);
    result += ",cycles,total_inner_iterations,diverged\n";
    result += spec.name + "," + fmt(res.energy) + "," + fmt(res.grad_norm);
    for (double lam : res.spectrum) result += "," + fmt(lam);
    result += "," + std::to_string(res.cycles.size()) + "," + std::to_string(res.total_inner) +
              "," + (res.diverged ? "true" : "false") + "\n";
    write_text(dir + "/result.csv", result);

    if (res.final_phi.all_finite()) save_field(res.final_phi, dir + "/final.field");
    if (!res.spectrum.empty()) {
      std::string spectrum = "index,lambda\n";
      for (size_t i = 0; i < res.spectrum.size(); ++i)
        spectrum += std::to_string(i) + "," + fmt(res.spectrum[i]) + "\n";
      write_text(dir + "/spectrum.csv", spectrum);
    }
    if (opts.trace) write_text(dir + "/trace.csv", trace);
  }
  return res;
}

std::vector<ConvergenceSeries> convergence_study(const ExperimentSpec& spec,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const std::string& out_dir) {
  std::vector<std::uint64_t> use_seeds = seeds;
  if (spec.init.perturb_amp <= 0.0 || use_seeds.empty()) use_seeds = {spec.init.seed};

  std::vector<ConvergenceSeries> series;
  for (std::uint64_t seed : use_seeds) {
    RunOptions opts;
    opts.write_outputs = false;
    if (spec.init.perturb_amp > 0.0) opts.seed_override = seed;
    RunResult res = run_experiment(spec, opts);
    ConvergenceSeries s;
    s.seed = seed;
    s.errors.push_back(res.initial_grad_norm);
    for (const auto& rep : res.cycles) s.errors.push_back(rep.outer_grad_F);
    series.push_back(std::move(s));
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::string csv = "seed,cycle,err\n";
    for (const auto& s : series)
      for (size_t k = 0; k < s.errors.size(); ++k)
        csv += std::to_string(s.seed) + "," + std::to_string(k) + "," + fmt(s.errors[k]) + "\n";
    write_text(out_dir + "/convergence.csv", csv);
  }
  return series;
}

double fitted_order(const std::vector<double>& errors, int pairs, double floor) {
  std::vector<std::pair<double, double>> pts;
  for (size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k] > floor && errors[k + 1] > floor && std::isfinite(errors[k]) &&
        std::isfinite(errors[k + 1]))
      pts.emplace_back(std::log(errors[k]), std::log(errors[k + 1]));
  }
  if (pts.size() > static_cast<size_t>(pairs))
    pts.erase(pts.begin(), pts.end() - pairs);
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace csaddle::harness
