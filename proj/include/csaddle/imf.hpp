#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "csaddle/aux.hpp"
#include "csaddle/minmode.hpp"
#include "csaddle/schemes.hpp"

namespace csaddle {

struct InnerStop {
  enum class Mode { Tolerance, Cap };
  Mode mode = Mode::Tolerance;
  double tolerance = 1e-8;  // on ||delta L|| in the metric
  int cap = 100;
  long hard_cap = 2000000;  // safety limit in tolerance mode

  static InnerStop tol(double t, long hard_cap = 2000000) {
    return InnerStop{Mode::Tolerance, t, 100, hard_cap};
  }
  static InnerStop capped(int c) { return InnerStop{Mode::Cap, 0.0, c, 0}; }
};

enum class StopReason { Tolerance, IterationCap, Diverged };

struct CycleReport {
  int cycle = 0;
  long inner_iterations = 0;
  double final_grad_L = 0.0;  // ||delta L|| in metric at exit
  double outer_grad_F = 0.0;  // ||delta F|| in metric at cycle end
  double lambda_min = 0.0;
  int eig_iterations = 0;
  double energy_F = 0.0;
  double max_abs_phi = 0.0;
  double wall_seconds = 0.0;
  StopReason reason = StopReason::Tolerance;
  bool diverged = false;
  bool stalled = false;  // diverged via sustained lack of progress
};

/// ||phi_next - phi_prev||_metric / dt: the scheme-level gradient of L across
/// one step (what the inner stopping tolerances measure).
double step_residual_norm(const Metric& metric, const Field& prev, const Field& next, double dt);

using InnerObserver =
    std::function<void(long iter, const Field& phi, double L, double gradL, double F, double gradF)>;
using TraceObserver = std::function<void(int cycle, long iter, const Field& phi, double L,
                                         double gradL, double F, double gradF)>;

/// One IMF cycle: iterate the stepper on the inner gradient flow of L from
/// phi_k until the stop fires. Divergence (non-finite values or |phi| beyond
/// 1e6) is a flagged outcome, not an error.
std::pair<Field, CycleReport> run_cycle(const AuxProblem& p, const StepperConfig& cfg,
                                        const InnerStop& stop,
                                        const InnerObserver& observer = {});

struct ImfOptions {
  Metric metric;
  StepperConfig stepper;
  InnerStop inner;
  double outer_tol = 1e-8;  // on ||delta F|| in the metric
  int max_cycles = 500;
  double eig_tol = 1e-9;
  int eig_max_iterations = 2000;
  bool deflate = true;
  double deflate_angle_deg = 10.0;
  int guard_cap = 100;  // inner budget when lambda_min(phi_k) >= 0
  TraceObserver observer;
  std::function<void(const CycleReport&)> cycle_observer;

  ImfOptions(Metric m, StepperConfig s) : metric(std::move(m)), stepper(s) {}
};

/// The outer loop: min-mode eigensolve (warm-started from the previous
/// cycle), then one inner minimization, until ||delta F|| <= outer_tol.
std::pair<Field, std::vector<CycleReport>> run_imf(const EnergyModel& model, const Field& f0,
                                                   const ImfOptions& opts);

}  // namespace csaddle
