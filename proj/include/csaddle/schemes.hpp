#pragma once

#include <memory>

#include "csaddle/aux.hpp"
#include "csaddle/spectral.hpp"

namespace csaddle {

enum class SchemeKind { CS, nCS };
enum class ProblemKind { AC_L2, CH_Hm1, LB_Hm1 };

struct StepperConfig {
  double dt = 0.1;
  SchemeKind kind = SchemeKind::CS;
  ProblemKind problem = ProblemKind::AC_L2;
  bool relaxation = false;  // v = 0 mode (plain gradient flow of F)
};

/// Constant-coefficient operator, diagonal in the grid's Laplacian eigenbasis,
/// plus at most two rank-one corrections s * a <b, .>_L2. The diagonal part is
/// inverted in transform space, the corrections by the Woodbury identity.
class ImplicitOperator {
 public:
  ImplicitOperator(GridPtr grid, Eigen::ArrayXd mode_multipliers);

  void add_rank_one(double s, Field a, Field b);

  Field solve(const Field& rhs) const;
  Field apply(const Field& x) const;

 private:
  Field diag_solve(const Field& rhs) const;

  GridPtr grid_;
  Eigen::ArrayXd mult_, mult_inv_;
  struct Correction {
    double s;
    Field a, b;
    Field minv_a;  // (operator so far)^-1 a
    double denom;  // 1 + s <b, minv_a>
  };
  std::vector<Correction> corrections_;
};

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual Field step(const Field& f) = 0;
};

/// Stepper for the inner gradient flow of the cycle's auxiliary functional.
std::unique_ptr<Stepper> make_stepper(const StepperConfig& cfg, const AuxProblem& p);

/// v = 0 stepper: the plain (relaxation) gradient flow of F in the metric the
/// problem kind implies.
std::unique_ptr<Stepper> make_relax_stepper(const StepperConfig& cfg, const EnergyModel& model,
                                            GridPtr grid);

/// Single steps (the scheme equations one at a time).
Field step_cs_ac(const StepperConfig& cfg, const AuxProblem& p, const Field& f);
Field step_ncs_ac(const StepperConfig& cfg, const AuxProblem& p, const Field& f);
Field step_cs_ch(const StepperConfig& cfg, const AuxProblem& p, const Field& f);
Field step_ncs_ch(const StepperConfig& cfg, const AuxProblem& p, const Field& f);
Field step_cs_lb(const StepperConfig& cfg, const AuxProblem& p, const Field& f);
Field step_ncs_lb(const StepperConfig& cfg, const AuxProblem& p, const Field& f);

struct RelaxResult {
  Field phi;
  long iterations = 0;
  double grad_norm = 0.0;
  double energy = 0.0;
  bool converged = false;
  bool diverged = false;
};

/// Run the v = 0 flow until ||delta F||_metric <= tol (the stable states of
/// the experiments are produced this way).
RelaxResult relax(const EnergyModel& model, const Field& f0, const StepperConfig& cfg,
                  double tol, long max_steps);

/// Metric implied by a problem kind (AC: L2, CH/LB: H^-1).
MetricKind problem_metric(ProblemKind problem);

}  // namespace csaddle
