#pragma once

#include <optional>

#include "csaddle/energy.hpp"
#include "csaddle/metric.hpp"

namespace csaddle {

/// Frozen data of one IMF cycle: the anchor phi_k, the min-mode v (unit norm
/// in the metric, zero mass in H^-1), and the auxiliary functional
///   L(phi) = (1-alpha) F(phi) + alpha F(phi - tv) - beta F(phi_k + tv),
///   tv = (v (x) v)(phi - phi_k),  alpha + beta > 1.
/// In H^-1 the projector pairing reduces to L2 against w = (-Delta)^{-1} v.
struct AuxProblem {
  EnergyModel model;
  Metric metric;
  Field phi_k;
  Field v;
  std::optional<Field> w;  // H^-1 only
  double alpha = 0.0;
  double beta = 2.0;
  double vv_l2 = 1.0;  // <v,v>_L2, kept explicitly (v is H^-1-normalized there)

  static AuxProblem make(EnergyModel model, Metric metric, Field phi_k, Field v,
                         double alpha = 0.0, double beta = 2.0);
};

/// Rank-one pairing coefficient <v, f - phi_k> (L2) or <w, f - phi_k> (H^-1).
double phi_hat_coef(const AuxProblem& p, const Field& f);

/// phi_k + (v (x) v)(f - phi_k) in the problem's metric.
Field phi_hat(const AuxProblem& p, const Field& f);

double aux_value(const AuxProblem& p, const Field& f);

/// L2 variational derivative of L; the building block for both the metric
/// gradient and the inner-iteration error norms.
Field aux_l2_derivative(const AuxProblem& p, const Field& f);

/// Metric gradient of L: the L2 derivative itself, or -Delta of it in H^-1
/// (so the inner gradient flow is phi_t = -aux_gradient).
Field aux_gradient(const AuxProblem& p, const Field& f);

/// ||delta L|| in the metric (the tables' inner error measure).
double aux_grad_norm(const AuxProblem& p, const Field& f);

/// Convex splitting of L. The dual-split route combines a linear-contractive
/// splitting for the F(phi)/F(phi_k+tv) terms with a nonlinear-contractive one
/// for the others, so the contractive gradient stays linear in phi.
struct AuxSplit {
  std::function<double(const Field&)> value_c, value_e;
  std::function<Field(const Field&)> grad_c, grad_e;  // L2 derivatives
  std::function<double(const Field& at, const Field& psi)> hess_quad_c, hess_quad_e;
};

/// Dual-split decomposition; requires alpha >= 0 and beta >= 0.
AuxSplit build_aux_split(const AuxProblem& p, const SplitPair& split_lin,
                         const SplitPair& split_nl);

/// Single-splitting decomposition of L with the sign-branch selection in the
/// contractive/expansive assignment; value and Hessian-quadratic-form level
/// (used by the convexity property suites for all three sign branches).
struct AuxSplitValues {
  std::function<double(const Field&)> value_c, value_e;
  std::function<double(const Field& at, const Field& psi)> hess_quad_c, hess_quad_e;
};
AuxSplitValues single_aux_split(const AuxProblem& p, const SplitPair& pair);

}  // namespace csaddle
