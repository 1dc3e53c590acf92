#pragma once

#include <functional>
#include <variant>

#include "csaddle/field.hpp"
#include "csaddle/metric.hpp"

namespace csaddle {

/// F(phi) = int kappa^2/2 |grad phi|^2 + (phi^2-1)^2/4 on [0,extent].
struct GinzburgLandau1D {
  double kappa = 0.01;
  /// Split constant C: contractive quadratic term C*phi^2, expansive part
  /// -phi^4/4 + (C+1/2)*phi^2, convex while phi^2 <= (2C+1)/3.
  double c_split = 1.0;
};

/// F(phi) = int xi^2/2 [(Delta+1)phi]^2 + tau/2 phi^2 - gamma/3! phi^3 + 1/4! phi^4.
struct LandauBrazovskii2D {
  double tau = -0.15;
  double xi = 1.0;
  double gamma = 0.25;
  /// Split constant C of the expansive part; C = 22.75 keeps it convex on
  /// |phi| <= sqrt(gamma^2 + 2C) - gamma = 6.5.
  double c_split = 22.75;
};

using EnergyModel = std::variant<GinzburgLandau1D, LandauBrazovskii2D>;

/// Throws if the model parameters are out of range or the field's grid does
/// not suit the model (GL: 1-D; LB: 2-D periodic).
void check_compatible(const EnergyModel& model, const Grid& grid);

double energy(const EnergyModel& model, const Field& f);

/// L2 variational derivative: GL -kappa^2 Lap phi + phi^3 - phi,
/// LB xi^2 (Lap+1)^2 phi + Phi'(phi).
Field gradient_l2(const EnergyModel& model, const Field& f);

/// Hessian at f applied to psi.
Field hessian_apply(const EnergyModel& model, const Field& f, const Field& psi);

/// <psi, Hessian(f) psi> evaluated analytically (no finite differencing).
double hessian_quad(const EnergyModel& model, const Field& f, const Field& psi);

/// Largest |phi| for which the model's nonlinear expansive part stays convex.
double expansive_convex_bound(const EnergyModel& model);

enum class SplitKind { LinearContractive, NonlinearContractive };

/// One half of a convex splitting F = F_c - F_e.
struct SplitPart {
  std::function<double(const Field&)> value;
  std::function<Field(const Field&)> gradient;
  /// Quadratic form of the part's Hessian at `at` applied to `psi`.
  std::function<double(const Field& at, const Field& psi)> hess_quad;
};

struct SplitPair {
  SplitKind kind;
  SplitPart contractive;
  SplitPart expansive;
};

/// The model's convex splitting with either a linear contractive gradient
/// (implicit side of the schemes) or a linear expansive gradient.
SplitPair split(const EnergyModel& model, SplitKind kind);

}  // namespace csaddle
