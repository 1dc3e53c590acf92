#include "csaddle/energy.hpp"

#include <cmath>

#include "csaddle/ops.hpp"

namespace csaddle {

namespace {

double integral(const Field& carrier, Eigen::ArrayXd integrand) {
  return mass(carrier.like(std::move(integrand)));
}

}  // namespace

void check_compatible(const EnergyModel& model, const Grid& grid) {
  if (std::holds_alternative<GinzburgLandau1D>(model)) {
    const auto& m = std::get<GinzburgLandau1D>(model);
    if (m.kappa <= 0.0) throw std::invalid_argument("GinzburgLandau1D: kappa must be positive");
    if (m.c_split < 1.0) throw std::invalid_argument("GinzburgLandau1D: split constant must be >= 1");
    if (grid.dim() != 1)
      throw std::invalid_argument("GinzburgLandau1D: needs a 1-D grid");
  } else {
    const auto& m = std::get<LandauBrazovskii2D>(model);
    if (m.xi <= 0.0) throw std::invalid_argument("LandauBrazovskii2D: xi must be positive");
    if (grid.dim() != 2 || grid.bc() != Bc::Periodic)
      throw std::invalid_argument("LandauBrazovskii2D: needs a 2-D periodic grid");
  }
}

double energy(const EnergyModel& model, const Field& f) {
  check_compatible(model, f.grid());
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&model)) {
    const auto& u = f.values();
    return 0.5 * gl->kappa * gl->kappa * dirichlet_form(f) +
           integral(f, 0.25 * (u.square() - 1.0).square());
  }
  const auto& lb = std::get<LandauBrazovskii2D>(model);
  Field hl = laplacian(f);
  hl.values() += f.values();
  const auto& u = f.values();
  Eigen::ArrayXd bulk = 0.5 * lb.tau * u.square() - lb.gamma / 6.0 * u.cube() +
                        (1.0 / 24.0) * u.square().square();
  return 0.5 * lb.xi * lb.xi * integral(f, hl.values().square()) + integral(f, std::move(bulk));
}

Field gradient_l2(const EnergyModel& model, const Field& f) {
  check_compatible(model, f.grid());
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&model)) {
    Field lap = laplacian(f);
    const auto& u = f.values();
    return f.like(-gl->kappa * gl->kappa * lap.values() + u.cube() - u);
  }
  const auto& lb = std::get<LandauBrazovskii2D>(model);
  Field hl2 = helmholtz_sq(f);
  const auto& u = f.values();
  Eigen::ArrayXd phi1 = lb.tau * u - 0.5 * lb.gamma * u.square() + (1.0 / 6.0) * u.cube();
  return f.like(lb.xi * lb.xi * hl2.values() + std::move(phi1));
}

Field hessian_apply(const EnergyModel& model, const Field& f, const Field& psi) {
  check_compatible(model, f.grid());
  require_same_grid(f, psi, "hessian_apply");
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&model)) {
    Field lap = laplacian(psi);
    return f.like(-gl->kappa * gl->kappa * lap.values() +
                  (3.0 * f.values().square() - 1.0) * psi.values());
  }
  const auto& lb = std::get<LandauBrazovskii2D>(model);
  Field hl2 = helmholtz_sq(psi);
  Eigen::ArrayXd phi2 = lb.tau - lb.gamma * f.values() + 0.5 * f.values().square();
  return f.like(lb.xi * lb.xi * hl2.values() + phi2 * psi.values());
}

double hessian_quad(const EnergyModel& model, const Field& f, const Field& psi) {
  check_compatible(model, f.grid());
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&model)) {
    return gl->kappa * gl->kappa * dirichlet_form(psi) +
           integral(psi, (3.0 * f.values().square() - 1.0) * psi.values().square());
  }
  const auto& lb = std::get<LandauBrazovskii2D>(model);
  Field hl = laplacian(psi);
  hl.values() += psi.values();
  Eigen::ArrayXd phi2 = lb.tau - lb.gamma * f.values() + 0.5 * f.values().square();
  return lb.xi * lb.xi * integral(psi, hl.values().square()) +
         integral(psi, phi2 * psi.values().square());
}

double expansive_convex_bound(const EnergyModel& model) {
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&model))
    return std::sqrt((2.0 * gl->c_split + 1.0) / 3.0);
  const auto& lb = std::get<LandauBrazovskii2D>(model);
  return std::sqrt(lb.gamma * lb.gamma + 2.0 * lb.c_split) - lb.gamma;
}

namespace {

SplitPair split_gl(const GinzburgLandau1D& gl, SplitKind kind) {
  const double k2 = gl.kappa * gl.kappa;
  const double c = gl.c_split;
  SplitPair pair;
  pair.kind = kind;
  if (kind == SplitKind::LinearContractive) {
    pair.contractive.value = [k2, c](const Field& f) {
      return 0.5 * k2 * dirichlet_form(f) + integral(f, c * f.values().square() + 0.25);
    };
    pair.contractive.gradient = [k2, c](const Field& f) {
      return f.like(-k2 * laplacian(f).values() + 2.0 * c * f.values());
    };
    pair.contractive.hess_quad = [k2, c](const Field&, const Field& psi) {
      return k2 * dirichlet_form(psi) + 2.0 * c * inner_l2(psi, psi);
    };
    pair.expansive.value = [c](const Field& f) {
      return integral(f, -0.25 * f.values().square().square() + (c + 0.5) * f.values().square());
    };
    pair.expansive.gradient = [c](const Field& f) {
      return f.like(-f.values().cube() + (2.0 * c + 1.0) * f.values());
    };
    pair.expansive.hess_quad = [c](const Field& at, const Field& psi) {
      return integral(psi, (2.0 * c + 1.0 - 3.0 * at.values().square()) * psi.values().square());
    };
  } else {
    pair.contractive.value = [k2](const Field& f) {
      return 0.5 * k2 * dirichlet_form(f) +
             integral(f, 0.25 * f.values().square().square() + 0.25);
    };
    pair.contractive.gradient = [k2](const Field& f) {
      return f.like(-k2 * laplacian(f).values() + f.values().cube());
    };
    pair.contractive.hess_quad = [k2](const Field& at, const Field& psi) {
      return k2 * dirichlet_form(psi) +
             integral(psi, 3.0 * at.values().square() * psi.values().square());
    };
    pair.expansive.value = [](const Field& f) {
      return integral(f, 0.5 * f.values().square());
    };
    pair.expansive.gradient = [](const Field& f) { return f; };
    pair.expansive.hess_quad = [](const Field&, const Field& psi) {
      return inner_l2(psi, psi);
    };
  }
  return pair;
}

SplitPair split_lb(const LandauBrazovskii2D& lb, SplitKind kind) {
  const double x2 = lb.xi * lb.xi;
  const double c = lb.c_split;
  const double tau = lb.tau;
  const double gamma = lb.gamma;
  SplitPair pair;
  pair.kind = kind;
  if (kind == SplitKind::LinearContractive) {
    pair.contractive.value = [x2, c, tau](const Field& f) {
      Field hl = laplacian(f);
      hl.values() += f.values();
      return 0.5 * x2 * integral(f, hl.values().square()) +
             0.5 * (tau + c) * integral(f, f.values().square());
    };
    pair.contractive.gradient = [x2, c, tau](const Field& f) {
      return f.like(x2 * helmholtz_sq(f).values() + (tau + c) * f.values());
    };
    pair.contractive.hess_quad = [x2, c, tau](const Field&, const Field& psi) {
      Field hl = laplacian(psi);
      hl.values() += psi.values();
      return x2 * integral(psi, hl.values().square()) + (tau + c) * inner_l2(psi, psi);
    };
    pair.expansive.value = [c, gamma](const Field& f) {
      const auto& u = f.values();
      return integral(f, -(1.0 / 24.0) * u.square().square() + gamma / 6.0 * u.cube() +
                             0.5 * c * u.square());
    };
    pair.expansive.gradient = [c, gamma](const Field& f) {
      const auto& u = f.values();
      return f.like(-(1.0 / 6.0) * u.cube() + 0.5 * gamma * u.square() + c * u);
    };
    pair.expansive.hess_quad = [c, gamma](const Field& at, const Field& psi) {
      const auto& u = at.values();
      return integral(psi, (c + gamma * u - 0.5 * u.square()) * psi.values().square());
    };
  } else {
    pair.contractive.value = [x2, tau, gamma](const Field& f) {
      Field lap = laplacian(f);
      const auto& u = f.values();
      return 0.5 * x2 * integral(f, lap.values().square()) +
             integral(f, (1.0 / 24.0) * u.square().square() - gamma / 6.0 * u.cube() +
                             0.5 * (x2 + tau) * u.square());
    };
    pair.contractive.gradient = [x2, tau, gamma](const Field& f) {
      Field lap2 = laplacian(laplacian(f));
      const auto& u = f.values();
      return f.like(x2 * lap2.values() + (1.0 / 6.0) * u.cube() - 0.5 * gamma * u.square() +
                    (x2 + tau) * u);
    };
    pair.contractive.hess_quad = [x2, tau, gamma](const Field& at, const Field& psi) {
      Field lap = laplacian(psi);
      const auto& u = at.values();
      return x2 * integral(psi, lap.values().square()) +
             integral(psi, (0.5 * u.square() - gamma * u + x2 + tau) * psi.values().square());
    };
    pair.expansive.value = [x2](const Field& f) { return x2 * dirichlet_form(f); };
    pair.expansive.gradient = [x2](const Field& f) {
      return f.like(-2.0 * x2 * laplacian(f).values());
    };
    pair.expansive.hess_quad = [x2](const Field&, const Field& psi) {
      return 2.0 * x2 * dirichlet_form(psi);
    };
  }
  return pair;
}

}  // namespace

SplitPair split(const EnergyModel& model, SplitKind kind) {
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&model)) return split_gl(*gl, kind);
  return split_lb(std::get<LandauBrazovskii2D>(model), kind);
}

}  // namespace csaddle
