#include "csaddle/schemes.hpp"

#include <cmath>
#include <sstream>

#include "csaddle/ops.hpp"

namespace csaddle {

MetricKind problem_metric(ProblemKind problem) {
  return problem == ProblemKind::AC_L2 ? MetricKind::L2 : MetricKind::Hminus1;
}

// ---------------------------------------------------------------------------
// ImplicitOperator

ImplicitOperator::ImplicitOperator(GridPtr grid, Eigen::ArrayXd mode_multipliers)
    : grid_(std::move(grid)), mult_(std::move(mode_multipliers)) {
  const auto& sym = transform_for(*grid_).laplacian_symbols();
  if (mult_.size() != sym.size())
    throw std::invalid_argument("ImplicitOperator: one multiplier per transform mode required");
  mult_inv_.resize(mult_.size());
  for (int j = 0; j < mult_.size(); ++j) {
    if (std::abs(mult_[j]) < 1e-14) {
      std::ostringstream msg;
      msg << "ImplicitOperator: transform mode " << j << " has singular multiplier " << mult_[j];
      throw std::runtime_error(msg.str());
    }
    mult_inv_[j] = 1.0 / mult_[j];
  }
}

Field ImplicitOperator::diag_solve(const Field& rhs) const {
  return rhs.like(transform_for(*grid_).diag_apply(rhs.values(), mult_inv_));
}

void ImplicitOperator::add_rank_one(double s, Field a, Field b) {
  if (corrections_.size() >= 2)
    throw std::invalid_argument("ImplicitOperator: at most two rank-one corrections");
  Correction c{s, std::move(a), std::move(b), Field(), 0.0};
  // (operator with previous corrections)^-1 a, by the same Woodbury recursion
  Field u = diag_solve(c.a);
  for (const auto& prev : corrections_) {
    const double scale = prev.s * inner_l2(prev.b, u) / prev.denom;
    u.values() -= scale * prev.minv_a.values();
  }
  c.denom = 1.0 + s * inner_l2(c.b, u);
  if (std::abs(c.denom) < 1e-14) {
    std::ostringstream msg;
    msg << "ImplicitOperator: rank-one correction " << corrections_.size()
        << " has singular Woodbury denominator " << c.denom;
    throw std::runtime_error(msg.str());
  }
  c.minv_a = std::move(u);
  corrections_.push_back(std::move(c));
}

Field ImplicitOperator::solve(const Field& rhs) const {
  Field x = diag_solve(rhs);
  for (const auto& c : corrections_) {
    const double scale = c.s * inner_l2(c.b, x) / c.denom;
    x.values() -= scale * c.minv_a.values();
  }
  return x;
}

Field ImplicitOperator::apply(const Field& x) const {
  Field y = x.like(transform_for(*grid_).diag_apply(x.values(), mult_));
  for (const auto& c : corrections_)
    y.values() += c.s * inner_l2(c.b, x) * c.a.values();
  return y;
}

// ---------------------------------------------------------------------------
// preconditioned CG for the state-dependent nCS systems

namespace {

struct PcgOpts {
  double rtol = 1e-12;
  int maxit = 500;
};

template <class Apply, class Prec, class Dot>
Field pcg(Apply&& apply, Prec&& prec, Dot&& dot, const Field& b, Field x, const PcgOpts& opts) {
  Field ax = apply(x);
  Field r = b.like(b.values() - ax.values());
  Field z = prec(r);
  Field p = z;
  double rz = dot(r, z);
  const double stop2 = std::abs(rz) * opts.rtol * opts.rtol;
  if (!(std::abs(rz) > 0.0)) return x;
  for (int it = 0; it < opts.maxit; ++it) {
    Field ap = apply(p);
    const double pap = dot(p, ap);
    if (!std::isfinite(pap) || pap == 0.0) break;
    const double alpha = rz / pap;
    x.values() += alpha * p.values();
    r.values() -= alpha * ap.values();
    z = prec(r);
    const double rz_new = dot(r, z);
    if (!std::isfinite(rz_new)) break;
    if (std::abs(rz_new) <= stop2) {
      return x;
    }
    p.values() = z.values() + (rz_new / rz) * p.values();
    rz = rz_new;
  }
  return x;  // possibly unconverged; divergence shows up in the field values
}

Eigen::ArrayXd clamp_spd(Eigen::ArrayXd m) {
  for (int j = 0; j < m.size(); ++j) m[j] = std::max(std::abs(m[j]), 1e-8);
  return m;
}

double weighted_mean(const Field& f) { return mass(f) / f.grid().measure(); }

// ---------------------------------------------------------------------------
// shared per-cycle data

struct AuxCache {
  bool has_v = false;
  Field phi_k, v, w;
  double vv = 1.0;        // <v,v>_L2
  double vk_dot = 0.0;    // <v, phi_k>
  double wk_dot = 0.0;    // <w, phi_k>
  Field lap_phik, lap_v;  // Laplacians for the hat terms
  Field lap2_phik, lap2_v;
  Field hl2_phik, hl2_v;  // (Lap+1)^2

  void fill(const AuxProblem& p, bool need_lap2, bool need_hl2) {
    has_v = true;
    phi_k = p.phi_k;
    v = p.v;
    vv = p.vv_l2;
    vk_dot = inner_l2(v, phi_k);
    if (p.w) {
      w = *p.w;
      wk_dot = inner_l2(w, phi_k);
    }
    lap_phik = laplacian(phi_k);
    lap_v = laplacian(v);
    if (need_lap2) {
      lap2_phik = laplacian(lap_phik);
      lap2_v = laplacian(lap_v);
    }
    if (need_hl2) {
      hl2_phik = helmholtz_sq(phi_k);
      hl2_v = helmholtz_sq(v);
    }
  }
};

const GinzburgLandau1D& as_gl(const EnergyModel& m, const char* who) {
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&m)) return *gl;
  throw std::invalid_argument(std::string(who) + ": needs the Ginzburg-Landau model");
}

const LandauBrazovskii2D& as_lb(const EnergyModel& m, const char* who) {
  if (const auto* lb = std::get_if<LandauBrazovskii2D>(&m)) return *lb;
  throw std::invalid_argument(std::string(who) + ": needs the Landau-Brazovskii model");
}

// ---------------------------------------------------------------------------
// convex-splitting steppers (linear implicit part + rank-one correction)

class CsAcStepper final : public Stepper {
 public:
  CsAcStepper(const StepperConfig& cfg, GinzburgLandau1D gl, GridPtr grid, const AuxProblem* p)
      : dt_(cfg.dt), gl_(gl), op_(make_op(cfg, gl, grid, p)) {
    if (p) aux_.fill(*p, false, false);
  }

  Field step(const Field& f) override {
    const auto& u = f.values();
    Eigen::ArrayXd rhs = u + dt_ * (-u.cube() + (2.0 * gl_.c_split + 1.0) * u);
    if (aux_.has_v) {
      const double c = inner_l2(aux_.v, f) - aux_.vk_dot;
      Eigen::ArrayXd hat = aux_.phi_k.values() + c * aux_.v.values();
      Eigen::ArrayXd lap_hat = aux_.lap_phik.values() + c * aux_.lap_v.values();
      const double k2 = gl_.kappa * gl_.kappa;
      const double inner = inner_l2(aux_.v, f.like(-k2 * lap_hat + hat.cube()));
      rhs += dt_ * 2.0 * inner * aux_.v.values();
    }
    return op_.solve(f.like(std::move(rhs)));
  }

 private:
  static ImplicitOperator make_op(const StepperConfig& cfg, const GinzburgLandau1D& gl,
                                  const GridPtr& grid, const AuxProblem* p) {
    const auto& sym = transform_for(*grid).laplacian_symbols();
    Eigen::ArrayXd mult = 1.0 + cfg.dt * (gl.kappa * gl.kappa * (-sym) + 2.0 * gl.c_split);
    ImplicitOperator op(grid, std::move(mult));
    if (p) op.add_rank_one(2.0 * cfg.dt, p->v, p->v);
    return op;
  }

  double dt_;
  GinzburgLandau1D gl_;
  AuxCache aux_;
  ImplicitOperator op_;
};

class CsChStepper final : public Stepper {
 public:
  CsChStepper(const StepperConfig& cfg, GinzburgLandau1D gl, GridPtr grid, const AuxProblem* p)
      : dt_(cfg.dt), gl_(gl), op_(make_op(cfg, gl, grid, p)) {
    if (p) {
      aux_.fill(*p, false, false);
      // cycle-constant line of the scheme
      cycle_const_ = aux_.v.like((-2.0 * aux_.vk_dot + 2.0 * aux_.wk_dot * aux_.vv) *
                                 aux_.v.values());
    }
  }

  Field step(const Field& f) override {
    const auto& u = f.values();
    Field lap_f = laplacian(f);
    Field lap_f3 = laplacian(f.like(u.cube()));
    Eigen::ArrayXd rhs =
        u + dt_ * (lap_f3.values() - (2.0 * gl_.c_split + 1.0) * lap_f.values());
    if (aux_.has_v) {
      const double c = inner_l2(aux_.w, f) - aux_.wk_dot;
      Eigen::ArrayXd hat = aux_.phi_k.values() + c * aux_.v.values();
      Eigen::ArrayXd lap_hat = aux_.lap_phik.values() + c * aux_.lap_v.values();
      const double k2 = gl_.kappa * gl_.kappa;
      const double inner = inner_l2(aux_.v, f.like(-k2 * lap_hat + hat.cube()));
      rhs += dt_ * (cycle_const_.values() + 2.0 * inner * aux_.v.values());
    }
    return op_.solve(f.like(std::move(rhs)));
  }

 private:
  static ImplicitOperator make_op(const StepperConfig& cfg, const GinzburgLandau1D& gl,
                                  const GridPtr& grid, const AuxProblem* p) {
    const auto& sym = transform_for(*grid).laplacian_symbols();
    const Eigen::ArrayXd a = -sym;
    Eigen::ArrayXd mult =
        1.0 + cfg.dt * (gl.kappa * gl.kappa * a.square() + 2.0 * gl.c_split * a);
    ImplicitOperator op(grid, std::move(mult));
    if (p) op.add_rank_one(2.0 * cfg.dt * p->vv_l2, p->v, *p->w);
    return op;
  }

  double dt_;
  GinzburgLandau1D gl_;
  AuxCache aux_;
  Field cycle_const_;
  ImplicitOperator op_;
};

class CsLbStepper final : public Stepper {
 public:
  CsLbStepper(const StepperConfig& cfg, LandauBrazovskii2D lb, GridPtr grid, const AuxProblem* p)
      : dt_(cfg.dt), lb_(lb), op_(make_op(cfg, lb, grid, p)) {
    if (p) {
      aux_.fill(*p, true, false);
      const double dvv = inner_l2(aux_.lap_v, aux_.v);
      const double dphikv = inner_l2(aux_.lap_phik, aux_.v);
      cycle_const_ = aux_.v.like(4.0 * lb.xi * lb.xi * (dphikv - aux_.wk_dot * dvv) *
                                 aux_.v.values());
    }
  }

  Field step(const Field& f) override {
    const auto& u = f.values();
    Field g = f.like(-(1.0 / 6.0) * u.cube() + 0.5 * lb_.gamma * u.square() + lb_.c_split * u);
    Field lap_g = laplacian(g);
    Eigen::ArrayXd rhs = u - dt_ * lap_g.values();
    if (aux_.has_v) {
      const double c = inner_l2(aux_.w, f) - aux_.wk_dot;
      Eigen::ArrayXd hat = aux_.phi_k.values() + c * aux_.v.values();
      Eigen::ArrayXd lap2_hat = aux_.lap2_phik.values() + c * aux_.lap2_v.values();
      const double x2 = lb_.xi * lb_.xi;
      Eigen::ArrayXd integrand = x2 * lap2_hat + (x2 + lb_.tau) * hat -
                                 0.5 * lb_.gamma * hat.square() + (1.0 / 6.0) * hat.cube();
      const double inner = inner_l2(aux_.v, f.like(std::move(integrand)));
      rhs += dt_ * (cycle_const_.values() + 2.0 * inner * aux_.v.values());
    }
    return op_.solve(f.like(std::move(rhs)));
  }

 private:
  static ImplicitOperator make_op(const StepperConfig& cfg, const LandauBrazovskii2D& lb,
                                  const GridPtr& grid, const AuxProblem* p) {
    const auto& sym = transform_for(*grid).laplacian_symbols();
    const Eigen::ArrayXd a = -sym;
    const Eigen::ArrayXd hl = (1.0 + sym).square();
    Eigen::ArrayXd mult = 1.0 + cfg.dt * a * (lb.xi * lb.xi * hl + lb.tau + lb.c_split);
    ImplicitOperator op(grid, std::move(mult));
    if (p) {
      const double dvv = -dirichlet_form(p->v);  // <Lap v, v>
      op.add_rank_one(-4.0 * lb.xi * lb.xi * cfg.dt * dvv, p->v, *p->w);
    }
    return op;
  }

  double dt_;
  LandauBrazovskii2D lb_;
  AuxCache aux_;
  Field cycle_const_;
  ImplicitOperator op_;
};

// ---------------------------------------------------------------------------
// linearized (non-convex-splitting) steppers; the implicit operator is
// state-dependent, solved by PCG with the constant-coefficient transform
// solve as preconditioner

class NcsAcStepper final : public Stepper {
 public:
  NcsAcStepper(const StepperConfig& cfg, GinzburgLandau1D gl, GridPtr grid, const AuxProblem* p)
      : dt_(cfg.dt), gl_(gl), grid_(std::move(grid)) {
    if (p) aux_.fill(*p, false, false);
  }

  Field step(const Field& f) override {
    const auto& u = f.values();
    const double k2 = gl_.kappa * gl_.kappa;
    Eigen::ArrayXd diag = 3.0 * u.square() - 1.0;
    Eigen::ArrayXd rhs = u + dt_ * 2.0 * u.cube();
    if (aux_.has_v) {
      const double c = inner_l2(aux_.v, f) - aux_.vk_dot;
      Eigen::ArrayXd hat = aux_.phi_k.values() + c * aux_.v.values();
      Eigen::ArrayXd lap_hat = aux_.lap_phik.values() + c * aux_.lap_v.values();
      const double inner = inner_l2(aux_.v, f.like(k2 * lap_hat - hat.cube() + hat));
      rhs -= dt_ * 2.0 * inner * aux_.v.values();
    }

    const auto& tf = transform_for(*grid_);
    const double cbar = weighted_mean(f.like(Eigen::ArrayXd(diag)));
    Eigen::ArrayXd prec =
        clamp_spd(1.0 + dt_ * (k2 * (-tf.laplacian_symbols()) + cbar)).inverse();

    auto apply = [&](const Field& x) {
      Field lap = laplacian(x);
      return x.like(x.values() + dt_ * (-k2 * lap.values() + diag * x.values()));
    };
    auto precond = [&](const Field& r) { return r.like(tf.diag_apply(r.values(), prec)); };
    auto dot = [](const Field& a, const Field& b) { return inner_l2(a, b); };
    return pcg(apply, precond, dot, f.like(std::move(rhs)), f, PcgOpts{});
  }

 private:
  double dt_;
  GinzburgLandau1D gl_;
  GridPtr grid_;
  AuxCache aux_;
};

// H^-1 linearized steppers share the mean-split + PCG-in-H^-1 machinery:
// the operator I + dt*A*S is self-adjoint in the <(-Lap)^{-1} .,.> product on
// the zero-mean subspace, with A = -Lap.
class NcsHm1Stepper final : public Stepper {
 public:
  NcsHm1Stepper(const StepperConfig& cfg, EnergyModel model, GridPtr grid, const AuxProblem* p)
      : dt_(cfg.dt), model_(std::move(model)), grid_(std::move(grid)),
        is_lb_(std::holds_alternative<LandauBrazovskii2D>(model_)) {
    if (p) aux_.fill(*p, false, is_lb_);
  }

  Field step(const Field& f) override {
    const auto& u = f.values();
    Eigen::ArrayXd diag;   // S = stiff + diag
    Eigen::ArrayXd rhs;
    if (!is_lb_) {
      const auto& gl = std::get<GinzburgLandau1D>(model_);
      diag = 3.0 * u.square() - 1.0;
      Field lap_f3 = laplacian(f.like(u.cube()));
      rhs = u - dt_ * 2.0 * lap_f3.values();
      if (aux_.has_v) {
        const double c = inner_l2(aux_.w, f) - aux_.wk_dot;
        Eigen::ArrayXd hat = aux_.phi_k.values() + c * aux_.v.values();
        Eigen::ArrayXd lap_hat = aux_.lap_phik.values() + c * aux_.lap_v.values();
        const double k2 = gl.kappa * gl.kappa;
        const double inner = inner_l2(aux_.v, f.like(k2 * lap_hat - hat.cube() + hat));
        rhs -= dt_ * 2.0 * inner * aux_.v.values();
      }
    } else {
      const auto& lb = std::get<LandauBrazovskii2D>(model_);
      diag = lb.tau - lb.gamma * u + 0.5 * u.square();  // Phi_1'(phi^n)
      Field lap_q = laplacian(f.like(0.5 * lb.gamma * u.square() - (1.0 / 3.0) * u.cube()));
      rhs = u + dt_ * lap_q.values();
      if (aux_.has_v) {
        const double c = inner_l2(aux_.w, f) - aux_.wk_dot;
        Eigen::ArrayXd hat = aux_.phi_k.values() + c * aux_.v.values();
        Eigen::ArrayXd hl2_hat = aux_.hl2_phik.values() + c * aux_.hl2_v.values();
        const double x2 = lb.xi * lb.xi;
        Eigen::ArrayXd integrand =
            x2 * hl2_hat + lb.tau * hat - 0.5 * lb.gamma * hat.square() + (1.0 / 6.0) * hat.cube();
        const double inner = inner_l2(aux_.v, f.like(std::move(integrand)));
        rhs += dt_ * 2.0 * inner * aux_.v.values();
      }
    }

    Field b = f.like(std::move(rhs));
    const double xbar = mass(b) / grid_->measure();
    // S applied to the constant xbar leaves xbar * (diag + stiff(0)); A kills
    // the constant part of it
    Field diag_field = f.like(Eigen::ArrayXd(diag));
    Field lap_diag = laplacian(diag_field);
    Eigen::ArrayXd bp = b.values() - xbar + dt_ * xbar * lap_diag.values();
    Field bpf = project_zero_mean(f.like(std::move(bp)));

    const auto& tf = transform_for(*grid_);
    const auto& sym = tf.laplacian_symbols();
    const double cbar = weighted_mean(diag_field);
    Eigen::ArrayXd stiff_sym(sym.size());
    if (!is_lb_) {
      const double k2 = std::get<GinzburgLandau1D>(model_).kappa *
                        std::get<GinzburgLandau1D>(model_).kappa;
      stiff_sym = k2 * (-sym);
    } else {
      const double x2 = std::get<LandauBrazovskii2D>(model_).xi *
                        std::get<LandauBrazovskii2D>(model_).xi;
      stiff_sym = x2 * (1.0 + sym).square();
    }
    Eigen::ArrayXd prec = clamp_spd(1.0 + dt_ * (-sym) * (stiff_sym + cbar)).inverse();

    auto apply_S = [&](const Field& x) -> Field {
      if (!is_lb_) {
        const double k2 = std::get<GinzburgLandau1D>(model_).kappa *
                          std::get<GinzburgLandau1D>(model_).kappa;
        Field lap = laplacian(x);
        return x.like(-k2 * lap.values() + diag * x.values());
      }
      const double x2 = std::get<LandauBrazovskii2D>(model_).xi *
                        std::get<LandauBrazovskii2D>(model_).xi;
      Field hl2 = helmholtz_sq(x);
      return x.like(x2 * hl2.values() + diag * x.values());
    };
    auto apply = [&](const Field& x) {
      Field sx = apply_S(x);
      Field lap_sx = laplacian(sx);
      return x.like(x.values() - dt_ * lap_sx.values());
    };
    auto precond = [&](const Field& r) { return r.like(tf.diag_apply(r.values(), prec)); };
    auto dot = [](const Field& a, const Field& b2) {
      return inner_l2(inv_neg_laplacian_zero_mean(project_zero_mean(a)), b2);
    };

    Field y0 = project_zero_mean(f);
    Field y = pcg(apply, precond, dot, bpf, y0, PcgOpts{});
    return f.like(y.values() + xbar);
  }

 private:
  double dt_;
  EnergyModel model_;
  GridPtr grid_;
  bool is_lb_;
  AuxCache aux_;
};

void check_problem(const StepperConfig& cfg, const EnergyModel& model, const Metric* metric) {
  if (cfg.dt <= 0.0) throw std::invalid_argument("StepperConfig: dt must be positive");
  const bool lb_model = std::holds_alternative<LandauBrazovskii2D>(model);
  if (cfg.problem == ProblemKind::LB_Hm1) {
    as_lb(model, "make_stepper");
  } else {
    as_gl(model, "make_stepper");
  }
  if (lb_model && cfg.problem != ProblemKind::LB_Hm1)
    throw std::invalid_argument("make_stepper: Landau-Brazovskii runs use the LB_Hm1 problem");
  if (metric && metric->kind() != problem_metric(cfg.problem))
    throw std::invalid_argument("make_stepper: metric does not match the problem kind");
}

std::unique_ptr<Stepper> build(const StepperConfig& cfg, const EnergyModel& model, GridPtr grid,
                               const AuxProblem* p) {
  switch (cfg.problem) {
    case ProblemKind::AC_L2:
      if (cfg.kind == SchemeKind::CS)
        return std::make_unique<CsAcStepper>(cfg, as_gl(model, "make_stepper"), grid, p);
      return std::make_unique<NcsAcStepper>(cfg, as_gl(model, "make_stepper"), grid, p);
    case ProblemKind::CH_Hm1:
      if (cfg.kind == SchemeKind::CS)
        return std::make_unique<CsChStepper>(cfg, as_gl(model, "make_stepper"), grid, p);
      return std::make_unique<NcsHm1Stepper>(cfg, model, grid, p);
    case ProblemKind::LB_Hm1:
      if (cfg.kind == SchemeKind::CS)
        return std::make_unique<CsLbStepper>(cfg, as_lb(model, "make_stepper"), grid, p);
      return std::make_unique<NcsHm1Stepper>(cfg, model, grid, p);
  }
  throw std::logic_error("make_stepper: unknown problem kind");
}

}  // namespace

std::unique_ptr<Stepper> make_stepper(const StepperConfig& cfg, const AuxProblem& p) {
  check_problem(cfg, p.model, &p.metric);
  if (cfg.relaxation) return build(cfg, p.model, p.phi_k.grid_ptr(), nullptr);
  if (p.alpha != 0.0 || p.beta != 2.0)
    throw std::invalid_argument(
        "make_stepper: the steppers implement the (alpha, beta) = (0, 2) schemes");
  return build(cfg, p.model, p.phi_k.grid_ptr(), &p);
}

std::unique_ptr<Stepper> make_relax_stepper(const StepperConfig& cfg, const EnergyModel& model,
                                            GridPtr grid) {
  check_problem(cfg, model, nullptr);
  return build(cfg, model, std::move(grid), nullptr);
}

Field step_cs_ac(const StepperConfig& cfg, const AuxProblem& p, const Field& f) {
  StepperConfig c = cfg;
  c.kind = SchemeKind::CS;
  c.problem = ProblemKind::AC_L2;
  return make_stepper(c, p)->step(f);
}
Field step_ncs_ac(const StepperConfig& cfg, const AuxProblem& p, const Field& f) {
  StepperConfig c = cfg;
  c.kind = SchemeKind::nCS;
  c.problem = ProblemKind::AC_L2;
  return make_stepper(c, p)->step(f);
}
Field step_cs_ch(const StepperConfig& cfg, const AuxProblem& p, const Field& f) {
  StepperConfig c = cfg;
  c.kind = SchemeKind::CS;
  c.problem = ProblemKind::CH_Hm1;
  return make_stepper(c, p)->step(f);
}
Field step_ncs_ch(const StepperConfig& cfg, const AuxProblem& p, const Field& f) {
  StepperConfig c = cfg;
  c.kind = SchemeKind::nCS;
  c.problem = ProblemKind::CH_Hm1;
  return make_stepper(c, p)->step(f);
}
Field step_cs_lb(const StepperConfig& cfg, const AuxProblem& p, const Field& f) {
  StepperConfig c = cfg;
  c.kind = SchemeKind::CS;
  c.problem = ProblemKind::LB_Hm1;
  return make_stepper(c, p)->step(f);
}
Field step_ncs_lb(const StepperConfig& cfg, const AuxProblem& p, const Field& f) {
  StepperConfig c = cfg;
  c.kind = SchemeKind::nCS;
  c.problem = ProblemKind::LB_Hm1;
  return make_stepper(c, p)->step(f);
}

RelaxResult relax(const EnergyModel& model, const Field& f0, const StepperConfig& cfg,
                  double tol, long max_steps) {
  StepperConfig c = cfg;
  c.relaxation = true;
  auto stepper = make_relax_stepper(c, model, f0.grid_ptr());
  const Metric metric = problem_metric(cfg.problem) == MetricKind::L2
                            ? Metric::l2(f0.grid_ptr())
                            : Metric::hminus1(f0.grid_ptr());
  RelaxResult res;
  res.phi = f0;
  res.grad_norm = metric.grad_norm(gradient_l2(model, res.phi));
  for (long it = 0; it < max_steps && res.grad_norm > tol; ++it) {
    res.phi = stepper->step(res.phi);
    res.iterations = it + 1;
    if (!res.phi.all_finite() || res.phi.max_abs() > 1e6) {
      res.diverged = true;
      return res;
    }
    res.grad_norm = metric.grad_norm(gradient_l2(model, res.phi));
  }
  res.converged = res.grad_norm <= tol;
  res.energy = energy(model, res.phi);
  return res;
}

}  // namespace csaddle
