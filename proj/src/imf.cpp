#include "csaddle/imf.hpp"

#include <chrono>
#include <cmath>

#include "csaddle/ops.hpp"

namespace csaddle {

// ---------------------------------------------------------------------------
// AuxProblem

AuxProblem AuxProblem::make(EnergyModel model, Metric metric, Field phi_k, Field v,
                            double alpha, double beta) {
  check_compatible(model, phi_k.grid());
  require_same_grid(phi_k, v, "AuxProblem");
  if (!(alpha + beta > 1.0))
    throw std::invalid_argument("AuxProblem: needs alpha + beta > 1");
  AuxProblem p{std::move(model), std::move(metric), std::move(phi_k), std::move(v),
               std::nullopt, alpha, beta, 1.0};
  p.vv_l2 = inner_l2(p.v, p.v);
  if (p.metric.kind() == MetricKind::Hminus1) {
    const double m = mass(p.v);
    if (std::abs(m) > 1e-8 * std::max(1.0, norm_l2(p.v)))
      throw std::invalid_argument("AuxProblem: H^-1 min-mode must have zero mass, got " +
                                  std::to_string(m));
    p.w = inv_neg_laplacian_zero_mean(p.v);
  }
  return p;
}

double phi_hat_coef(const AuxProblem& p, const Field& f) {
  require_same_grid(p.phi_k, f, "phi_hat");
  const Field& pair_with = p.w ? *p.w : p.v;
  return inner_l2(pair_with, f) - inner_l2(pair_with, p.phi_k);
}

Field phi_hat(const AuxProblem& p, const Field& f) {
  const double c = phi_hat_coef(p, f);
  return p.phi_k.like(p.phi_k.values() + c * p.v.values());
}

double aux_value(const AuxProblem& p, const Field& f) {
  const double c = phi_hat_coef(p, f);
  double val = (1.0 - p.alpha) * energy(p.model, f);
  if (p.alpha != 0.0) {
    Field shifted = f.like(f.values() - c * p.v.values());
    val += p.alpha * energy(p.model, shifted);
  }
  Field hat = p.phi_k.like(p.phi_k.values() + c * p.v.values());
  val -= p.beta * energy(p.model, hat);
  return val;
}

Field aux_l2_derivative(const AuxProblem& p, const Field& f) {
  const double c = phi_hat_coef(p, f);
  const Field& lift = p.w ? *p.w : p.v;  // adjoint direction of the tv map
  Field g = gradient_l2(p.model, f);
  g.values() *= (1.0 - p.alpha);
  if (p.alpha != 0.0) {
    Field shifted = f.like(f.values() - c * p.v.values());
    Field gs = gradient_l2(p.model, shifted);
    const double proj = inner_l2(p.v, gs);
    g.values() += p.alpha * (gs.values() - proj * lift.values());
  }
  Field hat = p.phi_k.like(p.phi_k.values() + c * p.v.values());
  Field gh = gradient_l2(p.model, hat);
  g.values() -= p.beta * inner_l2(p.v, gh) * lift.values();
  return g;
}

Field aux_gradient(const AuxProblem& p, const Field& f) {
  Field g = aux_l2_derivative(p, f);
  if (p.metric.kind() == MetricKind::L2) return g;
  Field lap = laplacian(g);
  lap.values() = -lap.values();
  return lap;
}

double aux_grad_norm(const AuxProblem& p, const Field& f) {
  return p.metric.grad_norm(aux_l2_derivative(p, f));
}

// ---------------------------------------------------------------------------
// splittings of L

namespace {

// tv(psi) = <v or w, psi> v ; the affine inner maps of both composed terms
struct HatMaps {
  const AuxProblem& p;
  const Field& lift() const { return p.w ? *p.w : p.v; }
  double coef(const Field& f) const { return phi_hat_coef(p, f); }
  Field hat(const Field& f) const {
    return p.phi_k.like(p.phi_k.values() + coef(f) * p.v.values());
  }
  Field shifted(const Field& f) const {
    return f.like(f.values() - coef(f) * p.v.values());
  }
  // directional images of psi under the linear parts
  Field tv_dir(const Field& psi) const {
    return p.v.like(inner_l2(lift(), psi) * p.v.values());
  }
};

}  // namespace

AuxSplit build_aux_split(const AuxProblem& p, const SplitPair& split_lin,
                         const SplitPair& split_nl) {
  if (split_lin.kind != SplitKind::LinearContractive ||
      split_nl.kind != SplitKind::NonlinearContractive)
    throw std::invalid_argument("build_aux_split: pass the linear- and nonlinear-contractive pairs");
  if (p.alpha < 0.0 || p.beta < 0.0)
    throw std::invalid_argument(
        "build_aux_split: the dual-split linear scheme needs alpha >= 0 and beta >= 0");

  const double a = p.alpha, b = p.beta;
  auto maps = std::make_shared<HatMaps>(HatMaps{p});
  auto lin = std::make_shared<SplitPair>(split_lin);
  auto nl = std::make_shared<SplitPair>(split_nl);

  AuxSplit out;
  out.value_c = [maps, lin, nl, a, b](const Field& f) {
    double val = lin->contractive.value(f) + a * nl->expansive.value(f);
    if (a != 0.0) val += a * lin->contractive.value(maps->shifted(f));
    val += b * nl->expansive.value(maps->hat(f));
    return val;
  };
  out.value_e = [maps, lin, nl, a, b](const Field& f) {
    double val = lin->expansive.value(f) + a * nl->contractive.value(f);
    if (a != 0.0) val += a * lin->expansive.value(maps->shifted(f));
    val += b * nl->contractive.value(maps->hat(f));
    return val;
  };
  // L2 variational derivatives; the inner affine maps contribute their
  // adjoints (I - lift<v,.>) and lift<v,.>
  auto grad_of = [maps, a, b](const SplitPart& on_phi_lin, const SplitPart& on_phi_nl,
                              const SplitPart& shifted_part, const SplitPart& hat_part,
                              const Field& f) {
    Field g = on_phi_lin.gradient(f);
    if (a != 0.0) {
      Field ga = on_phi_nl.gradient(f);
      g.values() += a * ga.values();
      Field gs = shifted_part.gradient(maps->shifted(f));
      g.values() += a * (gs.values() - inner_l2(maps->p.v, gs) * maps->lift().values());
    }
    Field gh = hat_part.gradient(maps->hat(f));
    g.values() += b * inner_l2(maps->p.v, gh) * maps->lift().values();
    return g;
  };
  out.grad_c = [maps, lin, nl, grad_of](const Field& f) {
    return grad_of(lin->contractive, nl->expansive, lin->contractive, nl->expansive, f);
  };
  out.grad_e = [maps, lin, nl, grad_of](const Field& f) {
    return grad_of(lin->expansive, nl->contractive, lin->expansive, nl->contractive, f);
  };
  auto quad_of = [maps, a, b](const SplitPart& on_phi_lin, const SplitPart& on_phi_nl,
                              const SplitPart& shifted_part, const SplitPart& hat_part,
                              const Field& at, const Field& psi) {
    double q = on_phi_lin.hess_quad(at, psi);
    Field tv = maps->tv_dir(psi);
    if (a != 0.0) {
      q += a * on_phi_nl.hess_quad(at, psi);
      Field proj = psi.like(psi.values() - tv.values());
      q += a * shifted_part.hess_quad(maps->shifted(at), proj);
    }
    q += b * hat_part.hess_quad(maps->hat(at), tv);
    return q;
  };
  out.hess_quad_c = [maps, lin, nl, quad_of](const Field& at, const Field& psi) {
    return quad_of(lin->contractive, nl->expansive, lin->contractive, nl->expansive, at, psi);
  };
  out.hess_quad_e = [maps, lin, nl, quad_of](const Field& at, const Field& psi) {
    return quad_of(lin->expansive, nl->contractive, lin->expansive, nl->contractive, at, psi);
  };
  return out;
}

AuxSplitValues single_aux_split(const AuxProblem& p, const SplitPair& pair) {
  const double a = p.alpha, b = p.beta;
  auto maps = std::make_shared<HatMaps>(HatMaps{p});
  auto sp = std::make_shared<SplitPair>(pair);

  // sign-branch selection: which of F_c/F_e lands in L_c for each term
  // (alpha>=0,beta>=0), (alpha>=0,beta<=0), (alpha<=0,beta>=0)
  struct Term {
    bool use_contractive;  // of the underlying pair
    double factor;
  };
  // terms: [0] on phi from F(phi), [1] on phi extra alpha part,
  //        [2] on shifted, [3] on hat
  std::array<Term, 4> tc{}, te{};
  if (a >= 0.0 && b >= 0.0) {
    tc = {Term{true, 1.0}, Term{false, a}, Term{true, a}, Term{false, b}};
    te = {Term{false, 1.0}, Term{true, a}, Term{false, a}, Term{true, b}};
  } else if (a >= 0.0 && b <= 0.0) {
    tc = {Term{true, 1.0}, Term{false, a}, Term{true, a}, Term{true, -b}};
    te = {Term{false, 1.0}, Term{true, a}, Term{false, a}, Term{false, -b}};
  } else if (a <= 0.0 && b >= 0.0) {
    tc = {Term{true, 1.0}, Term{true, -a}, Term{false, -a}, Term{false, b}};
    te = {Term{false, 1.0}, Term{false, -a}, Term{true, -a}, Term{true, b}};
  } else {
    throw std::invalid_argument("single_aux_split: alpha and beta may not both be negative");
  }

  auto value = [maps, sp](const std::array<Term, 4>& t, const Field& f) {
    auto part = [&](bool c) -> const SplitPart& { return c ? sp->contractive : sp->expansive; };
    double val = t[0].factor * part(t[0].use_contractive).value(f);
    if (t[1].factor != 0.0) val += t[1].factor * part(t[1].use_contractive).value(f);
    if (t[2].factor != 0.0)
      val += t[2].factor * part(t[2].use_contractive).value(maps->shifted(f));
    if (t[3].factor != 0.0) val += t[3].factor * part(t[3].use_contractive).value(maps->hat(f));
    return val;
  };
  auto quad = [maps, sp](const std::array<Term, 4>& t, const Field& at, const Field& psi) {
    auto part = [&](bool c) -> const SplitPart& { return c ? sp->contractive : sp->expansive; };
    double q = t[0].factor * part(t[0].use_contractive).hess_quad(at, psi);
    if (t[1].factor != 0.0) q += t[1].factor * part(t[1].use_contractive).hess_quad(at, psi);
    Field tv = maps->tv_dir(psi);
    if (t[2].factor != 0.0) {
      Field proj = psi.like(psi.values() - tv.values());
      q += t[2].factor * part(t[2].use_contractive).hess_quad(maps->shifted(at), proj);
    }
    if (t[3].factor != 0.0)
      q += t[3].factor * part(t[3].use_contractive).hess_quad(maps->hat(at), tv);
    return q;
  };

  AuxSplitValues out;
  out.value_c = [value, tc](const Field& f) { return value(tc, f); };
  out.value_e = [value, te](const Field& f) { return value(te, f); };
  out.hess_quad_c = [quad, tc](const Field& at, const Field& psi) { return quad(tc, at, psi); };
  out.hess_quad_e = [quad, te](const Field& at, const Field& psi) { return quad(te, at, psi); };
  return out;
}

// ---------------------------------------------------------------------------
// cycles and the outer loop

namespace {
bool field_diverged(const Field& f) { return !f.all_finite() || f.max_abs() > 1e6; }
}  // namespace

double step_residual_norm(const Metric& metric, const Field& prev, const Field& next, double dt) {
  Field diff = next.like((next.values() - prev.values()) / dt);
  if (metric.kind() == MetricKind::L2) return norm_l2(diff);
  diff = project_zero_mean(diff);  // mass-conserving flows leave rounding only
  return std::sqrt(std::max(0.0, inner_l2(inv_neg_laplacian_zero_mean(diff), diff)));
}

std::pair<Field, CycleReport> run_cycle(const AuxProblem& p, const StepperConfig& cfg,
                                        const InnerStop& stop, const InnerObserver& observer) {
  auto stepper = make_stepper(cfg, p);
  Field phi = p.phi_k;
  CycleReport rep;
  rep.lambda_min = 0.0;
  const auto t0 = std::chrono::steady_clock::now();

  const long limit = stop.mode == InnerStop::Mode::Cap ? stop.cap : stop.hard_cap;
  // the per-step error is the scheme residual ||phi^{n+1} - phi^n||_metric/dt,
  // i.e. delta L evaluated across the step; a converged state is also
  // accepted up front from the analytic gradient
  double err = aux_grad_norm(p, phi);
  rep.max_abs_phi = phi.max_abs();
  long iter = 0;
  rep.reason = StopReason::IterationCap;
  // stall bookkeeping: tolerance-mode runs that stop making progress are the
  // tables' "infinity" rows (bounded wandering, not value blow-up)
  double best_err = err;
  long best_iter = 0;

  if (stop.mode == InnerStop::Mode::Tolerance && err <= stop.tolerance) {
    rep.reason = StopReason::Tolerance;
  } else {
    for (iter = 1; iter <= limit; ++iter) {
      Field next = stepper->step(phi);
      if (field_diverged(next)) {
        phi = std::move(next);
        rep.reason = StopReason::Diverged;
        rep.diverged = true;
        break;
      }
      err = step_residual_norm(p.metric, phi, next, cfg.dt);
      phi = std::move(next);
      rep.max_abs_phi = std::max(rep.max_abs_phi, phi.max_abs());
      if (observer) {
        const double L = aux_value(p, phi);
        const double F = energy(p.model, phi);
        const double gradF = p.metric.grad_norm(gradient_l2(p.model, phi));
        observer(iter, phi, L, err, F, gradF);
      }
      if (!std::isfinite(err)) {
        rep.reason = StopReason::Diverged;
        rep.diverged = true;
        break;
      }
      if (stop.mode == InnerStop::Mode::Tolerance && err <= stop.tolerance) {
        rep.reason = StopReason::Tolerance;
        break;
      }
      if (err < best_err * (1.0 - 1e-3)) {
        best_err = err;
        best_iter = iter;
      } else if (stop.mode == InnerStop::Mode::Tolerance &&
                 iter - best_iter > std::max<long>(10000, iter / 2)) {
        rep.reason = StopReason::Diverged;
        rep.diverged = true;
        rep.stalled = true;
        break;
      }
      if (iter == limit) break;  // reason stays IterationCap
    }
    if (iter > limit) iter = limit;
  }

  rep.inner_iterations = iter;
  rep.final_grad_L = err;
  if (!rep.diverged) {
    rep.energy_F = energy(p.model, phi);
    rep.outer_grad_F = p.metric.grad_norm(gradient_l2(p.model, phi));
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(phi), rep};
}

std::pair<Field, std::vector<CycleReport>> run_imf(const EnergyModel& model, const Field& f0,
                                                   const ImfOptions& opts) {
  check_compatible(model, f0.grid());
  if (!f0.all_finite()) throw std::invalid_argument("run_imf: initial state is not finite");

  Field phi = f0;
  std::vector<CycleReport> reports;
  std::optional<Field> warm;
  double outer = opts.metric.grad_norm(gradient_l2(model, phi));
  double best_outer = outer;
  int best_cycle = 0;

  for (int cycle = 0; cycle < opts.max_cycles && outer > opts.outer_tol; ++cycle) {
    if (outer < best_outer * (1.0 - 1e-3)) {
      best_outer = outer;
      best_cycle = cycle;
    } else if (cycle - best_cycle > std::max(200, cycle / 2)) {
      break;  // no outer progress; unconverged
    }
    EigOptions eopts{opts.metric};
    eopts.tolerance = opts.eig_tol;
    eopts.max_iterations = opts.eig_max_iterations;
    eopts.deflate_translation = opts.deflate;
    eopts.deflation_angle_threshold_deg = opts.deflate_angle_deg;
    EigPair mode;
    try {
      mode = min_mode(model, phi, eopts, warm ? &*warm : nullptr);
    } catch (const EigError&) {
      // the min-mode solve breaks down only on badly excursed states of
      // capped runs with an unstable scheme; classify the run as diverged
      CycleReport rep;
      rep.cycle = cycle;
      rep.diverged = true;
      rep.reason = StopReason::Diverged;
      rep.outer_grad_F = std::numeric_limits<double>::quiet_NaN();
      reports.push_back(rep);
      if (opts.cycle_observer) opts.cycle_observer(reports.back());
      break;
    }
    warm = mode.v;

    InnerStop stop = opts.inner;
    if (mode.lambda >= 0.0) {
      // inside the locally convex region the subproblem must not be solved
      // thoroughly; fall back to a fixed iteration budget
      stop.mode = InnerStop::Mode::Cap;
      stop.cap = opts.inner.mode == InnerStop::Mode::Cap ? opts.inner.cap : opts.guard_cap;
    }

    AuxProblem p = AuxProblem::make(model, opts.metric, phi, mode.v);
    InnerObserver obs;
    if (opts.observer) {
      obs = [&, cycle](long iter, const Field& f, double L, double gradL, double F,
                       double gradF) { opts.observer(cycle, iter, f, L, gradL, F, gradF); };
    }
    auto [next, rep] = run_cycle(p, opts.stepper, stop, obs);
    phi = std::move(next);
    rep.cycle = cycle;
    rep.lambda_min = mode.lambda;
    rep.eig_iterations = mode.iterations;
    if (!rep.diverged) outer = opts.metric.grad_norm(gradient_l2(model, phi));
    rep.outer_grad_F = rep.diverged ? std::numeric_limits<double>::quiet_NaN() : outer;
    reports.push_back(rep);
    if (opts.cycle_observer) opts.cycle_observer(reports.back());
    if (rep.diverged) break;
  }
  return {std::move(phi), std::move(reports)};
}

}  // namespace csaddle
