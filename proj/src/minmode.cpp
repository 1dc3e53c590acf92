#include "csaddle/minmode.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "csaddle/ops.hpp"
#include "csaddle/spectral.hpp"

namespace csaddle {

namespace {

// ---------------------------------------------------------------------------
// deterministic start vectors

Field ladder_field(const GridPtr& grid, int q) {
  const Grid& g = *grid;
  Eigen::ArrayXd v(g.size());
  if (g.dim() == 1) {
    const double L = g.extent(0);
    for (int i = 0; i < g.nodes(0); ++i) {
      const double x = g.coord(0, i);
      if (g.bc() == Bc::Neumann) {
        v[i] = std::cos(q * M_PI * x / L);
      } else if (q == 0) {
        v[i] = 1.0;
      } else if (q % 2 == 1) {
        v[i] = std::sin(2.0 * M_PI * ((q + 1) / 2) * x / L);
      } else {
        v[i] = std::cos(2.0 * M_PI * (q / 2) * x / L);
      }
    }
    return Field(grid, std::move(v));
  }
  // 2-D: enumerate (kx, ky, phase) by total wavenumber
  int remaining = q;
  int kx = 0, ky = 0, phase = 0;
  for (int s = 0;; ++s) {
    bool found = false;
    for (int a = 0; a <= s && !found; ++a) {
      const int b = s - a;
      const int nphase = (a == 0 ? 1 : 2) * (b == 0 ? 1 : 2);
      if (remaining < nphase) {
        kx = a;
        ky = b;
        phase = remaining;
        found = true;
      } else {
        remaining -= nphase;
      }
    }
    if (found) break;
  }
  const double wx = 2.0 * M_PI * kx / g.extent(0);
  const double wy = 2.0 * M_PI * ky / g.extent(1);
  const bool sin_x = (kx > 0) && (phase % 2 == 1);
  const bool sin_y = (ky > 0) && ((kx > 0 ? phase / 2 : phase) % 2 == 1);
  for (int iy = 0; iy < g.nodes(1); ++iy) {
    const double y = g.coord(1, iy);
    const double fy = sin_y ? std::sin(wy * y) : std::cos(wy * y);
    for (int ix = 0; ix < g.nodes(0); ++ix) {
      const double x = g.coord(0, ix);
      const double fx = sin_x ? std::sin(wx * x) : std::cos(wx * x);
      v[g.index(ix, iy)] = fx * fy;
    }
  }
  return Field(grid, std::move(v));
}

// A start vector must overlap every symmetry sector of the Hessian: an
// anchor state with a mirror or shift symmetry makes the whole LOBPCG
// iteration inherit the start's sector (all operators commute with the
// symmetry), which silently returns a sector-constrained eigenvalue. Mix a
// ladder of low modes on top of the canonical profile to break this.
Field mix_in_low_modes(Field f, const GridPtr& grid) {
  for (int q = 1; q <= 6; ++q) {
    Field lad = ladder_field(grid, q);
    const double n = norm_l2(lad);
    if (n > 0.0) f.values() += (0.35 / (1 << q)) * lad.values() / n;
  }
  return f;
}

Field default_start(const GridPtr& grid) {
  const Grid& g = *grid;
  Eigen::ArrayXd v(g.size());
  if (g.dim() == 1) {
    const double L = g.extent(0);
    for (int i = 0; i < g.nodes(0); ++i) {
      const double x = g.coord(0, i);
      v[i] = g.bc() == Bc::Periodic ? std::sin(2.0 * M_PI * x / L) : std::cos(M_PI * x / L);
    }
  } else {
    const double wx = 2.0 * M_PI / g.extent(0);
    const double wy = 2.0 * M_PI / g.extent(1);
    for (int iy = 0; iy < g.nodes(1); ++iy)
      for (int ix = 0; ix < g.nodes(0); ++ix) {
        const double x = g.coord(0, ix), y = g.coord(1, iy);
        v[g.index(ix, iy)] =
            std::sin(wx * x) + std::sin(wy * y) + std::sin(wx * x) * std::sin(wy * y);
      }
  }
  return project_zero_mean(mix_in_low_modes(Field(grid, std::move(v)), grid));
}

// ---------------------------------------------------------------------------
// LOBPCG on the generalized problem B x = lambda M x

struct EigWork {
  const EnergyModel& model;
  const Field& anchor;
  bool hm1;
  std::vector<Field> constraints;   // M-orthonormal
  std::vector<Field> constraints_M; // M * constraint
  Eigen::ArrayXd prec_mult_inv;     // preconditioner, diagonal in transform basis

  Field applyB(const Field& x) const { return hessian_apply(model, anchor, x); }
  Field applyM(const Field& x) const {
    return hm1 ? inv_neg_laplacian_zero_mean(x) : x;
  }
  double metric_residual(const Field& r) const {
    return hm1 ? std::sqrt(std::max(0.0, dirichlet_form(r))) : norm_l2(r);
  }
  Field precondition(const Field& r) const {
    return r.like(transform_for(r.grid()).diag_apply(r.values(), prec_mult_inv));
  }
  void project(Field& x) const {
    if (hm1) x = project_zero_mean(x);
    for (size_t i = 0; i < constraints.size(); ++i)
      x.values() -= inner_l2(constraints_M[i], x) * constraints[i].values();
  }
  void add_constraint(const Field& c) {
    Field d = c;
    project(d);
    Field Md = applyM(d);
    const double n = std::sqrt(inner_l2(d, Md));
    if (n < 1e-12) return;  // already inside the span
    d.values() /= n;
    Md.values() /= n;
    constraints.push_back(std::move(d));
    constraints_M.push_back(std::move(Md));
  }
};

Eigen::ArrayXd preconditioner_multipliers(const EnergyModel& model, const Field& anchor) {
  const auto& sym = transform_for(anchor.grid()).laplacian_symbols();
  Eigen::ArrayXd inv(sym.size());
  // shift by the potential scale of the anchor so badly excursed states
  // (capped runs of an unstable scheme) still get a usable preconditioner
  if (const auto* gl = std::get_if<GinzburgLandau1D>(&model)) {
    const double pot = (3.0 * anchor.values().square() - 1.0).abs().maxCoeff();
    const double shift = std::max(1.0, pot);
    for (int j = 0; j < sym.size(); ++j)
      inv[j] = 1.0 / (gl->kappa * gl->kappa * (-sym[j]) + shift);
  } else {
    const auto& lb = std::get<LandauBrazovskii2D>(model);
    const double pot =
        (lb.tau - lb.gamma * anchor.values() + 0.5 * anchor.values().square()).abs().maxCoeff();
    const double shift = std::max(0.5, pot);
    for (int j = 0; j < sym.size(); ++j) {
      const double hl = 1.0 + sym[j];
      inv[j] = 1.0 / (lb.xi * lb.xi * hl * hl + shift);
    }
  }
  return inv;
}

struct BasisVec {
  Field x, Bx, Mx;
};

// Linear combination of basis triples; B and M apply linearly so the images
// are combined instead of recomputed.
BasisVec combine(const std::vector<BasisVec>& basis, const Eigen::VectorXd& coef) {
  BasisVec out;
  out.x = basis[0].x.like(Eigen::ArrayXd::Zero(basis[0].x.size()));
  out.Bx = out.x;
  out.Mx = out.x;
  for (size_t j = 0; j < basis.size(); ++j) {
    if (coef[j] == 0.0) continue;
    out.x.values() += coef[j] * basis[j].x.values();
    out.Bx.values() += coef[j] * basis[j].Bx.values();
    out.Mx.values() += coef[j] * basis[j].Mx.values();
  }
  return out;
}

struct LobpcgResult {
  std::vector<double> lambda;
  std::vector<Field> x;
  std::vector<double> residual;
  int iterations = 0;
  bool converged = false;
};

LobpcgResult lobpcg(EigWork& work, const GridPtr& grid, int m, int need_converged,
                    double tol, int max_iterations, const Field* warm_start) {
  // initial block
  std::vector<BasisVec> X;
  int ladder_next = 0;
  auto push_candidate = [&](Field cand) {
    work.project(cand);
    Field Mc = work.applyM(cand);
    double n2 = inner_l2(cand, Mc);
    if (!(n2 > 1e-16)) return false;
    const double n = std::sqrt(n2);
    cand.values() /= n;
    Mc.values() /= n;
    // M-orthogonalize against accepted block members
    for (const auto& b : X) {
      const double p = inner_l2(b.Mx, cand);
      cand.values() -= p * b.x.values();
      Mc.values() -= p * b.Mx.values();
    }
    n2 = inner_l2(cand, Mc);
    if (!(n2 > 1e-12)) return false;
    const double n3 = std::sqrt(n2);
    cand.values() /= n3;
    Mc.values() /= n3;
    BasisVec b;
    b.Bx = work.applyB(cand);
    b.x = std::move(cand);
    b.Mx = std::move(Mc);
    X.push_back(std::move(b));
    return true;
  };
  if (warm_start) {
    Field w = *warm_start;
    const double n = norm_l2(w);
    if (n > 0.0) {
      w.values() *= (1.0 / n);
      push_candidate(mix_in_low_modes(std::move(w), grid));
    }
  }
  if (X.empty()) push_candidate(default_start(grid));
  while (static_cast<int>(X.size()) < m && ladder_next < 8 * (m + 4))
    push_candidate(ladder_field(grid, ladder_next++));
  if (static_cast<int>(X.size()) < m)
    throw EigError("min_mode: could not build an independent start block", 0.0);

  std::vector<BasisVec> P;
  std::vector<double> theta(m, 0.0), resnorm(m, 0.0);
  std::vector<Field> R(m, Field(grid));
  LobpcgResult out;

  for (int it = 0;; ++it) {
    // Rayleigh-Ritz over [X, W(previous residuals, folded in below), P]
    std::vector<BasisVec>& basis_x = X;
    std::vector<BasisVec> S;
    S.reserve(3 * m);
    for (auto& b : basis_x) S.push_back(std::move(b));
    if (it > 0) {
      for (int i = 0; i < m; ++i) {
        Field w = work.precondition(R[i]);
        work.project(w);
        Field Mw = work.applyM(w);
        const double n2 = inner_l2(w, Mw);
        if (!(n2 > 1e-28)) continue;
        const double n = std::sqrt(n2);
        w.values() /= n;
        Mw.values() /= n;
        BasisVec b;
        b.Bx = work.applyB(w);
        b.x = std::move(w);
        b.Mx = std::move(Mw);
        S.push_back(std::move(b));
      }
      for (auto& b : P) S.push_back(std::move(b));
    }
    const int ns = static_cast<int>(S.size());

    Eigen::MatrixXd GM(ns, ns), GB(ns, ns);
    for (int i = 0; i < ns; ++i)
      for (int j = i; j < ns; ++j) {
        GM(i, j) = GM(j, i) = inner_l2(S[i].x, S[j].Mx);
        GB(i, j) = GB(j, i) = inner_l2(S[i].x, S[j].Bx);
      }
    GM = 0.5 * (GM + GM.transpose()).eval();
    GB = 0.5 * (GB + GB.transpose()).eval();

    // whiten the (possibly near-dependent) basis in the M inner product
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mw(GM);
    const double cut = std::max(mw.eigenvalues().maxCoeff(), 1.0) * 1e-13;
    std::vector<int> keep;
    for (int i = 0; i < ns; ++i)
      if (mw.eigenvalues()[i] > cut) keep.push_back(i);
    const int nk = static_cast<int>(keep.size());
    if (nk < m) throw EigError("min_mode: Rayleigh-Ritz basis collapsed", resnorm[0]);
    Eigen::MatrixXd V(ns, nk);
    for (int c = 0; c < nk; ++c)
      V.col(c) = mw.eigenvectors().col(keep[c]) / std::sqrt(mw.eigenvalues()[keep[c]]);

    Eigen::MatrixXd GBw = V.transpose() * GB * V;
    GBw = 0.5 * (GBw + GBw.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(GBw);

    std::vector<BasisVec> Xnew(m), Pnew;
    for (int i = 0; i < m; ++i) {
      theta[i] = rr.eigenvalues()[i];
      Eigen::VectorXd coef = V * rr.eigenvectors().col(i);
      Xnew[i] = combine(S, coef);
      if (it > 0) {
        Eigen::VectorXd pcoef = coef;
        pcoef.head(m).setZero();  // drop the X-block contribution
        if (pcoef.norm() > 0) {
          BasisVec p = combine(S, pcoef);
          const double n2 = inner_l2(p.x, p.Mx);
          if (n2 > 1e-24) {
            const double n = std::sqrt(n2);
            p.x.values() /= n;
            p.Bx.values() /= n;
            p.Mx.values() /= n;
            Pnew.push_back(std::move(p));
          }
        }
      }
      const double n = std::sqrt(inner_l2(Xnew[i].x, Xnew[i].Mx));
      Xnew[i].x.values() /= n;
      Xnew[i].Bx.values() /= n;
      Xnew[i].Mx.values() /= n;
    }
    X = std::move(Xnew);
    P = std::move(Pnew);

    bool done = true;
    for (int i = 0; i < m; ++i) {
      R[i] = X[i].Bx.like(X[i].Bx.values() - theta[i] * X[i].Mx.values());
      resnorm[i] = work.metric_residual(R[i]);
      if (i < need_converged && !(resnorm[i] <= tol)) done = false;
    }
    if (done || it >= max_iterations) {
      out.iterations = it;
      out.converged = done;
      break;
    }
  }

  // recompute the returned pairs with fresh applies (combo drift is possible)
  out.lambda.resize(m);
  out.x.clear();
  out.residual.resize(m);
  for (int i = 0; i < m; ++i) {
    Field x = X[i].x;
    work.project(x);
    Field Mx = work.applyM(x);
    const double n = std::sqrt(inner_l2(x, Mx));
    x.values() /= n;
    Mx.values() /= n;
    Field Bx = work.applyB(x);
    out.lambda[i] = inner_l2(x, Bx);
    Field r = Bx.like(Bx.values() - out.lambda[i] * Mx.values());
    out.residual[i] = work.metric_residual(r);
    out.x.push_back(std::move(x));
  }
  return out;
}

std::vector<Field> translation_modes(const Field& f) {
  std::vector<Field> dirs;
  for (int axis = 0; axis < f.grid().dim(); ++axis) {
    Field d = dx_centered(f, axis);
    if (norm_l2(d) > 1e-14 * std::max(1.0, norm_l2(f))) dirs.push_back(std::move(d));
  }
  return dirs;
}

bool angle_triggers(const Field& v, const Field& d, double threshold_deg, const Metric& metric) {
  Field dp = metric.kind() == MetricKind::Hminus1 ? project_zero_mean(d) : d;
  const double cosang = metric.inner(v, dp) / (metric.norm(v) * metric.norm(dp));
  return std::abs(cosang) >= std::cos(threshold_deg * M_PI / 180.0);
}

}  // namespace

std::optional<Field> deflate_translation(const Field& v, const Field& f, double threshold_deg,
                                         const Metric& metric) {
  if (f.grid().bc() != Bc::Periodic)
    throw std::invalid_argument("deflate_translation: translation symmetry needs periodic BC");
  auto dirs = translation_modes(f);
  if (dirs.empty()) return v;  // constant state, nothing to deflate
  for (const auto& d : dirs)
    if (angle_triggers(v, d, threshold_deg, metric)) return std::nullopt;
  return v;
}

EigPair min_mode(const EnergyModel& model, const Field& f, const EigOptions& opts,
                 const Field* warm_start) {
  check_compatible(model, f.grid());
  const bool hm1 = opts.metric.kind() == MetricKind::Hminus1;
  EigWork work{model, f, hm1, {}, {}, preconditioner_multipliers(model, f)};

  auto run = [&](const Field* start) {
    return lobpcg(work, f.grid_ptr(), 1, 1, opts.tolerance, opts.max_iterations, start);
  };
  LobpcgResult res = run(warm_start);
  if (!res.converged)
    throw EigError("min_mode: no convergence within max_iterations (residual " +
                       std::to_string(res.residual[0]) + ")",
                   res.residual[0]);

  EigPair pair;
  pair.lambda = res.lambda[0];
  pair.v = res.x[0];
  pair.residual = res.residual[0];
  pair.iterations = res.iterations;

  if (opts.deflate_translation && f.grid().bc() == Bc::Periodic) {
    auto kept = deflate_translation(pair.v, f, opts.deflation_angle_threshold_deg, opts.metric);
    if (!kept) {
      for (const auto& d : translation_modes(f)) work.add_constraint(d);
      Field start = pair.v;
      res = run(&start);
      if (!res.converged)
        throw EigError("min_mode: deflated re-solve did not converge (residual " +
                           std::to_string(res.residual[0]) + ")",
                       res.residual[0]);
      pair.lambda = res.lambda[0];
      pair.v = res.x[0];
      pair.residual = res.residual[0];
      pair.iterations += res.iterations;
      pair.deflated = true;
    }
  }
  return pair;
}

// ---------------------------------------------------------------------------
// dense 1-D assembly for the spectrum head

namespace {

Eigen::MatrixXd dense_neg_laplacian(const Grid& g) {
  const int n = g.nodes(0);
  const double ih2 = 1.0 / (g.spacing(0) * g.spacing(0));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  if (g.bc() == Bc::Periodic) {
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n;
      A(i, i) = 2.0 * ih2;
      A(i, ip) -= ih2;
      A(i, im) -= ih2;
    }
  } else {
    A(0, 0) = 2.0 * ih2;
    A(0, 1) = -2.0 * ih2;
    for (int i = 1; i < n - 1; ++i) {
      A(i, i - 1) = -ih2;
      A(i, i) = 2.0 * ih2;
      A(i, i + 1) = -ih2;
    }
    A(n - 1, n - 2) = -2.0 * ih2;
    A(n - 1, n - 1) = 2.0 * ih2;
  }
  return A;
}

Eigen::VectorXd weight_vector(const Grid& g) {
  Eigen::VectorXd w(g.size());
  for (int i = 0; i < g.size(); ++i) w[i] = g.weight(i);
  return w;
}

std::vector<double> dense_head_1d(const EnergyModel& model, const Field& f, int k,
                                  const Metric& metric) {
  const auto& gl = std::get<GinzburgLandau1D>(model);
  const Grid& g = f.grid();
  const int n = g.size();
  const Eigen::VectorXd w = weight_vector(g);
  const Eigen::VectorXd ws = w.array().sqrt().matrix();
  const Eigen::VectorXd wsi = ws.array().inverse().matrix();

  Eigen::MatrixXd A = dense_neg_laplacian(g);
  Eigen::MatrixXd H = gl.kappa * gl.kappa * A;
  for (int i = 0; i < n; ++i) H(i, i) += 3.0 * f[i] * f[i] - 1.0;

  // similarity with W^{1/2} makes the operators symmetric
  Eigen::MatrixXd Bh = ws.asDiagonal() * H * wsi.asDiagonal();
  Bh = 0.5 * (Bh + Bh.transpose()).eval();

  if (metric.kind() == MetricKind::L2) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bh);
    std::vector<double> head(es.eigenvalues().data(), es.eigenvalues().data() + k);
    return head;
  }

  Eigen::MatrixXd Ah = ws.asDiagonal() * A * wsi.asDiagonal();
  Ah = 0.5 * (Ah + Ah.transpose()).eval();

  // orthonormal basis of the zero-mass subspace: Householder complement of
  // e = W^{1/2} 1 (the null vector of Ah)
  Eigen::VectorXd e = ws / ws.norm();
  Eigen::VectorXd v = e;
  v[0] += (e[0] >= 0 ? 1.0 : -1.0);
  v /= v.norm();
  Eigen::MatrixXd Hh = Eigen::MatrixXd::Identity(n, n) - 2.0 * v * v.transpose();
  Eigen::MatrixXd Q = Hh.rightCols(n - 1);

  Eigen::MatrixXd G = Q.transpose() * Ah * Q;   // SPD on the subspace
  Eigen::MatrixXd K = Q.transpose() * Bh * Q;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("spectrum_head: dense -Laplacian restriction not SPD");
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd M = L.transpose() * K * L;
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  std::vector<double> head(es.eigenvalues().data(), es.eigenvalues().data() + k);
  return head;
}

}  // namespace

std::vector<double> spectrum_head(const EnergyModel& model, const Field& f, int k,
                                  const Metric& metric) {
  if (k < 1 || k > 10) throw std::invalid_argument("spectrum_head: k must be in 1..10");
  check_compatible(model, f.grid());
  if (f.grid().dim() == 1 && f.grid().size() <= 401) return dense_head_1d(model, f, k, metric);

  const bool hm1 = metric.kind() == MetricKind::Hminus1;
  EigWork work{model, f, hm1, {}, {}, preconditioner_multipliers(model, f)};
  EigOptions defaults{metric};
  const int block = std::min(k + 2, f.grid().size() / 4);
  LobpcgResult res =
      lobpcg(work, f.grid_ptr(), block, k, defaults.tolerance, 4 * defaults.max_iterations,
             nullptr);
  if (!res.converged)
    throw EigError("spectrum_head: block iteration did not converge", res.residual[0]);
  return std::vector<double>(res.lambda.begin(), res.lambda.begin() + k);
}

}  // namespace csaddle
