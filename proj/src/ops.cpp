#include "csaddle/ops.hpp"

#include <cmath>
#include <sstream>

#include "csaddle/spectral.hpp"

namespace csaddle {

Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  const auto& u = f.values();
  Eigen::ArrayXd out(u.size());

  if (g.dim() == 1) {
    const int n = g.nodes(0);
    const double ih2 = 1.0 / (g.spacing(0) * g.spacing(0));
    if (g.bc() == Bc::Periodic) {
      for (int i = 0; i < n; ++i) {
        const int ip = (i + 1 == n) ? 0 : i + 1;
        const int im = (i == 0) ? n - 1 : i - 1;
        out[i] = (u[ip] - 2.0 * u[i] + u[im]) * ih2;
      }
    } else {
      out[0] = 2.0 * (u[1] - u[0]) * ih2;
      for (int i = 1; i < n - 1; ++i) out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * ih2;
      out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * ih2;
    }
  } else {
    const int nx = g.nodes(0), ny = g.nodes(1);
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = 1.0 / (g.spacing(1) * g.spacing(1));
    for (int iy = 0; iy < ny; ++iy) {
      const int yp = (iy + 1 == ny) ? 0 : iy + 1;
      const int ym = (iy == 0) ? ny - 1 : iy - 1;
      for (int ix = 0; ix < nx; ++ix) {
        const int xp = (ix + 1 == nx) ? 0 : ix + 1;
        const int xm = (ix == 0) ? nx - 1 : ix - 1;
        const int c = iy * nx + ix;
        out[c] = (u[iy * nx + xp] - 2.0 * u[c] + u[iy * nx + xm]) * ihx2 +
                 (u[yp * nx + ix] - 2.0 * u[c] + u[ym * nx + ix]) * ihy2;
      }
    }
  }
  return f.like(std::move(out));
}

Field helmholtz_sq(const Field& f) {
  if (f.grid().bc() != Bc::Periodic)
    throw std::invalid_argument("helmholtz_sq: periodic grids only");
  Field once = laplacian(f);
  once.values() += f.values();
  Field twice = laplacian(once);
  twice.values() += once.values();
  return twice;
}

Field inv_neg_laplacian_zero_mean(const Field& f) {
  const double m = mass(f);
  // small difference-fields inherit absolute rounding in their mass from
  // their O(1) parents, so the tolerance floors at the O(1) scale
  const double tol = 1e-10 * std::max(norm_l2(f), 1.0);
  if (std::abs(m) > tol) {
    std::ostringstream msg;
    msg << "inv_neg_laplacian_zero_mean: input has mean " << m / f.grid().measure()
        << " (mass " << m << "), expected zero";
    throw std::invalid_argument(msg.str());
  }
  const SpectralTransform& tf = transform_for(f.grid());
  const auto& sym = tf.laplacian_symbols();
  Eigen::ArrayXd mult(sym.size());
  mult[0] = 0.0;  // pin the constant mode
  for (int j = 1; j < sym.size(); ++j) mult[j] = -1.0 / sym[j];
  return f.like(tf.diag_apply(f.values(), mult));
}

Field dx_centered(const Field& f, int axis) {
  const Grid& g = f.grid();
  const auto& u = f.values();
  Eigen::ArrayXd out(u.size());
  if (g.dim() == 1) {
    const int n = g.nodes(0);
    const double i2h = 0.5 / g.spacing(0);
    if (g.bc() == Bc::Periodic) {
      for (int i = 0; i < n; ++i) {
        const int ip = (i + 1 == n) ? 0 : i + 1;
        const int im = (i == 0) ? n - 1 : i - 1;
        out[i] = (u[ip] - u[im]) * i2h;
      }
    } else {
      out[0] = 0.0;  // mirror ghosts: f_{-1} = f_1
      for (int i = 1; i < n - 1; ++i) out[i] = (u[i + 1] - u[i - 1]) * i2h;
      out[n - 1] = 0.0;
    }
  } else {
    const int nx = g.nodes(0), ny = g.nodes(1);
    const double i2h = 0.5 / g.spacing(axis);
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        int pp, mm;
        if (axis == 0) {
          pp = iy * nx + ((ix + 1 == nx) ? 0 : ix + 1);
          mm = iy * nx + ((ix == 0) ? nx - 1 : ix - 1);
        } else {
          pp = ((iy + 1 == ny) ? 0 : iy + 1) * nx + ix;
          mm = ((iy == 0) ? ny - 1 : iy - 1) * nx + ix;
        }
        out[iy * nx + ix] = (u[pp] - u[mm]) * i2h;
      }
    }
  }
  return f.like(std::move(out));
}

double mass(const Field& f) {
  const Grid& g = f.grid();
  const auto& u = f.values();
  if (g.dim() == 2 || g.bc() == Bc::Periodic) {
    double w = g.dim() == 2 ? g.spacing(0) * g.spacing(1) : g.spacing(0);
    return w * u.sum();
  }
  const int n = g.nodes(0);
  const double h = g.spacing(0);
  double s = 0.5 * (u[0] + u[n - 1]);
  for (int i = 1; i < n - 1; ++i) s += u[i];
  return h * s;
}

Field project_zero_mean(const Field& f) {
  const double mean = mass(f) / f.grid().measure();
  return f.like(f.values() - mean);
}

double inner_l2(const Field& f, const Field& g) {
  require_same_grid(f, g, "inner_l2");
  const Grid& gr = f.grid();
  const auto& u = f.values();
  const auto& v = g.values();
  if (gr.dim() == 2 || gr.bc() == Bc::Periodic) {
    double w = gr.dim() == 2 ? gr.spacing(0) * gr.spacing(1) : gr.spacing(0);
    return w * (u * v).sum();
  }
  const int n = gr.nodes(0);
  const double h = gr.spacing(0);
  double s = 0.5 * (u[0] * v[0] + u[n - 1] * v[n - 1]);
  for (int i = 1; i < n - 1; ++i) s += u[i] * v[i];
  return h * s;
}

double norm_l2(const Field& f) { return std::sqrt(inner_l2(f, f)); }

double dirichlet_inner(const Field& f, const Field& g) {
  require_same_grid(f, g, "dirichlet_inner");
  const Grid& gr = f.grid();
  const auto& u = f.values();
  const auto& v = g.values();
  double s = 0.0;
  if (gr.dim() == 1) {
    const int n = gr.nodes(0);
    const double ih = 1.0 / gr.spacing(0);
    const int edges = gr.cells(0);
    for (int i = 0; i < edges; ++i) {
      const int ip = (i + 1 == n) ? 0 : i + 1;
      s += (u[ip] - u[i]) * (v[ip] - v[i]) * ih;
    }
  } else {
    const int nx = gr.nodes(0), ny = gr.nodes(1);
    const double wx = gr.spacing(1) / gr.spacing(0);
    const double wy = gr.spacing(0) / gr.spacing(1);
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int c = iy * nx + ix;
        const int xp = iy * nx + ((ix + 1 == nx) ? 0 : ix + 1);
        const int yp = ((iy + 1 == ny) ? 0 : iy + 1) * nx + ix;
        s += (u[xp] - u[c]) * (v[xp] - v[c]) * wx;
        s += (u[yp] - u[c]) * (v[yp] - v[c]) * wy;
      }
    }
  }
  return s;
}

double dirichlet_form(const Field& f) { return dirichlet_inner(f, f); }

}  // namespace csaddle
