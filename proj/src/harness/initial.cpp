#include "csaddle/harness/initial.hpp"

#include <cmath>
#include <random>

#include "csaddle/io.hpp"
#include "csaddle/ops.hpp"

namespace csaddle::harness {

namespace {

Field profile_1d(const GridPtr& grid, double (*f)(double)) {
  Eigen::ArrayXd v(grid->size());
  const double L = grid->extent(0);
  for (int i = 0; i < grid->nodes(0); ++i) v[i] = f(grid->coord(0, i) / L);
  return Field(grid, std::move(v));
}

/// Single tanh interface (Neumann) or a droplet of the low phase (periodic),
/// shifted additively to the requested mass.
Field tanh_layer(const InitialCondition& ic, const GridPtr& grid) {
  Eigen::ArrayXd v(grid->size());
  const double L = grid->extent(0);
  const double w = ic.width * L;
  if (grid->bc() == Bc::Neumann) {
    const double xc = 0.5 * (1.0 - ic.m) * L;
    for (int i = 0; i < grid->nodes(0); ++i)
      v[i] = ic.amp * std::tanh((grid->coord(0, i) - xc) / w);
  } else {
    const double r = ic.radius > 0.0 ? ic.radius * L : 0.25 * (1.0 - ic.m) * L;
    for (int i = 0; i < grid->nodes(0); ++i) {
      const double d = std::abs(grid->coord(0, i) - 0.5 * L);
      v[i] = ic.amp * std::tanh((d - r) / w);
    }
  }
  Field f(grid, std::move(v));
  const double shift = (ic.m * grid->measure() - mass(f)) / grid->measure();
  f.values() += shift;
  return f;
}

/// Stripes with k periods along y; k = 4 on the reference box gives the unit
/// wavelength the quartic gradient term prefers.
Field lamellar(const InitialCondition& ic, const GridPtr& grid) {
  Eigen::ArrayXd v(grid->size());
  const double wy = 2.0 * M_PI * ic.k / grid->extent(1);
  for (int iy = 0; iy < grid->nodes(1); ++iy) {
    const double val = ic.amp * std::cos(wy * grid->coord(1, iy));
    for (int ix = 0; ix < grid->nodes(0); ++ix) v[grid->index(ix, iy)] = val;
  }
  return Field(grid, std::move(v));
}

struct HexWaves {
  // the three unit reciprocal vectors of the hexagonal phase, as integer
  // mode pairs of the box
  std::array<std::array<double, 2>, 3> k;
};

HexWaves hex_waves(const Grid& g) {
  const double lx = g.extent(0), ly = g.extent(1);
  auto near_int = [](double x) {
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-8)
      throw std::invalid_argument(
          "cylinder_seed: the hexagonal wave vectors do not fit this box periodically");
    return r;
  };
  const double m1y = near_int(ly / (2.0 * M_PI));
  const double m2x = near_int(std::sqrt(3.0) * lx / (4.0 * M_PI));
  const double m2y = near_int(ly / (4.0 * M_PI));
  HexWaves w;
  w.k[0] = {0.0, 2.0 * M_PI * m1y / ly};
  w.k[1] = {2.0 * M_PI * m2x / lx, -2.0 * M_PI * m2y / ly};
  w.k[2] = {-2.0 * M_PI * m2x / lx, -2.0 * M_PI * m2y / ly};
  return w;
}

Field hex_pattern(const GridPtr& grid, double amp) {
  const HexWaves w = hex_waves(*grid);
  Eigen::ArrayXd v(grid->size());
  for (int iy = 0; iy < grid->nodes(1); ++iy) {
    const double y = grid->coord(1, iy);
    for (int ix = 0; ix < grid->nodes(0); ++ix) {
      const double x = grid->coord(0, ix);
      double s = 0.0;
      for (const auto& k : w.k) s += std::cos(k[0] * x + k[1] * y);
      v[grid->index(ix, iy)] = amp * s;
    }
  }
  return Field(grid, std::move(v));
}

/// Cylinder-phase droplet blended into a lamellar background: the seed for
/// the nucleation saddle search.
Field nucleus(const InitialCondition& ic, const GridPtr& grid) {
  const double lx = grid->extent(0), ly = grid->extent(1);
  const double r0 = ic.radius > 0.0 ? ic.radius : 0.2 * std::min(lx, ly);
  const double bw = ic.width > 0.0 ? ic.width * std::min(lx, ly) : 2.0;
  // single-mode equilibrium amplitudes of the two phases
  const double a_lam = 1.0954451150103321;  // sqrt(-8 tau) at tau = -0.15
  const double a_hex = 0.6;
  Field lam = lamellar(InitialCondition{.kind = InitialCondition::Kind::Lamellar,
                                        .amp = ic.amp * a_lam, .k = ic.k},
                       grid);
  Field hex = hex_pattern(grid, ic.amp * a_hex);
  Eigen::ArrayXd v(grid->size());
  for (int iy = 0; iy < grid->nodes(1); ++iy) {
    double dy = grid->coord(1, iy) - 0.5 * ly;
    dy = std::min(std::abs(dy), ly - std::abs(dy));
    for (int ix = 0; ix < grid->nodes(0); ++ix) {
      double dx = grid->coord(0, ix) - 0.5 * lx;
      dx = std::min(std::abs(dx), lx - std::abs(dx));
      const double d = std::hypot(dx, dy);
      const double chi = 0.5 * (1.0 + std::tanh((r0 - d) / bw));
      const int c = grid->index(ix, iy);
      v[c] = chi * hex[c] + (1.0 - chi) * lam[c];
    }
  }
  return Field(grid, std::move(v));
}

}  // namespace

Field build_initial(const InitialCondition& init, const GridPtr& grid, MetricKind metric) {
  using Kind = InitialCondition::Kind;
  Field f(grid);
  switch (init.kind) {
    case Kind::CosPiX:
      f = profile_1d(grid, [](double t) { return std::cos(M_PI * t); });
      break;
    case Kind::Cos2PiX:
      f = profile_1d(grid, [](double t) { return std::cos(2.0 * M_PI * t); });
      break;
    case Kind::Sin2PiX:
      f = profile_1d(grid, [](double t) { return std::sin(2.0 * M_PI * t); });
      break;
    case Kind::Constant:
      f.values().setConstant(init.m);
      break;
    case Kind::TanhLayer:
      f = tanh_layer(init, grid);
      break;
    case Kind::Lamellar:
      f = lamellar(init, grid);
      break;
    case Kind::CylinderSeed:
      f = hex_pattern(grid, init.amp);
      break;
    case Kind::Nucleus:
      f = project_zero_mean(nucleus(init, grid));
      break;
    case Kind::File: {
      f = load_field(init.file);
      if (!f.grid().same_layout(*grid))
        throw std::invalid_argument("init_file: field in " + init.file +
                                    " does not match the configured grid");
      break;
    }
  }

  if (init.perturb_amp > 0.0) {
    std::mt19937_64 rng(init.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::ArrayXd noise(grid->size());
    for (int i = 0; i < grid->size(); ++i) noise[i] = uni(rng);
    Field p = project_zero_mean(Field(grid, std::move(noise)));
    f.values() += init.perturb_amp * p.values();
  }
  (void)metric;
  return f;
}

}  // namespace csaddle::harness
