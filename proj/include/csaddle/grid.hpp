#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>

namespace csaddle {

enum class Bc { Neumann, Periodic };

inline const char* to_string(Bc bc) {
  return bc == Bc::Neumann ? "neumann" : "periodic";
}

/// Uniform tensor grid on [0,Lx] (x [0,Ly]).
///
/// A periodic axis with n cells stores n nodes x_0..x_{n-1}; a Neumann axis
/// stores n+1 nodes x_0..x_n. Spacing is h = extent/n on both. 2-D grids are
/// periodic on both axes; the only 2-D model here (Landau-Brazovskii) needs
/// nothing else.
class Grid {
 public:
  static std::shared_ptr<const Grid> line(int n, double extent, Bc bc);
  static std::shared_ptr<const Grid> box(int nx, int ny, double lx, double ly,
                                         Bc bc = Bc::Periodic);

  int dim() const { return dim_; }
  Bc bc() const { return bc_; }

  /// Cells per axis (the divisor in h = extent/n).
  int cells(int axis = 0) const { return n_[axis]; }
  /// Nodes per axis (cells for periodic, cells+1 for Neumann).
  int nodes(int axis = 0) const { return nodes_[axis]; }
  double extent(int axis = 0) const { return extent_[axis]; }
  double spacing(int axis = 0) const { return h_[axis]; }

  /// Total node count.
  int size() const { return size_; }
  /// Total measure of the domain (Lx or Lx*Ly).
  double measure() const { return measure_; }

  /// Node coordinate along an axis.
  double coord(int axis, int i) const { return h_[axis] * i; }

  /// Quadrature weight of node i (trapezoid on Neumann axes, h elsewhere).
  double weight(int i) const;

  /// Row-major linear index, x fastest.
  int index(int ix, int iy) const { return iy * nodes_[0] + ix; }

  bool same_layout(const Grid& other) const;

 private:
  Grid() = default;

  int dim_ = 1;
  Bc bc_ = Bc::Neumann;
  std::array<int, 2> n_{0, 0};
  std::array<int, 2> nodes_{0, 1};
  std::array<double, 2> extent_{0.0, 0.0};
  std::array<double, 2> h_{0.0, 0.0};
  int size_ = 0;
  double measure_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace csaddle
