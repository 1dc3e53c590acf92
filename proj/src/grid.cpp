#include "csaddle/grid.hpp"

namespace csaddle {

std::shared_ptr<const Grid> Grid::line(int n, double extent, Bc bc) {
  if (n < 2) throw std::invalid_argument("Grid::line: need at least 2 cells");
  if (extent <= 0.0) throw std::invalid_argument("Grid::line: extent must be positive");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = 1;
  g->bc_ = bc;
  g->n_ = {n, 0};
  g->nodes_ = {bc == Bc::Periodic ? n : n + 1, 1};
  g->extent_ = {extent, 0.0};
  g->h_ = {extent / n, 0.0};
  g->size_ = g->nodes_[0];
  g->measure_ = extent;
  return g;
}

std::shared_ptr<const Grid> Grid::box(int nx, int ny, double lx, double ly, Bc bc) {
  if (bc != Bc::Periodic)
    throw std::invalid_argument("Grid::box: 2-D grids are periodic only");
  if (nx < 2 || ny < 2) throw std::invalid_argument("Grid::box: need at least 2 cells per axis");
  if (lx <= 0.0 || ly <= 0.0) throw std::invalid_argument("Grid::box: extents must be positive");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = 2;
  g->bc_ = Bc::Periodic;
  g->n_ = {nx, ny};
  g->nodes_ = {nx, ny};
  g->extent_ = {lx, ly};
  g->h_ = {lx / nx, ly / ny};
  g->size_ = nx * ny;
  g->measure_ = lx * ly;
  return g;
}

double Grid::weight(int i) const {
  if (dim_ == 1) {
    if (bc_ == Bc::Periodic) return h_[0];
    return (i == 0 || i == nodes_[0] - 1) ? 0.5 * h_[0] : h_[0];
  }
  return h_[0] * h_[1];
}

bool Grid::same_layout(const Grid& other) const {
  return dim_ == other.dim_ && bc_ == other.bc_ && n_ == other.n_ &&
         extent_ == other.extent_;
}

}  // namespace csaddle
