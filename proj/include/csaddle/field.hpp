#pragma once

#include <Eigen/Core>

#include "csaddle/grid.hpp"

namespace csaddle {

/// Scalar order parameter sampled on a grid's nodes.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid)
      : grid_(std::move(grid)), values_(Eigen::ArrayXd::Zero(grid_->size())) {}
  Field(GridPtr grid, Eigen::ArrayXd values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_->size())
      throw std::invalid_argument("Field: value count does not match grid");
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  Eigen::ArrayXd& values() { return values_; }
  const Eigen::ArrayXd& values() const { return values_; }

  double& operator[](int i) { return values_[i]; }
  double operator[](int i) const { return values_[i]; }
  int size() const { return static_cast<int>(values_.size()); }

  bool all_finite() const { return values_.isFinite().all(); }
  double max_abs() const { return values_.abs().maxCoeff(); }

  Field like(Eigen::ArrayXd v) const { return Field(grid_, std::move(v)); }

 private:
  GridPtr grid_;
  Eigen::ArrayXd values_;
};

inline void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!a.grid().same_layout(b.grid()))
    throw std::invalid_argument(std::string(where) + ": fields live on different grids");
}

}  // namespace csaddle
