#pragma once

#include <Eigen/Core>

#include "csaddle/grid.hpp"

namespace csaddle {

/// Diagonalizing transform for the discrete Laplacian of a grid.
///
/// Periodic axes use the real DFT, Neumann axes the DCT-I (which is exactly
/// the eigenbasis of the mirror-ghost Laplacian). Constant-coefficient
/// operators built from the Laplacian act mode-by-mode through these
/// transforms, which is how the implicit parts of all steppers are inverted.
class SpectralTransform {
 public:
  explicit SpectralTransform(const Grid& grid);
  ~SpectralTransform();

  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  int num_modes() const { return static_cast<int>(symbols_.size()); }

  /// Symbol of the discrete Laplacian per stored mode (all <= 0; entry 0 is
  /// the constant mode with symbol 0).
  const Eigen::ArrayXd& laplacian_symbols() const { return symbols_; }

  /// Index of the constant mode within the stored-mode array.
  int zero_mode() const { return 0; }

  /// y = T^{-1}[ mult .* T[x] ]. mult has one real entry per stored mode.
  Eigen::ArrayXd diag_apply(const Eigen::ArrayXd& x, const Eigen::ArrayXd& mult) const;

 private:
  struct Impl;
  Impl* impl_;
  Eigen::ArrayXd symbols_;
};

/// Shared per-grid transform (plans are built once per grid layout).
const SpectralTransform& transform_for(const Grid& grid);

}  // namespace csaddle
