#pragma once

#include "csaddle/field.hpp"
#include "csaddle/ops.hpp"

namespace csaddle {

enum class MetricKind { L2, Hminus1 };

/// Inner-product context for the gradient flow. The H^-1 product
/// <f,g>_{H^-1} = <(-Delta)^{-1} f, g>_{L2} is only defined on the zero-mean
/// subspace; callers must project first.
class Metric {
 public:
  static Metric l2(GridPtr grid) { return Metric(MetricKind::L2, std::move(grid)); }
  static Metric hminus1(GridPtr grid) { return Metric(MetricKind::Hminus1, std::move(grid)); }

  MetricKind kind() const { return kind_; }
  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  double inner(const Field& f, const Field& g) const;
  double norm(const Field& f) const;

  /// Norm of the metric gradient given the L2 variational derivative g:
  /// ||g||_{L2} in L2, and ||Delta g||_{H^-1} = sqrt(<g, -Delta g>) in H^-1.
  double grad_norm(const Field& l2_derivative) const;

 private:
  Metric(MetricKind kind, GridPtr grid) : kind_(kind), grid_(std::move(grid)) {}
  void require_zero_mean(const Field& f, const char* who) const;

  MetricKind kind_;
  GridPtr grid_;
};

}  // namespace csaddle
