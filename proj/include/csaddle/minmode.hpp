#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "csaddle/energy.hpp"
#include "csaddle/metric.hpp"

namespace csaddle {

struct EigOptions {
  Metric metric;
  int max_iterations = 2000;
  double tolerance = 1e-9;  // metric residual ||H_metric v - lambda v||_metric
  double deflation_angle_threshold_deg = 10.0;
  bool deflate_translation = true;

  explicit EigOptions(Metric m) : metric(std::move(m)) {}
};

struct EigPair {
  double lambda = 0.0;
  Field v;  // unit norm in the metric; zero mass in H^-1
  double residual = 0.0;
  int iterations = 0;
  bool deflated = false;  // translation deflation was applied
};

class EigError : public std::runtime_error {
 public:
  EigError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual(last_residual) {}
  double last_residual;
};

/// Smallest-eigenvalue pair of the metric Hessian at f. In L2 this is
/// delta^2 F; in H^-1 it is -Delta delta^2 F restricted to zero-mean fields.
/// Minimization is a locally optimal preconditioned CG on the Rayleigh
/// quotient; deterministic (warm start or a fixed low-mode start, no RNG).
EigPair min_mode(const EnergyModel& model, const Field& f, const EigOptions& opts,
                 const Field* warm_start = nullptr);

/// Check v against the discrete translation modes d_x phi (and d_y phi in
/// 2-D). Returns v unchanged when the metric angle stays clear of 0/180 deg
/// or when phi is constant; returns nullopt as the retry signal, telling the
/// eigensolver to re-minimize orthogonally to the translation directions.
std::optional<Field> deflate_translation(const Field& v, const Field& f, double threshold_deg,
                                         const Metric& metric);

/// The k smallest eigenvalues (k <= 10). 1-D grids use a dense assembly of
/// the metric Hessian; 2-D uses block iteration with the same constraints as
/// min_mode. No translation deflation: the raw head, including any near-zero
/// translation eigenvalue.
std::vector<double> spectrum_head(const EnergyModel& model, const Field& f, int k,
                                  const Metric& metric);

}  // namespace csaddle
