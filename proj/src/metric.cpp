#include "csaddle/metric.hpp"

#include <cmath>
#include <sstream>

namespace csaddle {

void Metric::require_zero_mean(const Field& f, const char* who) const {
  const double m = mass(f);
  if (std::abs(m) > 1e-10 * std::max(norm_l2(f), 1.0)) {
    std::ostringstream msg;
    msg << who << ": H^-1 inner products need zero-mean fields, got mass " << m;
    throw std::invalid_argument(msg.str());
  }
}

double Metric::inner(const Field& f, const Field& g) const {
  require_same_grid(f, g, "Metric::inner");
  if (!f.grid().same_layout(*grid_))
    throw std::invalid_argument("Metric::inner: fields do not live on the metric's grid");
  if (kind_ == MetricKind::L2) return inner_l2(f, g);
  require_zero_mean(f, "Metric::inner");
  require_zero_mean(g, "Metric::inner");
  return inner_l2(inv_neg_laplacian_zero_mean(f), g);
}

double Metric::norm(const Field& f) const { return std::sqrt(inner(f, f)); }

double Metric::grad_norm(const Field& l2_derivative) const {
  if (kind_ == MetricKind::L2) return norm_l2(l2_derivative);
  return std::sqrt(dirichlet_form(l2_derivative));
}

}  // namespace csaddle
