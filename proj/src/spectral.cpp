#include "csaddle/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace csaddle {

namespace {
std::mutex planner_mutex;  // FFTW's planner is not thread-safe

struct FftwBuffer {
  explicit FftwBuffer(size_t n) : data(static_cast<double*>(fftw_malloc(n * sizeof(double)))) {}
  ~FftwBuffer() { fftw_free(data); }
  double* data;
};
}  // namespace

struct SpectralTransform::Impl {
  int dim = 1;
  Bc bc = Bc::Neumann;
  int n_nodes = 0;          // total real points
  int nx = 0, ny = 0;       // 2-D node counts
  int n_complex = 0;        // complex coefficients for r2c transforms
  double norm = 1.0;        // round-trip normalization
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

SpectralTransform::SpectralTransform(const Grid& grid) : impl_(new Impl()) {
  impl_->dim = grid.dim();
  impl_->bc = grid.bc();
  impl_->n_nodes = grid.size();

  std::lock_guard<std::mutex> lock(planner_mutex);
  if (grid.dim() == 1 && grid.bc() == Bc::Neumann) {
    const int nodes = grid.nodes(0);  // cells + 1
    const int cells = grid.cells(0);
    FftwBuffer in(nodes), out(nodes);
    impl_->fwd = fftw_plan_r2r_1d(nodes, in.data, out.data, FFTW_REDFT00, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_r2r_1d(nodes, in.data, out.data, FFTW_REDFT00, FFTW_ESTIMATE);
    impl_->norm = 1.0 / (2.0 * cells);
    symbols_.resize(nodes);
    const double h = grid.spacing(0);
    for (int j = 0; j < nodes; ++j) {
      const double s = std::sin(0.5 * M_PI * j / cells);
      symbols_[j] = -4.0 / (h * h) * s * s;
    }
  } else if (grid.dim() == 1) {
    const int n = grid.nodes(0);
    impl_->n_complex = n / 2 + 1;
    FftwBuffer in(n);
    FftwBuffer out(2 * impl_->n_complex);
    impl_->fwd = fftw_plan_dft_r2c_1d(n, in.data, reinterpret_cast<fftw_complex*>(out.data),
                                      FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(out.data), in.data,
                                      FFTW_ESTIMATE);
    impl_->norm = 1.0 / n;
    symbols_.resize(impl_->n_complex);
    const double h = grid.spacing(0);
    for (int j = 0; j < impl_->n_complex; ++j) {
      const double s = std::sin(M_PI * j / n);
      symbols_[j] = -4.0 / (h * h) * s * s;
    }
  } else {
    const int nx = grid.nodes(0), ny = grid.nodes(1);
    impl_->nx = nx;
    impl_->ny = ny;
    impl_->n_complex = ny * (nx / 2 + 1);
    FftwBuffer in(nx * ny);
    FftwBuffer out(2 * impl_->n_complex);
    // layout: index = iy*nx + ix, x contiguous -> FFTW dims (ny, nx)
    impl_->fwd = fftw_plan_dft_r2c_2d(ny, nx, in.data, reinterpret_cast<fftw_complex*>(out.data),
                                      FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_c2r_2d(ny, nx, reinterpret_cast<fftw_complex*>(out.data), in.data,
                                      FFTW_ESTIMATE);
    impl_->norm = 1.0 / (static_cast<double>(nx) * ny);
    symbols_.resize(impl_->n_complex);
    const double hx = grid.spacing(0), hy = grid.spacing(1);
    const int nxc = nx / 2 + 1;
    for (int jy = 0; jy < ny; ++jy) {
      const double sy = std::sin(M_PI * jy / ny);
      const double lam_y = -4.0 / (hy * hy) * sy * sy;
      for (int jx = 0; jx < nxc; ++jx) {
        const double sx = std::sin(M_PI * jx / nx);
        symbols_[jy * nxc + jx] = -4.0 / (hx * hx) * sx * sx + lam_y;
      }
    }
  }
}

SpectralTransform::~SpectralTransform() { delete impl_; }

Eigen::ArrayXd SpectralTransform::diag_apply(const Eigen::ArrayXd& x,
                                             const Eigen::ArrayXd& mult) const {
  if (static_cast<int>(x.size()) != impl_->n_nodes)
    throw std::invalid_argument("SpectralTransform: field size mismatch");
  if (mult.size() != symbols_.size())
    throw std::invalid_argument("SpectralTransform: multiplier count mismatch");

  if (impl_->dim == 1 && impl_->bc == Bc::Neumann) {
    FftwBuffer a(impl_->n_nodes), b(impl_->n_nodes);
    std::copy(x.data(), x.data() + impl_->n_nodes, a.data);
    fftw_execute_r2r(impl_->fwd, a.data, b.data);
    for (int j = 0; j < impl_->n_nodes; ++j) b.data[j] *= mult[j] * impl_->norm;
    fftw_execute_r2r(impl_->bwd, b.data, a.data);
    return Eigen::Map<Eigen::ArrayXd>(a.data, impl_->n_nodes);
  }

  FftwBuffer a(impl_->n_nodes);
  FftwBuffer c(2 * impl_->n_complex);
  std::copy(x.data(), x.data() + impl_->n_nodes, a.data);
  fftw_execute_dft_r2c(impl_->fwd, a.data, reinterpret_cast<fftw_complex*>(c.data));
  for (int j = 0; j < impl_->n_complex; ++j) {
    const double m = mult[j] * impl_->norm;
    c.data[2 * j] *= m;
    c.data[2 * j + 1] *= m;
  }
  fftw_execute_dft_c2r(impl_->bwd, reinterpret_cast<fftw_complex*>(c.data), a.data);
  return Eigen::Map<Eigen::ArrayXd>(a.data, impl_->n_nodes);
}

const SpectralTransform& transform_for(const Grid& grid) {
  using Key = std::tuple<int, int, int, int, double, double>;
  static std::mutex registry_mutex;
  static std::map<Key, std::unique_ptr<SpectralTransform>> registry;

  Key key{grid.dim(), static_cast<int>(grid.bc()), grid.cells(0),
          grid.dim() == 2 ? grid.cells(1) : 0, grid.extent(0),
          grid.dim() == 2 ? grid.extent(1) : 0.0};
  std::lock_guard<std::mutex> lock(registry_mutex);
  auto it = registry.find(key);
  if (it == registry.end())
    it = registry.emplace(key, std::make_unique<SpectralTransform>(grid)).first;
  return *it->second;
}

}  // namespace csaddle
