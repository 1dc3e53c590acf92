#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "csaddle/io.hpp"
#include "csaddle/metric.hpp"
#include "csaddle/ops.hpp"

using namespace csaddle;

namespace {

Field fill(const GridPtr& g, double (*f)(double)) {
  Eigen::ArrayXd v(g->size());
  for (int i = 0; i < g->nodes(0); ++i) v[i] = f(g->coord(0, i));
  return Field(g, std::move(v));
}

Field random_field(const GridPtr& g, unsigned seed, double amp = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-amp, amp);
  Eigen::ArrayXd v(g->size());
  for (int i = 0; i < g->size(); ++i) v[i] = uni(rng);
  return Field(g, std::move(v));
}

}  // namespace

TEST_CASE("laplacian of a constant is zero") {
  auto g = Grid::line(16, 1.0, Bc::Periodic);
  Field f(g, Eigen::ArrayXd::Constant(g->size(), 1.0));
  CHECK(laplacian(f).values().abs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian matches analytic second derivative") {
  SUBCASE("periodic sin(2 pi x)") {
    auto g = Grid::line(200, 1.0, Bc::Periodic);
    Field f = fill(g, [](double x) { return std::sin(2.0 * M_PI * x); });
    Field lap = laplacian(f);
    const double w = 2.0 * M_PI;
    const double h = g->spacing(0);
    double max_err = 0.0;
    for (int i = 0; i < g->size(); ++i)
      max_err = std::max(max_err, std::abs(lap[i] + w * w * f[i]));
    CHECK(max_err <= std::pow(w, 4) * h * h / 12.0);
  }
  SUBCASE("neumann cos(pi x)") {
    auto g = Grid::line(200, 1.0, Bc::Neumann);
    Field f = fill(g, [](double x) { return std::cos(M_PI * x); });
    Field lap = laplacian(f);
    const double h = g->spacing(0);
    double max_err = 0.0;
    for (int i = 0; i < g->size(); ++i)
      max_err = std::max(max_err, std::abs(lap[i] + M_PI * M_PI * f[i]));
    CHECK(max_err <= std::pow(M_PI, 4) * h * h / 12.0);
  }
}

TEST_CASE("helmholtz_sq") {
  auto g = Grid::box(40, 50, 2.0 * M_PI, 2.0 * M_PI);
  SUBCASE("constant is a fixed point") {
    Field c(g, Eigen::ArrayXd::Constant(g->size(), 0.7));
    Field out = helmholtz_sq(c);
    CHECK((out.values() - 0.7).abs().maxCoeff() < 1e-13);
  }
  SUBCASE("unit plane wave is annihilated to the discrete symbol") {
    Eigen::ArrayXd v(g->size());
    for (int iy = 0; iy < g->nodes(1); ++iy)
      for (int ix = 0; ix < g->nodes(0); ++ix)
        v[g->index(ix, iy)] = std::cos(g->coord(1, iy));
    Field f(g, std::move(v));
    const double h = g->spacing(1);
    const double sym = -4.0 / (h * h) * std::pow(std::sin(M_PI * 1.0 / g->cells(1) * 1.0), 2);
    const double expected = std::pow(1.0 + sym, 2);
    Field out = helmholtz_sq(f);
    for (int i = 0; i < g->size(); i += 37)
      CHECK(out[i] == doctest::Approx(expected * f[i]).epsilon(1e-10));
  }
  SUBCASE("equals two sequential (laplacian + identity) applications") {
    Field f = random_field(g, 7);
    Field once = laplacian(f);
    once.values() += f.values();
    Field twice = laplacian(once);
    twice.values() += once.values();
    Field viaop = helmholtz_sq(f);
    CHECK((viaop.values() - twice.values()).abs().maxCoeff() == 0.0);
  }
  SUBCASE("rejects non-periodic grids") {
    auto gn = Grid::line(16, 1.0, Bc::Neumann);
    CHECK_THROWS_AS(helmholtz_sq(Field(gn)), std::invalid_argument);
  }
}

TEST_CASE("inverse negative laplacian on the zero-mean subspace") {
  SUBCASE("zero maps to zero") {
    auto g = Grid::line(32, 1.0, Bc::Periodic);
    Field z(g);
    CHECK(norm_l2(inv_neg_laplacian_zero_mean(z)) == 0.0);
  }
  SUBCASE("sine divided by the discrete symbol") {
    auto g = Grid::line(64, 1.0, Bc::Periodic);
    Field f = fill(g, [](double x) { return std::sin(2.0 * M_PI * x); });
    Field w = inv_neg_laplacian_zero_mean(f);
    const double h = g->spacing(0);
    const double sym = 4.0 / (h * h) * std::pow(std::sin(M_PI / g->cells(0)), 2);
    for (int i = 0; i < g->size(); i += 5)
      CHECK(w[i] == doctest::Approx(f[i] / sym).epsilon(1e-12));
  }
  SUBCASE("roundtrip identity on zero-mean fields, both BCs") {
    for (Bc bc : {Bc::Periodic, Bc::Neumann}) {
      auto g = Grid::line(48, 1.0, bc);
      Field f = project_zero_mean(random_field(g, 3));
      Field w = inv_neg_laplacian_zero_mean(f);
      Field back = laplacian(w);
      back.values() = -back.values();
      CHECK(norm_l2(back.like(back.values() - f.values())) <= 1e-10 * norm_l2(f));
      CHECK(std::abs(mass(w)) <= 1e-12);
    }
  }
  SUBCASE("nonzero mean rejected with the measured mean") {
    auto g = Grid::line(32, 1.0, Bc::Periodic);
    Field f(g, Eigen::ArrayXd::Constant(g->size(), 0.25));
    CHECK_THROWS_WITH_AS(inv_neg_laplacian_zero_mean(f),
                         doctest::Contains("mean"), std::invalid_argument);
  }
}

TEST_CASE("inner products") {
  SUBCASE("L2 of ones on [0,1]") {
    for (Bc bc : {Bc::Periodic, Bc::Neumann}) {
      auto g = Grid::line(20, 1.0, bc);
      Field one(g, Eigen::ArrayXd::Constant(g->size(), 1.0));
      CHECK(inner_l2(one, one) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("L2 of sin(2 pi x) against itself") {
    auto g = Grid::line(200, 1.0, Bc::Periodic);
    Field f = fill(g, [](double x) { return std::sin(2.0 * M_PI * x); });
    const double h = g->spacing(0);
    CHECK(std::abs(inner_l2(f, f) - 0.5) <= h * h);
  }
  SUBCASE("H^-1 of sin(2 pi x) against itself hits the spectral value") {
    auto g = Grid::line(200, 1.0, Bc::Periodic);
    Field f = fill(g, [](double x) { return std::sin(2.0 * M_PI * x); });
    Metric m = Metric::hminus1(g);
    const double h = g->spacing(0);
    const double sym = 4.0 / (h * h) * std::pow(std::sin(M_PI / g->cells(0)), 2);
    CHECK(m.inner(f, f) == doctest::Approx(inner_l2(f, f) / sym).epsilon(1e-12));
  }
  SUBCASE("grid mismatch and zero-mean violations throw") {
    auto g1 = Grid::line(32, 1.0, Bc::Periodic);
    auto g2 = Grid::line(48, 1.0, Bc::Periodic);
    Metric m = Metric::l2(g1);
    CHECK_THROWS_AS(m.inner(Field(g1), Field(g2)), std::invalid_argument);
    Metric hm = Metric::hminus1(g1);
    Field c(g1, Eigen::ArrayXd::Constant(g1->size(), 1.0));
    CHECK_THROWS_AS(hm.inner(c, c), std::invalid_argument);
  }
}

TEST_CASE("mass and zero-mean projection") {
  auto g = Grid::line(50, 1.0, Bc::Neumann);
  Field c(g, Eigen::ArrayXd::Constant(g->size(), 0.6));
  CHECK(mass(c) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(norm_l2(project_zero_mean(c)) <= 1e-14);
  Field r = random_field(g, 11);
  CHECK(std::abs(mass(project_zero_mean(r))) <= 1e-14);
}

TEST_CASE("metric and operator properties on random fields") {
  for (Bc bc : {Bc::Periodic, Bc::Neumann}) {
    CAPTURE(static_cast<int>(bc));
    auto g = Grid::line(64, 1.0, bc);
    Field f = random_field(g, 21);
    Field h = random_field(g, 22);

    SUBCASE("L2 symmetry and positivity") {
      CHECK(inner_l2(f, h) == inner_l2(h, f));
      CHECK(inner_l2(f, f) > 0.0);
    }
    SUBCASE("discrete -Laplacian is self-adjoint") {
      const double a = inner_l2(laplacian(f), h);
      const double b = inner_l2(f, laplacian(h));
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
    SUBCASE("dirichlet_form matches <f, -lap f>") {
      Field lap = laplacian(f);
      CHECK(dirichlet_form(f) == doctest::Approx(-inner_l2(f, lap)).epsilon(1e-12));
    }
  }
  SUBCASE("H^-1 symmetry and positivity") {
    auto g = Grid::line(64, 1.0, Bc::Periodic);
    Metric m = Metric::hminus1(g);
    Field f = project_zero_mean(random_field(g, 31));
    Field h = project_zero_mean(random_field(g, 32));
    CHECK(m.inner(f, h) == doctest::Approx(m.inner(h, f)).epsilon(1e-12));
    CHECK(m.inner(f, f) > 0.0);
  }
  SUBCASE("periodic mass conservation of the laplacian") {
    auto g = Grid::line(64, 1.0, Bc::Periodic);
    Field f = random_field(g, 41);
    CHECK(std::abs(mass(laplacian(f))) <= 1e-12 * laplacian(f).values().abs().maxCoeff());
  }
}

TEST_CASE("field file roundtrip is bit-identical") {
  auto g2 = Grid::box(12, 8, 2.5, 1.5);
  Field f = random_field(g2, 55, 3.0);
  const std::string path = "roundtrip_test.field";
  save_field(f, path);
  Field back = load_field(path);
  REQUIRE(back.grid().same_layout(f.grid()));
  for (int i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);
  std::remove(path.c_str());

  auto g1 = Grid::line(33, 1.0, Bc::Neumann);
  Field f1 = random_field(g1, 56);
  save_field(f1, path);
  Field back1 = load_field(path);
  REQUIRE(back1.grid().same_layout(f1.grid()));
  for (int i = 0; i < f1.size(); ++i) CHECK(back1[i] == f1[i]);
  std::remove(path.c_str());
}
