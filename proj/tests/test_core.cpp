#include <doctest.h>

#include <cmath>
#include <random>

#include "gheat/bench.hpp"
#include "gheat/core.hpp"

using namespace gheat;

TEST_CASE("make_grid derives steps from the table resolutions") {
  const Grid g = make_grid(1.0, 10, 1.0, 50);
  CHECK(g.h() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(g.dt() == doctest::Approx(0.02).epsilon(1e-15));

  const Grid smallest = make_grid(1.0, 2, 1.0, 1);
  CHECK(smallest.h() == 1.0);
  CHECK(smallest.dt() == 1.0);
  CHECK(smallest.interior_count() == 1);

  const Grid fine = make_grid(1.0, 80, 1.0, 3200);
  CHECK(fine.h() == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(fine.dt() == doctest::Approx(3.125e-4).epsilon(1e-15));
}

TEST_CASE("make_grid rejects odd and nonpositive sizes") {
  CHECK_THROWS_AS(make_grid(1.0, 11, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1.0, 0, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0.0, 10, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1.0, 10, -1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1.0, 10, 1.0, 0), std::invalid_argument);
}

TEST_CASE("grid coordinates are built by index") {
  for (int m : {2, 10, 80, 360}) {
    const Grid g = make_grid(1.0, m, 1.0, 7);
    CHECK(g.x(0) == -1.0);
    CHECK(g.x(m) == 1.0);
    CHECK(g.x(m / 2) == 0.0);
    for (int i = 0; i < m; ++i) CHECK(std::abs((g.x(i + 1) - g.x(i)) - g.h()) < 1e-15);
    CHECK(g.t(g.steps()) == 1.0);
  }
}

TEST_CASE("validate_box on the example parameters") {
  const auto example = bench::example_box();
  CHECK(example.sigma1_sq_lo == doctest::Approx(0.04));
  CHECK(example.sigma2_sq_hi == doctest::Approx(0.1225));
  const auto d = validate_box(example);
  CHECK(d.psd_ok);
  CHECK(d.diag_dom_ok);

  UncertaintyBox identity{1, 1, 1, 1, 0, 0};
  CHECK(validate_box(identity).psd_ok);
  CHECK(validate_box(identity).diag_dom_ok);

  UncertaintyBox weak = example;
  weak.sigma1_sq_lo = 0.01;
  weak.sigma1_sq_hi = 0.09;
  CHECK_FALSE(validate_box(weak).diag_dom_ok);
}

TEST_CASE("validate_box is monotone under shrinking intervals") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    UncertaintyBox box{u(rng) * 0.5, 0, u(rng) * 0.5, 0, -u(rng) * 0.5, u(rng) * 0.5};
    box.sigma1_sq_hi = box.sigma1_sq_lo + u(rng);
    box.sigma2_sq_hi = box.sigma2_sq_lo + u(rng);
    const auto before = validate_box(box);
    UncertaintyBox inner = box;
    auto shrink = [&](double& lo, double& hi) {
      const double a = lo + u(rng) * (hi - lo);
      const double b = lo + u(rng) * (hi - lo);
      lo = std::min(a, b);
      hi = std::max(a, b);
    };
    shrink(inner.sigma1_sq_lo, inner.sigma1_sq_hi);
    shrink(inner.sigma2_sq_lo, inner.sigma2_sq_hi);
    shrink(inner.b12_lo, inner.b12_hi);
    const auto after = validate_box(inner);
    if (before.psd_ok) CHECK(after.psd_ok);
    if (before.diag_dom_ok) CHECK(after.diag_dom_ok);
    checked += before.psd_ok || before.diag_dom_ok;
  }
  CHECK(checked > 100);
}

TEST_CASE("check_ordering rejects reversed intervals") {
  UncertaintyBox box = bench::example_box();
  CHECK_NOTHROW(box.check_ordering());
  box.b12_lo = 0.5;
  CHECK_THROWS_AS(box.check_ordering(), std::invalid_argument);
  box = bench::example_box();
  box.sigma2_sq_lo = -0.1;
  CHECK_THROWS_AS(box.check_ordering(), std::invalid_argument);
}

TEST_CASE("solver config invariants") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tol_lin = 1e-10;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.k_max = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("compatibility mismatch is measured on the boundary") {
  const Grid g = make_grid(1.0, 10, 1.0, 10);
  ProblemSpec p = bench::example2_problem();
  CHECK(compatibility_mismatch(p, g) == 0.0);
  p.boundary = [](double t, double x, double y) { return std::sin(5 * (x + y + t)) + 0.25; };
  CHECK(compatibility_mismatch(p, g) == doctest::Approx(0.25));
}
