#include <doctest.h>

#include <cmath>
#include <random>

#include "gheat/bench.hpp"
#include "gheat/stepper.hpp"
#include "oracles.hpp"

using namespace gheat;
using namespace gheat::stepper;

namespace {

ProblemSpec constant_problem(double c, const UncertaintyBox& box) {
  ProblemSpec p;
  p.box = box;
  p.initial = [c](double, double) { return c; };
  p.boundary = [c](double, double, double) { return c; };
  return p;
}

double lattice_distance(const LatticeLevel& a, const LatticeLevel& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) d = std::max(d, std::abs(a.values()[k] - b.values()[k]));
  return d;
}

}  // namespace

TEST_CASE("constant data give a single solve") {
  const Grid g = make_grid(1.0, 10, 1.0, 20);
  const auto p = constant_problem(5.0, bench::example_box());
  const auto step = picard_step(LatticeLevel(11, 5.0), 1, p, g, SolverConfig{});
  CHECK(step.report.iterations == 1);
  CHECK(lattice_distance(step.next, LatticeLevel(11, 5.0)) < 1e-10);
}

TEST_CASE("zero problem marches to zero with one solve per step") {
  const Grid g = make_grid(1.0, 10, 1.0, 20);
  const auto lat = march(constant_problem(0.0, bench::example_box()), g, SolverConfig{});
  REQUIRE(lat.levels.size() == 21);
  for (const auto& l : lat.levels) CHECK(l.max_abs() == 0.0);
  for (const auto& r : lat.reports) CHECK(r.iterations == 1);
}

TEST_CASE("bilinear solution is reproduced at the nodes") {
  const auto box = bench::example_box();
  const Grid g = make_grid(1.0, 10, 1.0, 50);
  ProblemSpec p;
  p.box = box;
  p.initial = [](double x, double y) { return x * y; };
  p.boundary = [b = box.b12_hi](double t, double x, double y) { return x * y + b * t; };
  const auto start = sample(g, g.t(7), p.boundary);
  const auto step = picard_step(start, 8, p, g, SolverConfig{});
  CHECK(lattice_distance(step.next, sample(g, g.t(8), p.boundary)) < 1e-9);
}

TEST_CASE("quadratic solution with the upper variance drift is reproduced at all steps") {
  const auto box = bench::example_box();
  const Grid g = make_grid(1.0, 10, 1.0, 40);
  ProblemSpec p;
  p.box = box;
  p.initial = [](double x, double) { return x * x; };
  p.boundary = [](double t, double x, double) { return x * x + 0.09 * t; };
  const auto lat = march(p, g, SolverConfig{});
  for (int n = 0; n <= g.steps(); ++n) CHECK(lattice_distance(lat.levels[n], sample(g, g.t(n), p.boundary)) < 1e-9);
}

TEST_CASE("general nodally exact quadratics") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto box = bench::example_box();
  for (int trial = 0; trial < 8; ++trial) {
    const double c0 = u(rng), c1 = u(rng), c2 = u(rng), c3 = u(rng), c4 = u(rng), c5 = u(rng);
    const double s1 = c4 >= 0 ? box.sigma1_sq_hi : box.sigma1_sq_lo;
    const double s2 = c5 >= 0 ? box.sigma2_sq_hi : box.sigma2_sq_lo;
    const double b = std::max(box.b12_hi * c3, box.b12_lo * c3);
    const double ct = s1 * c4 + s2 * c5 + b;
    ProblemSpec p;
    p.box = box;
    p.boundary = [=](double t, double x, double y) {
      return c0 + c1 * x + c2 * y + c3 * x * y + c4 * x * x + c5 * y * y + ct * t;
    };
    p.initial = [f = p.boundary](double x, double y) { return f(0, x, y); };
    const Grid g = make_grid(1.0, 8, 0.5, 10);
    const auto lat = march(p, g, SolverConfig{});
    CHECK(lattice_distance(lat.levels.back(), sample(g, g.horizon(), p.boundary)) < 1e-9);
  }
}

TEST_CASE("first step of example 2 matches the dense fixed-point oracle") {
  const Grid g = make_grid(1.0, 10, 1.0, 50);
  const auto p = bench::example2_problem();
  SolverConfig cfg;
  cfg.record_iterates = true;
  const auto u0 = sample(g, p.initial);
  const auto step = picard_step(u0, 1, p, g, cfg);
  const auto want = oracle::picard_step(oracle::to_dense(u0), oracle::to_dense(sample(g, g.t(1), p.boundary)),
                                        g.h(), g.dt(), p.box, nullptr, 1e-13);
  CHECK(lattice_distance(step.next, oracle::from_dense(want.next)) < 1e-10);
  CHECK(verify_monotone_iteration(step.report, cfg.tol_lin));
  CHECK(step.report.increments.back() <= cfg.tol_picard);
}

TEST_CASE("monotone iteration on a random step of example 1") {
  const Grid g = make_grid(1.0, 10, 1.0, 50);
  const auto m = bench::example1_problem();
  SolverConfig cfg;
  cfg.record_iterates = true;
  const int n = 1 + std::mt19937_64(23)() % 50;
  const auto prev = sample(g, g.t(n - 1), m.exact);
  const auto step = picard_step(prev, n, m.problem, g, cfg);
  CHECK(step.report.iterations >= 2);
  CHECK(verify_monotone_iteration(step.report, cfg.tol_lin));

  const auto flat = picard_step(LatticeLevel(11, 1.0), 1, constant_problem(1.0, m.problem.box), g, cfg);
  CHECK(verify_monotone_iteration(flat.report, cfg.tol_lin));
  CHECK_THROWS_AS(verify_monotone_iteration(IterationReport{}, 1e-12), std::invalid_argument);
}

TEST_CASE("example 1 on the coarsest table grid") {
  const Grid g = make_grid(1.0, 10, 1.0, 50);
  const auto m = bench::example1_problem();
  const auto lat = march(m.problem, g, SolverConfig{});
  const auto norms = bench::error_norms(lat, m.exact);
  CHECK(norms.linf == doctest::Approx(1.9013e-01).epsilon(1e-4));
  // boundary and initial levels are exact
  for (int n = 1; n <= g.steps(); ++n)
    for (int k = 0; k <= 10; ++k) CHECK(lat.levels[n](0, k) == m.exact(g.t(n), g.x(0), g.y(k)));
  CHECK(lat.levels[0] == sample(g, m.problem.initial));
}

TEST_CASE("iteration cap keeps the partial lattice") {
  const Grid g = make_grid(1.0, 10, 1.0, 50);
  SolverConfig cfg;
  cfg.k_max = 1;
  try {
    march(bench::example2_problem(), g, cfg);
    FAIL("expected an iteration cap");
  } catch (const MarchError& e) {
    CHECK(e.iteration_cap());
    CHECK(e.step() == 1);
    REQUIRE(e.partial());
    CHECK(e.partial()->levels.size() == 1);
    CHECK(e.partial()->reports.size() == 1);
  }
}

TEST_CASE("non-dominant boxes need the override") {
  const Grid g = make_grid(1.0, 6, 1.0, 5);
  auto p = bench::example2_problem();
  p.box.sigma1_sq_lo = 0.01;
  CHECK_THROWS_AS(march(p, g, SolverConfig{}), AssumptionError);
  SolverConfig cfg;
  cfg.allow_non_diag_dominant = true;
  const auto lat = march(p, g, cfg);
  CHECK_FALSE(lat.diag_dom_ok);
}

TEST_CASE("stability bound for random zero-forcing data") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = oracle::random_field(rng);
    ProblemSpec p;
    p.box = oracle::random_dominant_box(rng);
    p.initial = [f](double x, double y) { return f(0, x, y); };
    p.boundary = f;
    const Grid g = make_grid(1.0, 8, 1.0, 12);
    MarchSummary s;
    CHECK_NOTHROW(s = march_streaming(p, g, SolverConfig{}, nullptr));
    CHECK(s.solution_max <= s.data_bound + stability_slack(g.steps(), 1e-12));
  }
}

TEST_CASE("comparison principle") {
  const Grid g = make_grid(1.0, 10, 1.0, 20);
  const auto p = bench::example2_problem();
  const auto same = verify_comparison(p, p, g, SolverConfig{});
  CHECK(same.ordered);
  CHECK(std::abs(same.min_difference) < 1e-9);

  ProblemSpec up = p;
  up.initial = [f = p.initial](double x, double y) { return f(x, y) + 0.1; };
  up.boundary = [f = p.boundary](double t, double x, double y) { return f(t, x, y) + 0.1; };
  const auto shifted = verify_comparison(up, p, g, SolverConfig{});
  CHECK(shifted.ordered);
  CHECK(shifted.max_difference <= 0.1 + 1e-8);
  CHECK(shifted.min_difference >= 0.1 - 1e-8);

  ProblemSpec down = p;
  down.initial = [f = p.initial](double x, double y) { return f(x, y) - 0.05 * (1 - x * x) * (1 - y * y); };
  CHECK(verify_comparison(p, down, g, SolverConfig{}).ordered);
  CHECK_THROWS_AS(verify_comparison(down, p, g, SolverConfig{}), std::invalid_argument);
}
