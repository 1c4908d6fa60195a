#include <doctest.h>

#include <cmath>

#include "gheat/bench.hpp"
#include "gheat/gexp.hpp"

using namespace gheat;
using namespace gheat::gexp;

namespace {

GExpQuery query(SpatialFunction payoff, int cells = 40, int steps = 100) {
  GExpQuery q;
  q.payoff = std::move(payoff);
  q.box = bench::example_box();
  q.cells = cells;
  q.steps = steps;
  return q;
}

}  // namespace

TEST_CASE("default half-width") {
  auto q = query([](double x, double) { return x; });
  CHECK(default_half_width(q) == doctest::Approx(4 * 0.35));
  q.eval_time = 4.0;
  CHECK(default_half_width(q) == doctest::Approx(4 * 0.35 * 2));

  q.eval_time = 1.0;
  q.x0 = 0.1;
  q.cells = 80;
  const double l = default_half_width(q);
  CHECK(l >= 1.5);
  const Grid g = query_grid(q);
  const double idx = (q.x0 + g.half_width()) / g.h();
  CHECK(std::abs(idx - std::round(idx)) < 1e-9);

  q.x0 = 0.1;
  q.y0 = 0.1 * std::sqrt(2.0);
  CHECK_THROWS_AS(default_half_width(q), std::invalid_argument);
  q.half_width = 2.0;
  CHECK_THROWS_AS(query_grid(q), std::invalid_argument);
}

TEST_CASE("linear payoffs have zero expectation") {
  const auto r = g_expectation(query([](double x, double) { return x; }), SolverConfig{});
  CHECK(std::abs(r.value) < 1e-9);
  CHECK(r.boundary_diagnostic < 1e-9);
  CHECK_FALSE(r.warning);
}

TEST_CASE("variance and covariance identities with exact boundaries") {
  auto q = query([](double x, double) { return x * x; });
  q.boundary = [](double t, double x, double) { return x * x + 0.09 * t; };
  q.lower_boundary = [](double t, double x, double) { return -x * x - 0.04 * t; };
  const auto sq = upper_and_lower(q, SolverConfig{});
  CHECK(sq.upper == doctest::Approx(0.09).epsilon(1e-8));
  CHECK(sq.lower == doctest::Approx(0.04).epsilon(1e-8));

  auto c = query([](double x, double y) { return x * y; });
  c.boundary = [](double t, double x, double y) { return x * y + 0.03 * t; };
  c.lower_boundary = [](double t, double x, double y) { return -x * y + 0.04 * t; };
  const auto xy = upper_and_lower(c, SolverConfig{});
  CHECK(std::abs(xy.upper - 0.03) < 1e-8);
  CHECK(std::abs(xy.lower + 0.04) < 1e-8);
}

TEST_CASE("covariance payoff with the frozen boundary") {
  auto q = query([](double x, double y) { return x * y; }, 160, 400);
  q.half_width = 4.0;
  const auto r = g_expectation(q, SolverConfig{});
  CHECK(std::abs(r.value - 0.03) < 1e-6);
}

TEST_CASE("constants are preserved") {
  const auto b = upper_and_lower(query([](double, double) { return 3.0; }, 10, 10), SolverConfig{});
  CHECK(b.upper == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(b.lower == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(b.boundary_diagnostic < 1e-10);
}

TEST_CASE("sublinearity, homogeneity and monotonicity") {
  const SolverConfig cfg;
  auto phi = [](double x, double y) { return std::cos(2 * x) * y + x * x; };
  auto psi = [](double x, double y) { return -x * y + std::sin(x + y); };
  const double a = g_expectation(query(phi, 20, 40), cfg).value;
  const double b = g_expectation(query(psi, 20, 40), cfg).value;
  const double ab = g_expectation(query([&](double x, double y) { return phi(x, y) + psi(x, y); }, 20, 40), cfg).value;
  CHECK(ab <= a + b + 1e-8);
  const double scaled = g_expectation(query([&](double x, double y) { return 2.5 * phi(x, y); }, 20, 40), cfg).value;
  CHECK(scaled == doctest::Approx(2.5 * a).epsilon(1e-8));
  const double bigger = g_expectation(query([&](double x, double y) { return phi(x, y) + 0.01 * (1 + x * x); }, 20, 40), cfg).value;
  CHECK(bigger >= a - 1e-8);
  const auto bounds = upper_and_lower(query(phi, 20, 40), cfg);
  CHECK(bounds.upper >= bounds.lower - 1e-8);
}

TEST_CASE("singleton box reduces to the heat equation") {
  double last_error = INFINITY;
  for (int cells : {10, 20, 40}) {
    GExpQuery q;
    q.payoff = [](double x, double y) { return x * x + y * y; };
    q.box = UncertaintyBox{1, 1, 1, 1, 0, 0};
    q.cells = cells;
    q.steps = cells * 2;
    q.half_width = 6.0;
    q.boundary = [](double t, double x, double y) { return x * x + y * y + 2 * t; };
    const auto b = upper_and_lower(q, SolverConfig{});
    CHECK(b.upper == doctest::Approx(b.lower).epsilon(1e-9));
    const double err = std::abs(b.upper - 2.0);
    CHECK(err <= last_error + 1e-9);
    last_error = err;
  }
  CHECK(last_error < 1e-8);
}

TEST_CASE("truncation warning") {
  auto q = query([](double x, double y) { return x * y; }, 20, 20);
  q.half_width = 0.5;
  q.diagnostic_threshold = 1e-6;
  const auto r = g_expectation(q, SolverConfig{});
  CHECK(r.boundary_diagnostic > 1e-6);
  CHECK(r.warning.has_value());
}
