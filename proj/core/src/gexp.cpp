#include "gheat/gexp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gheat/stepper.hpp"

namespace gheat::gexp {

namespace {

bool is_integer(double v) { return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v)); }

int node_index(double coordinate, const Grid& grid) {
  const double q = (coordinate + grid.half_width()) / grid.h();
  if (!is_integer(q) || q < 0.5 || q > grid.cells() - 0.5)
    throw std::invalid_argument("evaluation point coordinate " + std::to_string(coordinate) +
                                " is not an interior node of the grid");
  return static_cast<int>(std::round(q));
}

}  // namespace

double default_half_width(const GExpQuery& query) {
  if (query.eval_time <= 0.0) throw std::invalid_argument("evaluation time must be positive");
  if (query.cells < 2 || query.cells % 2 != 0)
    throw std::invalid_argument("cells per axis must be even and at least 2");
  const double spread = std::sqrt(query.eval_time * std::max(query.box.sigma1_sq_hi, query.box.sigma2_sq_hi));
  const double minimum = 4.0 * spread + std::max(std::abs(query.x0), std::abs(query.y0));
  if (query.x0 == 0.0 && query.y0 == 0.0) return minimum;

  // With M even, (x0, y0) is a node iff x0 M / (2L) and y0 M / (2L) are
  // integers, so L = |x0| M / (2k) for some integer k.
  const double a = std::abs(query.x0 != 0.0 ? query.x0 : query.y0) * query.cells / 2.0;
  const double b = std::abs(query.x0 != 0.0 ? query.y0 : query.x0) * query.cells / 2.0;
  for (long k = static_cast<long>(std::floor(a / minimum)); k >= 1; --k) {
    const double width = a / static_cast<double>(k);
    if (width >= minimum * (1.0 - 1e-12) && is_integer(b / width)) return width;
  }
  throw std::invalid_argument(
      "no half-width places the evaluation point on a node; set the half-width explicitly");
}

Grid query_grid(const GExpQuery& query) {
  const double width = query.half_width ? *query.half_width : default_half_width(query);
  Grid grid = make_grid(width, query.cells, query.eval_time, query.steps);
  node_index(query.x0, grid);
  node_index(query.y0, grid);
  return grid;
}

GExpResult g_expectation(const GExpQuery& query, const SolverConfig& cfg) {
  if (!query.payoff) throw std::invalid_argument("query has no payoff");
  const Grid grid = query_grid(query);
  const int i0 = node_index(query.x0, grid);
  const int j0 = node_index(query.y0, grid);

  ProblemSpec problem;
  problem.box = query.box;
  problem.initial = query.payoff;
  if (query.boundary) {
    problem.boundary = query.boundary;
  } else {
    problem.boundary = [payoff = query.payoff](double, double x, double y) { return payoff(x, y); };
  }

  LatticeLevel last;
  auto summary = stepper::march_streaming(
      problem, grid, cfg, [&](int n, const LatticeLevel& level, const IterationReport*) {
        if (n == grid.steps()) last = level;
      });

  GExpResult result;
  result.value = last(i0, j0);
  result.reports = std::move(summary.reports);
  const int m = grid.cells();
  for (int k = 1; k < m; ++k) {
    for (auto [i, j] : {std::pair{1, k}, std::pair{m - 1, k}, std::pair{k, 1}, std::pair{k, m - 1}}) {
      const double data = problem.boundary(grid.horizon(), grid.x(i), grid.y(j));
      result.boundary_diagnostic = std::max(result.boundary_diagnostic, std::abs(last(i, j) - data));
    }
  }
  if (result.boundary_diagnostic > query.diagnostic_threshold) {
    result.warning = "boundary diagnostic " + std::to_string(result.boundary_diagnostic) +
                     " exceeds " + std::to_string(query.diagnostic_threshold) +
                     "; the truncated domain may be too small";
  }
  return result;
}

Bounds upper_and_lower(const GExpQuery& query, const SolverConfig& cfg) {
  if (!query.payoff) throw std::invalid_argument("query has no payoff");
  GExpQuery negated = query;
  negated.payoff = [payoff = query.payoff](double x, double y) { return -payoff(x, y); };
  if (query.lower_boundary) {
    negated.boundary = query.lower_boundary;
  } else if (query.boundary) {
    negated.boundary = [boundary = query.boundary](double t, double x, double y) {
      return -boundary(t, x, y);
    };
  } else {
    negated.boundary = nullptr;
  }

  Bounds bounds;
  bounds.upper_run = g_expectation(query, cfg);
  bounds.lower_run = g_expectation(negated, cfg);
  bounds.upper = bounds.upper_run.value;
  bounds.lower = -bounds.lower_run.value;
  bounds.boundary_diagnostic =
      std::max(bounds.upper_run.boundary_diagnostic, bounds.lower_run.boundary_diagnostic);
  return bounds;
}

}  // namespace gheat::gexp
