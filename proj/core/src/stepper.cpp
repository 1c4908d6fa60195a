#include "gheat/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gheat::stepper {

namespace {

void set_boundary(LatticeLevel& level, const Grid& grid, double t, const SpaceTimeFunction& f) {
  const int m = grid.cells();
  for (int k = 0; k <= m; ++k) {
    level(0, k) = f(t, grid.x(0), grid.y(k));
    level(m, k) = f(t, grid.x(m), grid.y(k));
    level(k, 0) = f(t, grid.x(k), grid.y(0));
    level(k, m) = f(t, grid.x(k), grid.y(m));
  }
}

double boundary_max(const LatticeLevel& level, int m) {
  double worst = 0.0;
  for (int k = 0; k <= m; ++k) {
    worst = std::max({worst, std::abs(level(0, k)), std::abs(level(m, k)), std::abs(level(k, 0)),
                      std::abs(level(k, m))});
  }
  return worst;
}

}  // namespace

StepResult picard_step(const LatticeLevel& u_n, int next_step, const ProblemSpec& problem,
                       const Grid& grid, const SolverConfig& cfg) {
  if (u_n.nodes_per_axis() != grid.nodes_per_axis())
    throw std::invalid_argument("lattice level does not match the grid");
  if (next_step < 1 || next_step > grid.steps())
    throw std::invalid_argument("step index out of range");

  const double t_next = grid.t(next_step);
  const int cells = grid.cells();
  const int m = grid.interior_per_axis();

  LatticeLevel iterate = u_n;
  set_boundary(iterate, grid, t_next, problem.boundary);

  std::vector<double> forcing;
  if (problem.has_forcing()) {
    forcing.reserve(grid.interior_count());
    for (int i = 1; i < cells; ++i)
      for (int j = 1; j < cells; ++j) forcing.push_back(problem.forcing(t_next, grid.x(i), grid.y(j)));
  }

  std::vector<double> interior(grid.interior_count());
  for (int i = 1; i < cells; ++i)
    for (int j = 1; j < cells; ++j) interior[(i - 1) * m + (j - 1)] = iterate(i, j);

  IterationReport report;
  report.step = next_step;
  if (cfg.record_iterates) report.iterates.push_back(iterate);

  for (int k = 1; k <= cfg.k_max; ++k) {
    const auto coeffs = linsys::build_coefficients(iterate, grid, problem.box);
    const auto op = linsys::assemble(u_n, coeffs, grid, iterate, forcing);
    if (cfg.allow_non_diag_dominant)
      report.m_matrix_ok = report.m_matrix_ok && linsys::validate_m_matrix(op).is_m_matrix;
    auto sol = linsys::solve(op, cfg.tol_lin, interior);

    double increment = 0.0;
    double decrease = 0.0;
    for (int i = 1; i < cells; ++i) {
      for (int j = 1; j < cells; ++j) {
        const int r = (i - 1) * m + (j - 1);
        const double delta = sol.x[r] - iterate(i, j);
        increment = std::max(increment, std::abs(delta));
        decrease = std::min(decrease, delta);
        iterate(i, j) = sol.x[r];
      }
    }
    interior = std::move(sol.x);
    report.iterations = k;
    report.increments.push_back(increment);
    if (k >= 2) report.worst_decrease = std::min(report.worst_decrease, decrease);
    if (cfg.record_iterates) report.iterates.push_back(iterate);

    if (!std::isfinite(increment)) break;
    if (increment <= cfg.tol_picard) {
      if (cfg.record_coefficients) report.coefficients = coeffs.stats();
      return {std::move(iterate), std::move(report)};
    }
  }
  const double last = report.increments.empty() ? 0.0 : report.increments.back();
  throw IterationCapError("inner iteration did not converge at step " +
                              std::to_string(next_step) + " (last increment " +
                              std::to_string(last) + ")",
                          std::move(report), std::move(iterate));
}

namespace {

MarchSummary march_impl(const ProblemSpec& problem, const Grid& grid, const SolverConfig& cfg,
                        const LevelObserver& observer, SolutionLattice* store) {
  cfg.validate();
  problem.box.check_ordering();
  MarchSummary summary;
  summary.diag_dom_ok = validate_box(problem.box).diag_dom_ok;
  if (!summary.diag_dom_ok && !cfg.allow_non_diag_dominant) {
    throw AssumptionError(
        "uncertainty box is not diagonally dominant (every corner needs "
        "sigma_i^2 >= |b12|); pass the override flag to march anyway");
  }
  summary.compatibility = compatibility_mismatch(problem, grid);

  LatticeLevel level = sample(grid, problem.initial);
  summary.data_bound = level.max_abs();
  summary.solution_max = summary.data_bound;
  if (observer) observer(0, level, nullptr);
  if (store) store->levels.push_back(level);

  for (int n = 1; n <= grid.steps(); ++n) {
    StepResult step;
    try {
      step = picard_step(level, n, problem, grid, cfg);
    } catch (const IterationCapError& e) {
      std::shared_ptr<const SolutionLattice> partial;
      if (store) {
        store->reports = summary.reports;
        store->reports.push_back(e.report());
        partial = std::make_shared<const SolutionLattice>(*store);
      }
      throw MarchError(std::string("step ") + std::to_string(n) + ": " + e.what(), n, true,
                       partial);
    } catch (const linsys::LinearSolveError& e) {
      std::shared_ptr<const SolutionLattice> partial;
      if (store) partial = std::make_shared<const SolutionLattice>(*store);
      throw MarchError(std::string("step ") + std::to_string(n) + ": " + e.what(), n, false,
                       partial);
    }
    level = std::move(step.next);
    summary.data_bound = std::max(summary.data_bound, boundary_max(level, grid.cells()));
    summary.solution_max = std::max(summary.solution_max, level.max_abs());
    if (observer) observer(n, level, &step.report);
    if (store) store->levels.push_back(level);
    summary.reports.push_back(std::move(step.report));
  }

  if (!problem.has_forcing() && summary.diag_dom_ok &&
      summary.solution_max > summary.data_bound + stability_slack(grid.steps(), cfg.tol_lin)) {
    throw Error("stability bound violated: max |U| = " + std::to_string(summary.solution_max) +
                " exceeds data bound " + std::to_string(summary.data_bound));
  }
  return summary;
}

}  // namespace

MarchSummary march_streaming(const ProblemSpec& problem, const Grid& grid,
                             const SolverConfig& cfg, const LevelObserver& observer) {
  return march_impl(problem, grid, cfg, observer, nullptr);
}

SolutionLattice march(const ProblemSpec& problem, const Grid& grid, const SolverConfig& cfg) {
  SolutionLattice lattice(grid);
  lattice.levels.reserve(static_cast<std::size_t>(grid.steps()) + 1);
  auto summary = march_impl(problem, grid, cfg, nullptr, &lattice);
  lattice.reports = std::move(summary.reports);
  lattice.compatibility = summary.compatibility;
  lattice.diag_dom_ok = summary.diag_dom_ok;
  return lattice;
}

bool verify_monotone_iteration(const IterationReport& report, double tol_lin) {
  if (report.iterates.empty())
    throw std::invalid_argument("report has no recorded iterates");
  const double slack = 10.0 * tol_lin;
  // iterates[k] is U^{n+1,k}; monotone growth is claimed from k = 1 on.
  for (std::size_t k = 1; k + 1 < report.iterates.size(); ++k) {
    const auto& a = report.iterates[k].values();
    const auto& b = report.iterates[k + 1].values();
    for (std::size_t p = 0; p < a.size(); ++p)
      if (b[p] < a[p] - slack) return false;
  }
  return true;
}

ComparisonResult verify_comparison(const ProblemSpec& upper, const ProblemSpec& lower,
                                   const Grid& grid, const SolverConfig& cfg) {
  if (!(upper.box == lower.box)) throw std::invalid_argument("problems use different boxes");
  for (int i = 0; i <= grid.cells(); ++i) {
    for (int j = 0; j <= grid.cells(); ++j) {
      const double x = grid.x(i);
      const double y = grid.y(j);
      if (upper.initial(x, y) < lower.initial(x, y))
        throw std::invalid_argument("initial data are not ordered");
      if (!grid.is_boundary(i, j)) continue;
      for (int n = 1; n <= grid.steps(); ++n) {
        const double t = grid.t(n);
        if (upper.boundary(t, x, y) < lower.boundary(t, x, y))
          throw std::invalid_argument("boundary data are not ordered");
      }
    }
  }

  const auto u = march(upper, grid, cfg);
  const auto v = march(lower, grid, cfg);
  ComparisonResult r;
  r.min_difference = std::numeric_limits<double>::infinity();
  r.max_difference = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < u.levels.size(); ++n) {
    const auto a = u.levels[n].values();
    const auto b = v.levels[n].values();
    for (std::size_t p = 0; p < a.size(); ++p) {
      const double d = a[p] - b[p];
      r.min_difference = std::min(r.min_difference, d);
      r.max_difference = std::max(r.max_difference, d);
    }
  }
  r.ordered = r.min_difference >= -10.0 * cfg.tol_picard;
  return r;
}

}  // namespace gheat::stepper
