#pragma once

// G-expectations of terminal payoffs of a two-dimensional G-normal vector,
// read off the solution of the G-heat equation at a node.

#include <optional>
#include <string>
#include <vector>

#include "gheat/core.hpp"

namespace gheat::gexp {

struct GExpQuery {
  SpatialFunction payoff;
  UncertaintyBox box;
  double eval_time = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  /// Truncation half-width; default_half_width() when empty.
  std::optional<double> half_width;
  int cells = 80;
  int steps = 100;
  /// Dirichlet data on the truncated square; frozen payoff when empty.
  SpaceTimeFunction boundary;
  /// Dirichlet data for the negated payoff in upper_and_lower(). When empty:
  /// the negated `boundary` if one is given, the frozen -payoff otherwise.
  SpaceTimeFunction lower_boundary;
  /// boundary_diagnostic above this produces a warning.
  double diagnostic_threshold = 1e-3;
};

/// 4 sqrt(T max(s1_hi, s2_hi)) + max(|x0|, |y0|), enlarged when needed so that
/// (x0, y0) is a node of the M-cell grid. Throws std::invalid_argument when no
/// such width exists (incommensurable x0, y0); pass half_width explicitly then.
double default_half_width(const GExpQuery& query);

/// Grid of the query; throws std::invalid_argument if (x0, y0) is not a node.
Grid query_grid(const GExpQuery& query);

struct GExpResult {
  double value = 0.0;
  std::vector<IterationReport> reports;
  /// max |U^N - boundary(T)| over the ring of nodes next to the boundary;
  /// with the frozen payoff this is max |U^N - payoff| there.
  double boundary_diagnostic = 0.0;
  std::optional<std::string> warning;
};

/// Marches u_t = G(D^2 u), u(0) = payoff, and returns u(T, x0, y0).
GExpResult g_expectation(const GExpQuery& query, const SolverConfig& cfg);

struct Bounds {
  double upper = 0.0;
  double lower = 0.0;
  double boundary_diagnostic = 0.0;  // larger of the two runs
  GExpResult upper_run;
  GExpResult lower_run;
};

/// upper = E[payoff], lower = -E[-payoff].
Bounds upper_and_lower(const GExpQuery& query, const SolverConfig& cfg);

}  // namespace gheat::gexp
