#pragma once

// Picard inner iteration per time step and the implicit time march.

#include <functional>
#include <memory>

#include "gheat/core.hpp"
#include "gheat/linsys.hpp"

namespace gheat::stepper {

/// The inner iteration hit k_max with the last increment above tol_picard.
class IterationCapError : public Error {
public:
  IterationCapError(const std::string& what, IterationReport report, LatticeLevel last)
      : Error(what), report_(std::move(report)), last_(std::move(last)) {}
  const IterationReport& report() const { return report_; }
  const LatticeLevel& last_iterate() const { return last_; }

private:
  IterationReport report_;
  LatticeLevel last_;
};

/// A time step of a march failed; carries the step index, whether the cause
/// was the iteration cap, and the levels completed so far.
class MarchError : public Error {
public:
  MarchError(const std::string& what, int step, bool iteration_cap,
             std::shared_ptr<const SolutionLattice> partial)
      : Error(what), step_(step), iteration_cap_(iteration_cap), partial_(std::move(partial)) {}
  int step() const { return step_; }
  bool iteration_cap() const { return iteration_cap_; }
  /// Null when the march ran in streaming mode.
  const std::shared_ptr<const SolutionLattice>& partial() const { return partial_; }

private:
  int step_;
  bool iteration_cap_;
  std::shared_ptr<const SolutionLattice> partial_;
};

struct StepResult {
  LatticeLevel next;
  IterationReport report;
};

/// Advances `u_n` (level `next_step - 1`) to level `next_step` by Picard
/// iteration starting from U^{n+1,0} = U^n with the new boundary values.
StepResult picard_step(const LatticeLevel& u_n, int next_step, const ProblemSpec& problem,
                       const Grid& grid, const SolverConfig& cfg);

/// Summary of a march; stability fields are meaningful for zero forcing.
struct MarchSummary {
  std::vector<IterationReport> reports;
  double compatibility = 0.0;
  bool diag_dom_ok = true;
  double data_bound = 0.0;   // max(|phi|_inf, max_n |boundary^n|_inf on the boundary)
  double solution_max = 0.0; // max_n |U^n|_inf
};

/// Called with each completed level n (0..N). The report is null for n = 0.
using LevelObserver = std::function<void(int n, const LatticeLevel&, const IterationReport*)>;

/// Marches without storing levels. Throws AssumptionError when the box is not
/// diagonally dominant and the config does not allow it; MarchError when a
/// step fails; Error when a zero-forcing march breaks the stability bound.
MarchSummary march_streaming(const ProblemSpec& problem, const Grid& grid,
                             const SolverConfig& cfg, const LevelObserver& observer);

/// Marches and stores every level.
SolutionLattice march(const ProblemSpec& problem, const Grid& grid, const SolverConfig& cfg);

/// Slack allowed on top of the data bound for N steps of inexact solves.
inline double stability_slack(int steps, double tol_lin) { return steps * 10.0 * tol_lin; }

/// True iff every recorded iterate after the first solve does not decrease by
/// more than 10 tol_lin anywhere. Requires iterates recorded in the report.
bool verify_monotone_iteration(const IterationReport& report, double tol_lin);

struct ComparisonResult {
  bool ordered = false;
  double min_difference = 0.0;  // min over nodes and levels of U - V
  double max_difference = 0.0;
};

/// Marches both problems and checks U >= V - 10 tol_picard everywhere.
/// Rejects (std::invalid_argument) data that are not ordered on the grid or
/// boxes that differ.
ComparisonResult verify_comparison(const ProblemSpec& upper, const ProblemSpec& lower,
                                   const Grid& grid, const SolverConfig& cfg);

}  // namespace gheat::stepper
