#pragma once

// Numerical experiments: the manufactured-solution and reference-solution
// test problems, error norms, convergence studies and per-step series.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gheat/core.hpp"
#include "gheat/stepper.hpp"

namespace gheat::bench {

/// sigma1 in [0.2, 0.3], sigma2 in [0.25, 0.35], b12 in [-0.04, 0.03].
UncertaintyBox example_box();

/// Forcing that makes sin(5(x+y+t)) an exact solution: with w = 5(x+y+t),
/// f = 5 cos w + 25 min over the box of (s1/2 + s2/2 + b12) sin w, evaluated
/// in closed form at the minimizing corner.
double example1_forcing(const UncertaintyBox& box, double t, double x, double y);

struct ManufacturedProblem {
  ProblemSpec problem;
  SpaceTimeFunction exact;
};

/// u = sin(5(x+y+t)) on [-1,1]^2 with matching forcing and boundary data.
ManufacturedProblem example1_problem();

/// Same data as example 1 without forcing; no closed-form solution.
ProblemSpec example2_problem();

// ---------------------------------------------------------------------------
// Error norms
// ---------------------------------------------------------------------------

struct ErrorNorms {
  double linf = 0.0;  // max over n = 1..N and all nodes
  /// sqrt(dt * sum_n w_n * h^2 * sum_ij e^2) with trapezoid weights in time
  /// (w_N = 1/2; the n = 0 term vanishes).
  double l2 = 0.0;
  /// sqrt(sum_{n>=1} sum_ij e^2 / (N (M+1)^2)).
  double rms = 0.0;
};

/// Streams levels of a march into the norms above.
class ErrorAccumulator {
public:
  explicit ErrorAccumulator(const Grid& grid) : grid_(grid) {}

  /// Level 0 is ignored.
  void add_level(int n, const LatticeLevel& level, const SpaceTimeFunction& exact);
  ErrorNorms result() const;

private:
  Grid grid_;
  double linf_ = 0.0;
  double weighted_sq_ = 0.0;
  double plain_sq_ = 0.0;
  int levels_seen_ = 0;
};

ErrorNorms error_norms(const SolutionLattice& numeric, const SpaceTimeFunction& exact);

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

struct ConvergenceLevel {
  int cells = 0;
  int steps = 0;
  friend bool operator==(const ConvergenceLevel&, const ConvergenceLevel&) = default;
};

/// The paired refinement h -> h/2, dt -> dt/4 used by the tables.
std::vector<ConvergenceLevel> table_levels();

struct ConvergenceRow {
  int steps = 0;
  int nodes = 0;  // (M+1)^2
  double linf_error = 0.0;
  std::optional<double> linf_order;
  double l2_error = 0.0;
  std::optional<double> l2_order;
  double rms_error = 0.0;
};

struct LevelRun {
  ConvergenceLevel level;
  ConvergenceRow row;
  std::vector<IterationReport> reports;
};

/// Marches every level on [-L,L]^2 x [0,T] and compares against `exact` at
/// all nodes. Levels may run concurrently (`jobs`); rows are sorted by
/// refinement and orders are log2 of successive error ratios. March errors
/// are rethrown as stepper::MarchError annotated with the level.
std::vector<LevelRun> convergence_study(const ProblemSpec& problem,
                                        const SpaceTimeFunction& exact,
                                        std::span<const ConvergenceLevel> levels,
                                        const SolverConfig& cfg, double half_width = 1.0,
                                        double horizon = 1.0, int jobs = 1);

// ---------------------------------------------------------------------------
// Reference solutions
// ---------------------------------------------------------------------------

/// Index k with origin + k * spacing == coordinate (to 1e-9 relative to the
/// spacing). Throws std::domain_error when the coordinate is not a node.
int nested_index(double coordinate, double origin, double spacing);

/// Fine-grid solution restricted to a nested storage lattice: every
/// `space_stride`-th node and every `time_stride`-th level.
class ReferenceSolution {
public:
  ReferenceSolution(const Grid& fine, const Grid& stored);

  /// Marches `problem` on `fine` and keeps the levels and nodes of `stored`.
  /// Throws std::invalid_argument when `stored` does not nest in `fine`.
  static ReferenceSolution compute(const ProblemSpec& problem, const Grid& fine,
                                   const Grid& stored, const SolverConfig& cfg);

  const Grid& fine_grid() const { return fine_; }
  const Grid& stored_grid() const { return stored_; }

  /// Fine-grid node index of a spatial coordinate / step index of a time.
  int fine_node(double coordinate) const;
  int fine_step(double t) const;

  /// Stored value at (t, x, y); throws std::domain_error if the point is not
  /// on the storage lattice.
  double value(double t, double x, double y) const;
  SpaceTimeFunction evaluator() const;

  /// Fails with std::invalid_argument unless `coarse` nests in the storage
  /// lattice.
  void check_nested(const Grid& coarse) const;

  std::vector<LatticeLevel>& levels() { return levels_; }
  const std::vector<LatticeLevel>& levels() const { return levels_; }
  /// Inner iteration counts and worst iterate decreases of the fine march.
  std::vector<int>& iterations() { return iterations_; }
  const std::vector<int>& iterations() const { return iterations_; }
  std::vector<double>& worst_decrease() { return worst_decrease_; }
  const std::vector<double>& worst_decrease() const { return worst_decrease_; }

  void save(const std::filesystem::path& path, std::uint64_t hash) const;
  /// Empty when the file is missing, malformed, or carries another hash.
  static std::optional<ReferenceSolution> load(const std::filesystem::path& path,
                                               std::uint64_t expected_hash);

  friend bool operator==(const ReferenceSolution&, const ReferenceSolution&) = default;

private:
  Grid fine_;
  Grid stored_;
  int space_stride_;
  int time_stride_;
  std::vector<LatticeLevel> levels_;
  std::vector<int> iterations_;
  std::vector<double> worst_decrease_;
};

/// 64-bit FNV-1a hash of a canonical description.
std::uint64_t content_hash(std::string_view text);

/// Canonical text of everything that determines a reference lattice.
std::string reference_description(std::string_view problem_name, const UncertaintyBox& box,
                                  const Grid& fine, const Grid& stored, const SolverConfig& cfg);

/// Loads the cached reference for this description from `cache_dir`, or
/// computes and stores it.
ReferenceSolution cached_reference(std::string_view problem_name, const ProblemSpec& problem,
                                   const Grid& fine, const Grid& stored, const SolverConfig& cfg,
                                   const std::filesystem::path& cache_dir);

// ---------------------------------------------------------------------------
// Series and CSV
// ---------------------------------------------------------------------------

struct SeriesRow {
  int step = 0;
  double time = 0.0;
  int iterations = 0;
  CoefficientStats stats;
};

/// Requires reports carrying coefficient statistics.
std::vector<SeriesRow> iteration_series(const Grid& grid,
                                        std::span<const IterationReport> reports);
std::vector<SeriesRow> iteration_series(const SolutionLattice& solution);

/// RFC 4180 CSV with CRLF records and scientific numbers.
void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows);
void write_series_csv(std::ostream& out, std::span<const SeriesRow> rows);
void write_slice_csv(std::ostream& out, const Grid& grid, int n, const LatticeLevel& level);

/// Scientific notation with 10 digits after the point.
std::string format_real(double v);

}  // namespace gheat::bench
