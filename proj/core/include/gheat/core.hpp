#pragma once

// Domain types shared by the G-heat solver: uncertainty sets, grids, problem
// data, lattice storage and solver configuration.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gheat {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when the coefficient box does not satisfy the diagonal dominance
/// condition and the caller did not opt out of the check.
class AssumptionError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Uncertainty set
// ---------------------------------------------------------------------------

/// Interval bounds on the variances of both coordinates and their covariance.
struct UncertaintyBox {
  double sigma1_sq_lo = 0.0;
  double sigma1_sq_hi = 0.0;
  double sigma2_sq_lo = 0.0;
  double sigma2_sq_hi = 0.0;
  double b12_lo = 0.0;
  double b12_hi = 0.0;

  /// Builds a box from volatility (standard deviation) intervals.
  static UncertaintyBox from_volatilities(double sigma1_lo, double sigma1_hi,
                                          double sigma2_lo, double sigma2_hi,
                                          double b12_lo, double b12_hi);

  /// Throws std::invalid_argument when an interval is reversed or a variance
  /// bound is negative.
  void check_ordering() const;

  double max_abs_b12() const;

  friend bool operator==(const UncertaintyBox&, const UncertaintyBox&) = default;
};

struct CornerMatrix {
  double sigma1_sq;
  double sigma2_sq;
  double b12;
  bool psd;
  bool diag_dominant;
};

struct BoxDiagnostics {
  bool psd_ok = false;
  bool diag_dom_ok = false;
  std::array<CornerMatrix, 8> corners{};
};

/// Checks positive semidefiniteness and diagonal dominance of all eight
/// corner covariance matrices. Pure diagnostic.
BoxDiagnostics validate_box(const UncertaintyBox& box);

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// Uniform lattice on [-L, L]^2 x [0, T]. Coordinates are computed from the
/// index, never accumulated.
class Grid {
public:
  Grid(double half_width, int cells_per_axis, double horizon, int steps);

  double half_width() const { return half_width_; }
  int cells() const { return cells_; }
  double horizon() const { return horizon_; }
  int steps() const { return steps_; }

  double h() const { return h_; }
  double dt() const { return dt_; }

  /// Nodes per axis, M + 1.
  int nodes_per_axis() const { return cells_ + 1; }
  std::size_t node_count() const {
    return static_cast<std::size_t>(nodes_per_axis()) * nodes_per_axis();
  }
  /// Interior unknowns per axis, M - 1.
  int interior_per_axis() const { return cells_ - 1; }
  std::size_t interior_count() const {
    return static_cast<std::size_t>(interior_per_axis()) * interior_per_axis();
  }

  double x(int i) const;
  double y(int j) const { return x(j); }
  double t(int n) const;

  bool is_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == cells_ || j == cells_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  double half_width_;
  int cells_;
  double horizon_;
  int steps_;
  double h_;
  double dt_;
};

/// Validating factory. Rejects odd or too small M and nonpositive sizes with
/// std::invalid_argument.
Grid make_grid(double half_width, int cells_per_axis, double horizon, int steps);

// ---------------------------------------------------------------------------
// Lattice storage
// ---------------------------------------------------------------------------

/// Nodal values of one time level, indexed (i, j) with i along x.
class LatticeLevel {
public:
  LatticeLevel() = default;
  explicit LatticeLevel(int nodes_per_axis, double fill = 0.0)
      : n_(nodes_per_axis),
        values_(static_cast<std::size_t>(nodes_per_axis) * nodes_per_axis, fill) {}

  int nodes_per_axis() const { return n_; }

  double& operator()(int i, int j) { return values_[index(i, j)]; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j);
  }

  double max_abs() const;

  friend bool operator==(const LatticeLevel&, const LatticeLevel&) = default;

private:
  int n_ = 0;
  std::vector<double> values_;
};

using SpatialFunction = std::function<double(double x, double y)>;
using SpaceTimeFunction = std::function<double(double t, double x, double y)>;

/// Samples f on every node of the grid.
LatticeLevel sample(const Grid& grid, const SpatialFunction& f);
LatticeLevel sample(const Grid& grid, double t, const SpaceTimeFunction& f);

// ---------------------------------------------------------------------------
// Problem and configuration
// ---------------------------------------------------------------------------

struct ProblemSpec {
  SpatialFunction initial;
  SpaceTimeFunction boundary;
  SpaceTimeFunction forcing;  // empty means zero forcing
  UncertaintyBox box;

  bool has_forcing() const { return static_cast<bool>(forcing); }
};

/// max |initial(x,y) - boundary(0,x,y)| over the boundary nodes.
double compatibility_mismatch(const ProblemSpec& problem, const Grid& grid);

struct SolverConfig {
  double tol_picard = 1e-9;   // absolute sup-norm increment
  int k_max = 50;
  double tol_lin = 1e-12;     // relative to max(1, |rhs|_inf)
  bool record_coefficients = false;
  bool record_iterates = false;
  bool allow_non_diag_dominant = false;

  /// Throws std::invalid_argument unless tol_lin <= tol_picard / 100 and
  /// k_max >= 1.
  void validate() const;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Fractions of interior nodes selecting the upper bound of each coefficient,
/// domain averages of the selected values, and the selection at the grid
/// center.
struct CoefficientStats {
  double frac_sigma1_hi = 0.0;
  double frac_sigma2_hi = 0.0;
  double frac_b12_hi = 0.0;
  double mean_sigma1_sq = 0.0;
  double mean_sigma2_sq = 0.0;
  double mean_b12 = 0.0;
  double center_sigma1_sq = 0.0;
  double center_sigma2_sq = 0.0;
  double center_b12 = 0.0;
};

/// Inner-iteration record for one time step.
struct IterationReport {
  int step = 0;                    // time level produced, n + 1
  int iterations = 0;              // linear solves performed
  std::vector<double> increments;  // |U^{k+1} - U^k|_inf per solve
  /// Most negative nodal change U^{k+1} - U^k over solves k >= 1 (i.e.
  /// excluding the first solve). Zero when fewer than two solves ran.
  double worst_decrease = 0.0;
  bool m_matrix_ok = true;
  std::optional<CoefficientStats> coefficients;
  /// Interior iterates U^{n+1,0}, U^{n+1,1}, ... when record_iterates is set.
  std::vector<LatticeLevel> iterates;
};

/// Nodal values for all time levels plus per-step reports.
struct SolutionLattice {
  Grid grid;
  std::vector<LatticeLevel> levels;      // N + 1 levels
  std::vector<IterationReport> reports;  // N reports, reports[n-1] produced level n
  double compatibility = 0.0;
  bool diag_dom_ok = true;

  explicit SolutionLattice(const Grid& g) : grid(g) {}

  double max_abs() const;
};

}  // namespace gheat
