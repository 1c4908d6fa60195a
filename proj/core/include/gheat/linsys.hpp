#pragma once

// Linearized implicit operator for one Picard iteration:
//   A = I/dt - (sigma1^2/2) d_xx - (sigma2^2/2) d_yy - b12 d^alpha_xy
// over the (M-1)^2 interior unknowns, ordered row-major in (i, j).

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gheat/core.hpp"
#include "gheat/stencils.hpp"

namespace gheat::linsys {

struct NodeCoefficients {
  double sigma1_sq = 0.0;
  double sigma2_sq = 0.0;
  stencils::CrossChoice cross;
};

/// Selected coefficients for every interior node.
class CoefficientField {
public:
  CoefficientField(const Grid& grid, const UncertaintyBox& box);

  const UncertaintyBox& box() const { return box_; }
  int interior_per_axis() const { return m_; }

  NodeCoefficients& at(int i, int j) { return nodes_[offset(i, j)]; }
  const NodeCoefficients& at(int i, int j) const { return nodes_[offset(i, j)]; }

  std::span<const NodeCoefficients> nodes() const { return nodes_; }

  CoefficientStats stats() const;

private:
  std::size_t offset(int i, int j) const {
    return static_cast<std::size_t>(i - 1) * m_ + static_cast<std::size_t>(j - 1);
  }

  UncertaintyBox box_;
  int m_;
  std::vector<NodeCoefficients> nodes_;
};

/// Applies the sign rules to the differences of `u` at one interior node.
NodeCoefficients select_node_coefficients(const LatticeLevel& u, int i, int j, double h,
                                          const UncertaintyBox& box);

CoefficientField build_coefficients(const LatticeLevel& u, const Grid& grid,
                                    const UncertaintyBox& box);

/// Nine-point weights of one row, w[di+1][dj+1] multiplies U(i+di, j+dj).
struct Stencil9 {
  std::array<std::array<double, 3>, 3> w{};

  double center() const { return w[1][1]; }
  double sum() const;
};

/// Weights of (1/dt)U - (s1/2) d_xx U - (s2/2) d_yy U - b12 d^alpha_xy U.
Stencil9 node_stencil(const NodeCoefficients& c, double h, double dt);

/// Scheme residual g(i,j) = (U^{n+1} - U^n)/dt - sup(...) - f at an interior
/// node, with coefficients selected from `next` itself. Shares node_stencil
/// with assembly.
double discrete_residual(const LatticeLevel& next, const LatticeLevel& prev, int i, int j,
                         const Grid& grid, const UncertaintyBox& box, double forcing = 0.0);

/// Row-compressed interior operator plus right-hand side.
struct SparseOperator {
  int unknowns = 0;
  double dt = 0.0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> vals;
  std::vector<double> rhs;
  /// Per row: sum and maximum of the weights that multiplied known boundary
  /// values and were moved to the right-hand side.
  std::vector<double> boundary_weight_sum;
  std::vector<double> boundary_weight_max;

  /// Dense copy, for small diagnostic systems only.
  std::vector<std::vector<double>> to_dense() const;
  void multiply(std::span<const double> x, std::span<double> y) const;
  double residual_inf(std::span<const double> x) const;
};

/// Assembles the implicit step from `u_prev` using boundary values taken from
/// the boundary nodes of `next_boundary` and interior forcing samples
/// (row-major interior order; empty means zero). Throws std::invalid_argument
/// if a coefficient is not one of the box bounds.
SparseOperator assemble(const LatticeLevel& u_prev, const CoefficientField& coeffs,
                        const Grid& grid, const LatticeLevel& next_boundary,
                        std::span<const double> forcing_next = {});

/// Convenience overload sampling boundary and forcing at t_next.
SparseOperator assemble(const LatticeLevel& u_prev, const CoefficientField& coeffs,
                        const Grid& grid, double t_next, const SpaceTimeFunction& boundary,
                        const SpaceTimeFunction& forcing);

struct MMatrixDiagnostics {
  bool is_m_matrix = false;
  int worst_row = -1;  // row with the smallest dominance margin
  double min_diag = 0.0;
  double max_offdiag = 0.0;  // includes eliminated boundary weights
  double min_margin = 0.0;   // min over rows of a_ii - sum_{j != i} |a_ij|
};

MMatrixDiagnostics validate_m_matrix(const SparseOperator& op);

class LinearSolveError : public Error {
public:
  LinearSolveError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

struct SolveResult {
  std::vector<double> x;
  double residual = 0.0;  // |A x - rhs|_inf
  int iterations = 0;
};

/// Solves op to |A x - rhs|_inf <= tol_lin * max(1, |rhs|_inf). `guess`, when
/// non-empty, seeds the iteration. Throws LinearSolveError on failure.
SolveResult solve(const SparseOperator& op, double tol_lin, std::span<const double> guess = {});

/// Matrix Market coordinate dump (1-based).
void write_matrix_market(const SparseOperator& op, std::ostream& out);

}  // namespace gheat::linsys
