#include "gheat/linsys.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace gheat::linsys {

using stencils::Orientation;

CoefficientField::CoefficientField(const Grid& grid, const UncertaintyBox& box)
    : box_(box), m_(grid.interior_per_axis()), nodes_(grid.interior_count()) {}

CoefficientStats CoefficientField::stats() const {
  CoefficientStats s;
  if (nodes_.empty()) return s;
  for (const auto& c : nodes_) {
    s.frac_sigma1_hi += c.sigma1_sq == box_.sigma1_sq_hi ? 1.0 : 0.0;
    s.frac_sigma2_hi += c.sigma2_sq == box_.sigma2_sq_hi ? 1.0 : 0.0;
    s.frac_b12_hi += c.cross.orientation == Orientation::plus ? 1.0 : 0.0;
    s.mean_sigma1_sq += c.sigma1_sq;
    s.mean_sigma2_sq += c.sigma2_sq;
    s.mean_b12 += c.cross.b12;
  }
  const double n = static_cast<double>(nodes_.size());
  s.frac_sigma1_hi /= n;
  s.frac_sigma2_hi /= n;
  s.frac_b12_hi /= n;
  s.mean_sigma1_sq /= n;
  s.mean_sigma2_sq /= n;
  s.mean_b12 /= n;
  const int mid = (m_ + 1) / 2;
  const auto& c = at(mid, mid);
  s.center_sigma1_sq = c.sigma1_sq;
  s.center_sigma2_sq = c.sigma2_sq;
  s.center_b12 = c.cross.b12;
  return s;
}

NodeCoefficients select_node_coefficients(const LatticeLevel& u, int i, int j, double h,
                                          const UncertaintyBox& box) {
  NodeCoefficients c;
  c.sigma1_sq = stencils::select_sigma_sq(stencils::second_diff_x(u, i, j, h), box.sigma1_sq_lo,
                                          box.sigma1_sq_hi);
  c.sigma2_sq = stencils::select_sigma_sq(stencils::second_diff_y(u, i, j, h), box.sigma2_sq_lo,
                                          box.sigma2_sq_hi);
  c.cross = stencils::select_cross(stencils::cross_diff_plus(u, i, j, h),
                                   stencils::cross_diff_minus(u, i, j, h), box);
  return c;
}

CoefficientField build_coefficients(const LatticeLevel& u, const Grid& grid,
                                    const UncertaintyBox& box) {
  if (u.nodes_per_axis() != grid.nodes_per_axis())
    throw std::invalid_argument("lattice level does not match the grid");
  CoefficientField field(grid, box);
  const double h = grid.h();
  for (int i = 1; i < grid.cells(); ++i)
    for (int j = 1; j < grid.cells(); ++j) field.at(i, j) = select_node_coefficients(u, i, j, h, box);
  return field;
}

double Stencil9::sum() const {
  double s = 0.0;
  for (const auto& row : w)
    for (double v : row) s += v;
  return s;
}

Stencil9 node_stencil(const NodeCoefficients& c, double h, double dt) {
  const double h2 = h * h;
  const double b = c.cross.b12;
  Stencil9 s;
  // -(s1/2) d_xx and -(s2/2) d_yy
  s.w[1][1] = 1.0 / dt + (c.sigma1_sq + c.sigma2_sq) / h2;
  s.w[0][1] = s.w[2][1] = -c.sigma1_sq / (2.0 * h2);
  s.w[1][0] = s.w[1][2] = -c.sigma2_sq / (2.0 * h2);
  // -b d^+_xy: center -b/h^2, edges +b/2h^2, main diagonal -b/2h^2
  // -b d^-_xy: center +b/h^2, edges -b/2h^2, antidiagonal +b/2h^2
  const double sign = c.cross.orientation == Orientation::plus ? 1.0 : -1.0;
  const double half = sign * b / (2.0 * h2);
  s.w[1][1] -= 2.0 * half;
  s.w[0][1] += half;
  s.w[2][1] += half;
  s.w[1][0] += half;
  s.w[1][2] += half;
  if (c.cross.orientation == Orientation::plus) {
    s.w[2][2] = -half;
    s.w[0][0] = -half;
  } else {
    s.w[2][0] = -half;
    s.w[0][2] = -half;
  }
  return s;
}

double discrete_residual(const LatticeLevel& next, const LatticeLevel& prev, int i, int j,
                         const Grid& grid, const UncertaintyBox& box, double forcing) {
  const auto c = select_node_coefficients(next, i, j, grid.h(), box);
  const auto s = node_stencil(c, grid.h(), grid.dt());
  double g = 0.0;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) g += s.w[di + 1][dj + 1] * next(i + di, j + dj);
  return g - prev(i, j) / grid.dt() - forcing;
}

namespace {

bool is_bound(double v, double lo, double hi) { return v == lo || v == hi; }

void check_node(const NodeCoefficients& c, const UncertaintyBox& box, int i, int j) {
  const bool cross_ok =
      (c.cross.orientation == Orientation::plus && c.cross.b12 == box.b12_hi) ||
      (c.cross.orientation == Orientation::minus && c.cross.b12 == box.b12_lo);
  if (!is_bound(c.sigma1_sq, box.sigma1_sq_lo, box.sigma1_sq_hi) ||
      !is_bound(c.sigma2_sq, box.sigma2_sq_lo, box.sigma2_sq_hi) || !cross_ok) {
    throw std::invalid_argument("coefficient field at node (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") is not a corner of the box");
  }
}

}  // namespace

SparseOperator assemble(const LatticeLevel& u_prev, const CoefficientField& coeffs,
                        const Grid& grid, const LatticeLevel& next_boundary,
                        std::span<const double> forcing_next) {
  const int m = grid.interior_per_axis();
  const int cells = grid.cells();
  if (coeffs.interior_per_axis() != m)
    throw std::invalid_argument("coefficient field does not cover the interior");
  if (u_prev.nodes_per_axis() != grid.nodes_per_axis() ||
      next_boundary.nodes_per_axis() != grid.nodes_per_axis())
    throw std::invalid_argument("lattice level does not match the grid");
  if (!forcing_next.empty() && forcing_next.size() != grid.interior_count())
    throw std::invalid_argument("forcing samples do not cover the interior");

  SparseOperator op;
  op.unknowns = m * m;
  op.dt = grid.dt();
  op.row_ptr.reserve(op.unknowns + 1);
  op.cols.reserve(static_cast<std::size_t>(op.unknowns) * 7);
  op.vals.reserve(static_cast<std::size_t>(op.unknowns) * 7);
  op.rhs.resize(op.unknowns);
  op.boundary_weight_sum.assign(op.unknowns, 0.0);
  op.boundary_weight_max.assign(op.unknowns, -std::numeric_limits<double>::infinity());
  op.row_ptr.push_back(0);

  const auto& box = coeffs.box();
  for (int i = 1; i < cells; ++i) {
    for (int j = 1; j < cells; ++j) {
      const int row = (i - 1) * m + (j - 1);
      const auto& c = coeffs.at(i, j);
      check_node(c, box, i, j);
      const auto s = node_stencil(c, grid.h(), grid.dt());
      double rhs = u_prev(i, j) / grid.dt();
      if (!forcing_next.empty()) rhs += forcing_next[row];
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const bool corner = di != 0 && dj != 0;
          // Corners outside the selected orientation are structurally zero.
          if (corner) {
            const bool on_main = di == dj;
            const bool wanted = c.cross.orientation == Orientation::plus ? on_main : !on_main;
            if (!wanted) continue;
          }
          const double w = s.w[di + 1][dj + 1];
          const int ii = i + di;
          const int jj = j + dj;
          if (grid.is_boundary(ii, jj)) {
            rhs -= w * next_boundary(ii, jj);
            op.boundary_weight_sum[row] += w;
            op.boundary_weight_max[row] = std::max(op.boundary_weight_max[row], w);
          } else {
            op.cols.push_back((ii - 1) * m + (jj - 1));
            op.vals.push_back(w);
          }
        }
      }
      op.rhs[row] = rhs;
      op.row_ptr.push_back(static_cast<int>(op.cols.size()));
    }
  }
  return op;
}

SparseOperator assemble(const LatticeLevel& u_prev, const CoefficientField& coeffs,
                        const Grid& grid, double t_next, const SpaceTimeFunction& boundary,
                        const SpaceTimeFunction& forcing) {
  LatticeLevel next_boundary(grid.nodes_per_axis());
  for (int i = 0; i <= grid.cells(); ++i)
    for (int j = 0; j <= grid.cells(); ++j)
      if (grid.is_boundary(i, j)) next_boundary(i, j) = boundary(t_next, grid.x(i), grid.y(j));
  std::vector<double> f;
  if (forcing) {
    f.reserve(grid.interior_count());
    for (int i = 1; i < grid.cells(); ++i)
      for (int j = 1; j < grid.cells(); ++j) f.push_back(forcing(t_next, grid.x(i), grid.y(j)));
  }
  return assemble(u_prev, coeffs, grid, next_boundary, f);
}

std::vector<std::vector<double>> SparseOperator::to_dense() const {
  std::vector<std::vector<double>> a(unknowns, std::vector<double>(unknowns, 0.0));
  for (int r = 0; r < unknowns; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) a[r][cols[k]] += vals[k];
  return a;
}

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < unknowns; ++r) {
    double acc = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += vals[k] * x[cols[k]];
    y[r] = acc;
  }
}

double SparseOperator::residual_inf(std::span<const double> x) const {
  double worst = 0.0;
  for (int r = 0; r < unknowns; ++r) {
    double acc = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) acc += vals[k] * x[cols[k]];
    worst = std::max(worst, std::abs(acc - rhs[r]));
  }
  return worst;
}

MMatrixDiagnostics validate_m_matrix(const SparseOperator& op) {
  MMatrixDiagnostics d;
  d.is_m_matrix = true;
  d.min_diag = std::numeric_limits<double>::infinity();
  d.max_offdiag = -std::numeric_limits<double>::infinity();
  d.min_margin = std::numeric_limits<double>::infinity();
  for (int r = 0; r < op.unknowns; ++r) {
    double diag = 0.0;
    double off_abs = 0.0;
    for (int k = op.row_ptr[r]; k < op.row_ptr[r + 1]; ++k) {
      if (op.cols[k] == r) {
        diag += op.vals[k];
      } else {
        off_abs += std::abs(op.vals[k]);
        d.max_offdiag = std::max(d.max_offdiag, op.vals[k]);
      }
    }
    if (op.boundary_weight_max[r] > -std::numeric_limits<double>::infinity())
      d.max_offdiag = std::max(d.max_offdiag, op.boundary_weight_max[r]);
    d.min_diag = std::min(d.min_diag, diag);
    const double margin = diag - off_abs;
    if (margin < d.min_margin) {
      d.min_margin = margin;
      d.worst_row = r;
    }
  }
  if (op.unknowns == 0) {
    d.min_diag = d.max_offdiag = d.min_margin = 0.0;
    return d;
  }
  d.is_m_matrix = d.min_diag > 0.0 && d.max_offdiag <= 0.0 && d.min_margin > 0.0;
  return d;
}

SolveResult solve(const SparseOperator& op, double tol_lin, std::span<const double> guess) {
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
  const int n = op.unknowns;
  SolveResult result;
  if (n == 0) return result;

  Eigen::Map<const Matrix> a(n, n, static_cast<Eigen::Index>(op.vals.size()), op.row_ptr.data(),
                             op.cols.data(), op.vals.data());
  Eigen::Map<const Eigen::VectorXd> b(op.rhs.data(), n);
  const double bound = tol_lin * std::max(1.0, b.lpNorm<Eigen::Infinity>());

  Eigen::VectorXd x(n);
  if (!guess.empty() && static_cast<int>(guess.size()) == n)
    x = Eigen::Map<const Eigen::VectorXd>(guess.data(), n);
  else
    x = b * op.dt;

  auto residual_of = [&](const Eigen::VectorXd& v) { return (a * v - b).lpNorm<Eigen::Infinity>(); };

  double residual = residual_of(x);
  Eigen::BiCGSTAB<Matrix, Eigen::DiagonalPreconditioner<double>> solver;
  solver.compute(a);
  // The residual contract is in the sup norm, Eigen's criterion is relative
  // in the 2-norm; tighten until the contract holds.
  double rel = tol_lin;
  for (int attempt = 0; attempt < 6 && residual > bound; ++attempt) {
    solver.setTolerance(rel);
    solver.setMaxIterations(std::max(100, 4 * n));
    Eigen::VectorXd next = solver.solveWithGuess(b, x);
    result.iterations += static_cast<int>(solver.iterations());
    const double r = residual_of(next);
    if (std::isfinite(r) && r < residual) {
      x = std::move(next);
      residual = r;
    }
    rel *= 0.1;
  }
  // Gauss-Seidel polish; converges for strictly
  // diagonally dominant rows.
  for (int sweep = 0; sweep < 200 && residual > bound; ++sweep) {
    for (int r = 0; r < n; ++r) {
      double acc = op.rhs[r];
      double diag = 0.0;
      for (int k = op.row_ptr[r]; k < op.row_ptr[r + 1]; ++k) {
        if (op.cols[k] == r)
          diag = op.vals[k];
        else
          acc -= op.vals[k] * x[op.cols[k]];
      }
      x[r] = acc / diag;
    }
    ++result.iterations;
    residual = residual_of(x);
  }
  if (!(residual <= bound)) {
    throw LinearSolveError("linear solve did not reach the residual tolerance (residual " +
                               std::to_string(residual) + ")",
                           residual);
  }
  result.x.assign(x.data(), x.data() + n);
  result.residual = residual;
  return result;
}

void write_matrix_market(const SparseOperator& op, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << op.unknowns << ' ' << op.unknowns << ' ' << op.vals.size() << '\n';
  const auto precision = out.precision(17);
  for (int r = 0; r < op.unknowns; ++r)
    for (int k = op.row_ptr[r]; k < op.row_ptr[r + 1]; ++k)
      out << r + 1 << ' ' << op.cols[k] + 1 << ' ' << op.vals[k] << '\n';
  out.precision(precision);
}

}  // namespace gheat::linsys
