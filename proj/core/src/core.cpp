#include "gheat/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gheat {

UncertaintyBox UncertaintyBox::from_volatilities(double sigma1_lo, double sigma1_hi,
                                                 double sigma2_lo, double sigma2_hi,
                                                 double b12_lo, double b12_hi) {
  UncertaintyBox box;
  box.sigma1_sq_lo = sigma1_lo * sigma1_lo;
  box.sigma1_sq_hi = sigma1_hi * sigma1_hi;
  box.sigma2_sq_lo = sigma2_lo * sigma2_lo;
  box.sigma2_sq_hi = sigma2_hi * sigma2_hi;
  box.b12_lo = b12_lo;
  box.b12_hi = b12_hi;
  box.check_ordering();
  return box;
}

void UncertaintyBox::check_ordering() const {
  if (!(sigma1_sq_lo >= 0.0) || !(sigma2_sq_lo >= 0.0))
    throw std::invalid_argument("variance lower bounds must be nonnegative");
  if (!(sigma1_sq_lo <= sigma1_sq_hi))
    throw std::invalid_argument("sigma1_sq interval is reversed");
  if (!(sigma2_sq_lo <= sigma2_sq_hi))
    throw std::invalid_argument("sigma2_sq interval is reversed");
  if (!(b12_lo <= b12_hi))
    throw std::invalid_argument("b12 interval is reversed");
}

double UncertaintyBox::max_abs_b12() const {
  return std::max(std::abs(b12_lo), std::abs(b12_hi));
}

BoxDiagnostics validate_box(const UncertaintyBox& box) {
  BoxDiagnostics d;
  d.psd_ok = true;
  d.diag_dom_ok = true;
  std::size_t k = 0;
  for (double s1 : {box.sigma1_sq_lo, box.sigma1_sq_hi}) {
    for (double s2 : {box.sigma2_sq_lo, box.sigma2_sq_hi}) {
      for (double b : {box.b12_lo, box.b12_hi}) {
        CornerMatrix c{s1, s2, b, false, false};
        // 2x2 symmetric: nonnegative diagonal and determinant.
        c.psd = s1 >= 0.0 && s2 >= 0.0 && s1 * s2 >= b * b;
        c.diag_dominant = s1 >= std::abs(b) && s2 >= std::abs(b);
        d.psd_ok = d.psd_ok && c.psd;
        d.diag_dom_ok = d.diag_dom_ok && c.diag_dominant;
        d.corners[k++] = c;
      }
    }
  }
  return d;
}

Grid::Grid(double half_width, int cells_per_axis, double horizon, int steps)
    : half_width_(half_width),
      cells_(cells_per_axis),
      horizon_(horizon),
      steps_(steps),
      h_(2.0 * half_width / cells_per_axis),
      dt_(horizon / steps) {}

double Grid::x(int i) const {
  if (i == cells_) return half_width_;
  return -half_width_ + i * h_;
}

double Grid::t(int n) const {
  if (n == steps_) return horizon_;
  return n * dt_;
}

Grid make_grid(double half_width, int cells_per_axis, double horizon, int steps) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("half width L must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon T must be positive");
  if (cells_per_axis < 2)
    throw std::invalid_argument("cells per axis M must be at least 2");
  if (cells_per_axis % 2 != 0)
    throw std::invalid_argument("cells per axis M must be even so the origin is a node");
  if (steps < 1)
    throw std::invalid_argument("time steps N must be at least 1");
  return Grid(half_width, cells_per_axis, horizon, steps);
}

double LatticeLevel::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

LatticeLevel sample(const Grid& grid, const SpatialFunction& f) {
  LatticeLevel level(grid.nodes_per_axis());
  for (int i = 0; i <= grid.cells(); ++i)
    for (int j = 0; j <= grid.cells(); ++j) level(i, j) = f(grid.x(i), grid.y(j));
  return level;
}

LatticeLevel sample(const Grid& grid, double t, const SpaceTimeFunction& f) {
  LatticeLevel level(grid.nodes_per_axis());
  for (int i = 0; i <= grid.cells(); ++i)
    for (int j = 0; j <= grid.cells(); ++j) level(i, j) = f(t, grid.x(i), grid.y(j));
  return level;
}

double compatibility_mismatch(const ProblemSpec& problem, const Grid& grid) {
  double worst = 0.0;
  const int m = grid.cells();
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      if (!grid.is_boundary(i, j)) continue;
      const double x = grid.x(i);
      const double y = grid.y(j);
      worst = std::max(worst, std::abs(problem.initial(x, y) - problem.boundary(0.0, x, y)));
    }
  }
  return worst;
}

void SolverConfig::validate() const {
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  if (!(tol_picard > 0.0)) throw std::invalid_argument("tol_picard must be positive");
  if (!(tol_lin > 0.0)) throw std::invalid_argument("tol_lin must be positive");
  if (tol_lin > tol_picard / 100.0)
    throw std::invalid_argument("tol_lin must not exceed tol_picard / 100");
}

double SolutionLattice::max_abs() const {
  double m = 0.0;
  for (const auto& level : levels) m = std::max(m, level.max_abs());
  return m;
}

}  // namespace gheat
