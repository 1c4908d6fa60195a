#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the stencils or linsys modules: differences, coefficient
// selection, assembly and the fixed-point iteration are written out again on
// plain dense arrays, term by term.

#include <functional>
#include <random>
#include <vector>

#include "gheat/core.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;  // [i][j] nodes or [row][col]

Dense to_dense(const gheat::LatticeLevel& level);
gheat::LatticeLevel from_dense(const Dense& d);

struct Selection {
  double s1 = 0.0;
  double s2 = 0.0;
  double b = 0.0;
  bool plus = true;
};

/// Sign rules applied to the four difference quotients at (i, j).
Selection select(const Dense& u, int i, int j, double h, const gheat::UncertaintyBox& box);

struct System {
  Dense a;
  std::vector<double> rhs;
};

/// The implicit step operator for coefficients chosen from `iterate`, built by
/// adding each difference term to the matrix (interior) or moving it to the
/// right-hand side (boundary values taken from `next_boundary`).
System assemble(const Dense& prev, const Dense& iterate, const Dense& next_boundary, double h,
                double dt, const gheat::UncertaintyBox& box,
                const std::function<double(int, int)>& forcing);

/// Gaussian elimination with partial pivoting.
std::vector<double> gauss_solve(Dense a, std::vector<double> b);
Dense inverse(const Dense& a);

struct StepResult {
  Dense next;
  int solves = 0;
};

/// Fixed-point iteration of the implicit step with dense solves, started from
/// `prev` with the boundary of `next_boundary`, until the sup-norm increment is
/// at most `tol`.
StepResult picard_step(const Dense& prev, const Dense& next_boundary, double h, double dt,
                       const gheat::UncertaintyBox& box,
                       const std::function<double(int, int)>& forcing, double tol, int cap = 200);

/// min over `samples` random points of the box of (s1/2 + s2/2 + b) * factor.
double sampled_min(const gheat::UncertaintyBox& box, double factor, int samples, std::mt19937_64& rng);

/// A random diagonally dominant box whose covariance interval contains 0.
gheat::UncertaintyBox random_dominant_box(std::mt19937_64& rng);

/// Random smooth data: a trigonometric polynomial of low degree.
struct RandomField {
  double c0, cx, cy, cxy, cxx, cyy, amp, kx, ky, kt, phase;
  double operator()(double t, double x, double y) const;
};
RandomField random_field(std::mt19937_64& rng);

}  // namespace oracle
