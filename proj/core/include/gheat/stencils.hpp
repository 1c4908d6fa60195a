#pragma once

// Pointwise difference operators and the optimal coefficient selection rules.
// All operators take a full lattice level and an interior index (0 < i,j < M).

#include "gheat/core.hpp"

namespace gheat::stencils {

enum class Orientation { plus, minus };

/// The selected discrete cross term b12 * delta^alpha_xy U at one node.
struct CrossChoice {
  double b12 = 0.0;
  Orientation orientation = Orientation::plus;
  double value = 0.0;

  friend bool operator==(const CrossChoice&, const CrossChoice&) = default;
};

/// (U[i+1,j] - 2U[i,j] + U[i-1,j]) / h^2
double second_diff_x(const LatticeLevel& u, int i, int j, double h);

/// (U[i,j+1] - 2U[i,j] + U[i,j-1]) / h^2
double second_diff_y(const LatticeLevel& u, int i, int j, double h);

/// Seven-point cross difference along the main diagonal:
/// [U(i+1,j+1) + 2U(i,j) + U(i-1,j-1) - (U(i+1,j) + U(i-1,j) + U(i,j+1) + U(i,j-1))] / 2h^2
double cross_diff_plus(const LatticeLevel& u, int i, int j, double h);

/// Seven-point cross difference along the antidiagonal:
/// [U(i+1,j) + U(i-1,j) + U(i,j+1) + U(i,j-1) - (U(i+1,j-1) + 2U(i,j) + U(i-1,j+1))] / 2h^2
double cross_diff_minus(const LatticeLevel& u, int i, int j, double h);

/// Upper bound when s >= 0 (ties included), lower bound otherwise.
inline double select_sigma_sq(double s, double lo, double hi) { return s >= 0.0 ? hi : lo; }

/// max(b12_hi * d_plus, b12_lo * d_minus); equality selects b12_hi with the
/// plus orientation.
CrossChoice select_cross(double d_plus, double d_minus, const UncertaintyBox& box);

}  // namespace gheat::stencils
