#include "gheat/stencils.hpp"

#include <stdexcept>
#include <string>

namespace gheat::stencils {

namespace {

void check_interior(const LatticeLevel& u, int i, int j) {
  const int m = u.nodes_per_axis() - 1;
  if (i <= 0 || j <= 0 || i >= m || j >= m)
    throw std::out_of_range("stencil index (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is not interior");
}

}  // namespace

double second_diff_x(const LatticeLevel& u, int i, int j, double h) {
  check_interior(u, i, j);
  return (u(i + 1, j) - 2.0 * u(i, j) + u(i - 1, j)) / (h * h);
}

double second_diff_y(const LatticeLevel& u, int i, int j, double h) {
  check_interior(u, i, j);
  return (u(i, j + 1) - 2.0 * u(i, j) + u(i, j - 1)) / (h * h);
}

double cross_diff_plus(const LatticeLevel& u, int i, int j, double h) {
  check_interior(u, i, j);
  const double edges = u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1);
  return (u(i + 1, j + 1) + 2.0 * u(i, j) + u(i - 1, j - 1) - edges) / (2.0 * h * h);
}

double cross_diff_minus(const LatticeLevel& u, int i, int j, double h) {
  check_interior(u, i, j);
  const double edges = u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1);
  return (edges - (u(i + 1, j - 1) + 2.0 * u(i, j) + u(i - 1, j + 1))) / (2.0 * h * h);
}

CrossChoice select_cross(double d_plus, double d_minus, const UncertaintyBox& box) {
  const double upper = box.b12_hi * d_plus;
  const double lower = box.b12_lo * d_minus;
  if (upper >= lower) return {box.b12_hi, Orientation::plus, upper};
  return {box.b12_lo, Orientation::minus, lower};
}

}  // namespace gheat::stencils
