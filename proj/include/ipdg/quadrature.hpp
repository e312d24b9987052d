#pragma once

#include <array>
#include <vector>

#include "ipdg/common.hpp"

namespace ipdg {

/// Tensor-product Gauss-Legendre rule on the centered reference cell
/// [-1/2,1/2]^d. Weights sum to 1, the reference measure. For d=2 the third
/// point coordinate is zero.
struct QuadRule {
  int n = 0;   // 1D point count
  int dim = 0; // 1, 2 or 3
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// 1D Gauss-Legendre nodes/weights on [-1/2,1/2], weights summing to 1.
void gauss_points_1d(int n, std::vector<double> &nodes,
                     std::vector<double> &weights);

/// Cached tensor rule with n^d points. Throws InvalidParameter unless
/// 1 <= n <= 20 and d in {1,2,3}.
const QuadRule &gauss_rule(int n, int d);

/// 1D point count for integrals involving oscillatory data at wave number k
/// on mesh size h: max(3, ceil(k*h/2) + 2), capped at 20. Bilinear forms of
/// broken-linear fields use a fixed n=2 instead (their integrands are
/// polynomial of 1D degree <= 2).
int oscillatory_order(double k, double h);

} // namespace ipdg
