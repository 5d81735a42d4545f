#pragma once

#include <vector>

namespace vl {

struct GaussLegendre {
  std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Cached, thread-safe.
const GaussLegendre& gauss_legendre(int n);

struct QuadNode {
  double x, w;
};

// Composite Gauss-Legendre on [a, b] with `pieces` panels whose widths grow
// geometrically (ratio `grade`) away from both ends when grade > 1.
std::vector<QuadNode> composite_nodes(double a, double b, int pieces, int order, double grade = 1.0);

}  // namespace vl
