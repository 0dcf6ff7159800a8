#pragma once

#include <utility>
#include <vector>

namespace lqg {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1,1], computed by Golub-Welsch.
QuadratureRule gauss_legendre(int n);

// Gauss-Legendre rule mapped to [a,b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Probabilists' Gauss-Hermite rule: sum_k w_k f(x_k) ~ E[f(Z)], Z ~ N(0,1);
// the weights sum to 1.
QuadratureRule gauss_hermite_prob(int n);

// Composite Gauss-Legendre over [a,b] split into `panels` equal panels.
QuadratureRule composite_gauss_legendre(int nodes_per_panel, int panels,
                                        double a, double b);

}  // namespace lqg
