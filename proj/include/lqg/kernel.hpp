#pragma once

#include <optional>
#include <string>

#include "lqg/geometry.hpp"

namespace lqg {

enum class KernelCorrection {
  // g(x,y) = 0.
  Zero,
  // g chosen so that K equals the round-sphere Green function in the
  // stereographic chart: g(x,y) = G_g(x,y) - ln_+(1/|x-y|).
  SphereGreen,
};

// Log-type covariance kernel K(x,y) = ln_+(1/|x-y|) + g(x,y) with a bounded
// symmetric correction g on a box domain (or the sphere chart).
class LogKernelSpec {
 public:
  LogKernelSpec(int dimension, KernelCorrection correction, Box domain,
                bool sphere_domain = false);

  int dimension() const { return dimension_; }
  KernelCorrection correction_kind() const { return correction_; }
  const Box& domain() const { return domain_; }
  bool sphere_domain() const { return sphere_domain_; }
  std::string correction_name() const;

  // K(x,y); +infinity at coincident points for the pure log part.
  double operator()(const Point2& x, const Point2& y) const;

  double correction(const Point2& x, const Point2& y) const;

  // Sup of |g| over an n x n grid of domain point pairs (the boundedness
  // invariant check).
  double correction_sup_scan(int n) const;

  // gamma subcriticality threshold sqrt(2 d).
  double gamma_max() const;

  static double log_plus(double r);

 private:
  int dimension_;
  KernelCorrection correction_;
  Box domain_;
  bool sphere_domain_;
};

}  // namespace lqg
