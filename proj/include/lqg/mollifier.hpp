#pragma once

#include <string>

namespace lqg {

enum class MollifierShape {
  // exp(-1/(1-r^2)) on the unit ball, the standard smooth bump.
  Bump,
  // (1-r)^3 (1+3r) on the unit ball: a smoothed tent, C^1 at the origin and
  // C^2 at the edge. Distinct from the bump so mollifier-invariance tests
  // have something to compare.
  SmoothedTent,
};

// A compactly supported 2-d radial mollifier, numerically normalized so its
// integral over the plane is 1 (support is the closed unit ball before
// scaling).
class Mollifier {
 public:
  explicit Mollifier(MollifierShape shape);

  MollifierShape shape() const { return shape_; }
  std::string name() const;

  // Normalized value at radius r (0 for r >= 1).
  double radial(double r) const;

  double operator()(double x, double y) const;

  // Integral of the normalized mollifier recomputed with an independent
  // composite rule of the given size; used by the unit-integral invariant.
  double integral_recheck(int nodes_per_panel, int panels) const;

  static Mollifier parse(const std::string& name);

 private:
  double raw_profile(double r) const;

  MollifierShape shape_;
  double norm_ = 1.0;
};

}  // namespace lqg
