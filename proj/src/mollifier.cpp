#include "lqg/mollifier.hpp"

#include <cmath>

#include "lqg/errors.hpp"
#include "lqg/quadrature.hpp"

namespace lqg {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Mollifier::Mollifier(MollifierShape shape) : shape_(shape) {
  // 2-d radial normalization: 2*pi * int_0^1 profile(r) r dr = 1.
  QuadratureRule rule = composite_gauss_legendre(24, 16, 0.0, 1.0);
  double integral = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double r = rule.nodes[i];
    integral += rule.weights[i] * raw_profile(r) * r;
  }
  norm_ = 1.0 / (kTwoPi * integral);
}

double Mollifier::raw_profile(double r) const {
  if (r >= 1.0) return 0.0;
  switch (shape_) {
    case MollifierShape::Bump:
      return std::exp(-1.0 / (1.0 - r * r));
    case MollifierShape::SmoothedTent: {
      double u = 1.0 - r;
      return u * u * u * (1.0 + 3.0 * r);
    }
  }
  return 0.0;
}

double Mollifier::radial(double r) const { return norm_ * raw_profile(r); }

double Mollifier::operator()(double x, double y) const {
  return radial(std::hypot(x, y));
}

double Mollifier::integral_recheck(int nodes_per_panel, int panels) const {
  QuadratureRule rule =
      composite_gauss_legendre(nodes_per_panel, panels, 0.0, 1.0);
  double integral = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    integral += rule.weights[i] * radial(rule.nodes[i]) * rule.nodes[i];
  return kTwoPi * integral;
}

std::string Mollifier::name() const {
  switch (shape_) {
    case MollifierShape::Bump:
      return "bump";
    case MollifierShape::SmoothedTent:
      return "tent";
  }
  return "?";
}

Mollifier Mollifier::parse(const std::string& name) {
  if (name == "bump") return Mollifier(MollifierShape::Bump);
  if (name == "tent") return Mollifier(MollifierShape::SmoothedTent);
  throw UsageError("unknown mollifier shape: " + name +
                   " (expected bump|tent)");
}

}  // namespace lqg
