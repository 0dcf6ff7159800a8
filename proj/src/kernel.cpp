#include "lqg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lqg/errors.hpp"

namespace lqg {

LogKernelSpec::LogKernelSpec(int dimension, KernelCorrection correction,
                             Box domain, bool sphere_domain)
    : dimension_(dimension),
      correction_(correction),
      domain_(domain),
      sphere_domain_(sphere_domain) {
  if (dimension < 1) throw PreconditionError("kernel: dimension must be >= 1");
}

double LogKernelSpec::log_plus(double r) {
  if (r <= 0.0) return std::numeric_limits<double>::infinity();
  return r >= 1.0 ? 0.0 : -std::log(r);
}

double LogKernelSpec::correction(const Point2& x, const Point2& y) const {
  switch (correction_) {
    case KernelCorrection::Zero:
      return 0.0;
    case KernelCorrection::SphereGreen: {
      // G_g(x,y) - ln_+(1/|x-y|); bounded on bounded chart domains.
      double r = dist(x, y);
      double lift = 0.5 * std::log((1.0 + x.x * x.x + x.y * x.y) *
                                   (1.0 + y.x * y.x + y.y * y.y));
      if (r >= 1.0) return lift - std::log(r);
      return lift;
    }
  }
  return 0.0;
}

double LogKernelSpec::operator()(const Point2& x, const Point2& y) const {
  return log_plus(dist(x, y)) + correction(x, y);
}

double LogKernelSpec::correction_sup_scan(int n) const {
  if (n < 2) throw UsageError("correction_sup_scan: need n >= 2");
  double sup = 0.0;
  double dx = (domain_.hi.x - domain_.lo.x) / (n - 1);
  double dy = (domain_.hi.y - domain_.lo.y) / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Point2 x{domain_.lo.x + i * dx, domain_.lo.y + j * dy};
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Point2 y{domain_.lo.x + k * dx, domain_.lo.y + l * dy};
          double g = correction(x, y);
          if (!std::isfinite(g))
            throw NumericError("correction scan hit a non-finite value");
          sup = std::max(sup, std::abs(g));
        }
    }
  return sup;
}

double LogKernelSpec::gamma_max() const {
  return std::sqrt(2.0 * dimension_);
}

std::string LogKernelSpec::correction_name() const {
  switch (correction_) {
    case KernelCorrection::Zero:
      return "zero";
    case KernelCorrection::SphereGreen:
      return "sphere-green";
  }
  return "?";
}

}  // namespace lqg
