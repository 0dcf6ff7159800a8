#pragma once

#include <memory>
#include <vector>

#include "lqg/geometry.hpp"
#include "lqg/kernel.hpp"
#include "lqg/mollifier.hpp"

namespace lqg {

// E[X_epsA(x) X_epsB(y)] for X with the given log-type kernel, mollified by
// (mollA, epsA) and (mollB, epsB): (K * thetaA_epsA * thetaB_epsB)(x, y).
//
// The pure log part is reduced to one-dimensional integrals through the
// radial logarithmic potential (circle averages of ln|.| are ln max(|w|, t)),
// so only smooth integrands are quadratured. The evaluation is repeated at
// increasing internal orders until two consecutive values agree within tol;
// failure to stabilize raises NumericError carrying the last two iterates.
double mollified_covariance(const LogKernelSpec& kernel, const Mollifier& mollA,
                            double epsA, const Mollifier& mollB, double epsB,
                            const Point2& x, const Point2& y,
                            double tol = 1e-6);

// Single-mollifier form matching the operation signature (eps, epsPrime).
double mollified_covariance(const LogKernelSpec& kernel, const Mollifier& moll,
                            double eps, double eps_prime, const Point2& x,
                            const Point2& y, double tol = 1e-6);

// Covariance as a function of distance for stationary (correction-free)
// kernels. Exact quadrature evaluation per distinct distance, memoized.
class PairCovariance {
 public:
  PairCovariance(const LogKernelSpec& kernel, Mollifier mollA, double epsA,
                 Mollifier mollB, double epsB);

  double at_distance(double rho) const;
  double at_zero() const { return at_distance(0.0); }

 private:
  LogKernelSpec kernel_;
  Mollifier mollA_, mollB_;
  double epsA_, epsB_;
  mutable std::vector<std::pair<double, double>> cache_;  // sorted by rho
};

// Interpolated radial covariance table for spectral synthesis: log-spaced
// nodes in rho with exact values at the nodes, linear interpolation between.
class RadialCovarianceTable {
 public:
  RadialCovarianceTable(const LogKernelSpec& kernel, const Mollifier& mollA,
                        double epsA, const Mollifier& mollB, double epsB,
                        double rho_max, int n_nodes = 1024);

  double operator()(double rho) const;
  double at_zero() const { return values_.front(); }
  double rho_max() const { return rho_max_; }

 private:
  double shift_;
  double u0_, du_;
  double rho_max_;
  std::vector<double> values_;
};

// Calibrated constants (c, C) such that
//   c + ln(1/(rho+eps)) <= E[X_eps'(x) X_eps(y)] <= C + ln(1/(rho+eps))
// over a sweep of distances and dyadic scale pairs eps' <= eps. The paper
// guarantees existence; the values are kernel-specific and recorded, not
// assumed.
struct FundamentalBand {
  double lower = 0.0;
  double upper = 0.0;
};
FundamentalBand calibrate_fundamental_band(const LogKernelSpec& kernel,
                                           const Mollifier& moll,
                                           const std::vector<double>& eps_ladder,
                                           double rho_max, int n_rho = 48);

}  // namespace lqg
