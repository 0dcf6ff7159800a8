#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lqg/field.hpp"
#include "lqg/geometry.hpp"
#include "lqg/stats.hpp"

namespace lqg {

struct BaseDensity {
  enum class Kind { One, Gauss };
  Kind kind = Kind::One;
  Point2 center{0.5, 0.5};
  double width = 0.25;

  double operator()(const Point2& p) const;
  std::string name() const;

  static BaseDensity one() { return {}; }
  static BaseDensity gauss(Point2 c, double w) {
    return {Kind::Gauss, c, w};
  }
};

// Discrete approximation of the chaos measure: one nonnegative weight per
// grid cell, exp(gamma X(x) - gamma^2/2 Var(x)) f(x) h^2 (or the round
// quadrature weight on the sphere).
struct GmcMeasure {
  GridSpec grid;
  std::shared_ptr<const SphereGrid> sphere;
  std::vector<double> cell_weights;
  double gamma = 0.0;
  double eps = 0.0;
  int dimension = 2;
  double total_mass = 0.0;
  std::string base_name = "one";

  bool on_sphere() const { return sphere != nullptr; }
  std::size_t size() const { return cell_weights.size(); }
  Point2 center(std::size_t i) const;
  void check_invariants() const;
};

// Subcriticality gate: gamma must lie in (0, sqrt(2 d)).
void require_subcritical(double gamma, int dimension);

GmcMeasure build_gmc(const FieldSample& field, double gamma,
                     const BaseDensity& f = BaseDensity::one());

struct MassResult {
  double value = 0.0;
  bool empty_warning = false;  // region missed every cell center
};
MassResult mass(const GmcMeasure& m, const Region& region);

// ---------------------------------------------------------------------------
// Convergence diagnostics (MC against quadrature oracles)
// ---------------------------------------------------------------------------

struct CauchyPoint {
  double eps = 0.0;
  double eps_prime = 0.0;
  double estimate = 0.0;  // E[(M_eps(A) - M_eps'(A))^2]
  double stderror = 0.0;
  double oracle = 0.0;    // three-term covariance quadrature
};

struct TrendSeries {
  std::vector<CauchyPoint> points;
  // Strictly decreasing within `nsigma` per step.
  bool decreasing(double nsigma) const;
};

// L2 Cauchy diagnostic on a dyadic ladder with eps' = eps/2, coupled
// sampling from one white noise per realization. gamma^2 < d required.
TrendSeries cauchy_ladder(const LogKernelSpec& kernel, const Mollifier& moll,
                          double gamma, const Box& region, GridSpec grid,
                          const std::vector<double>& eps_ladder, int n,
                          std::uint64_t seed);

// Same-scale L2 distance between two mollifications from one white noise.
TrendSeries mollifier_invariance(const LogKernelSpec& kernel,
                                 const Mollifier& mollA, const Mollifier& mollB,
                                 double gamma, const Box& region, GridSpec grid,
                                 const std::vector<double>& eps_ladder, int n,
                                 std::uint64_t seed);

// Mean conservation: MC mean of mass(region) with f == 1 (target |region|).
MeanEstimate gmc_mean_mass(const LogKernelSpec& kernel, const Mollifier& moll,
                           double gamma, const Region& region, GridSpec grid,
                           double eps, int n, std::uint64_t seed);

struct VarianceCheck {
  double mc_variance = 0.0;
  double mc_stderr = 0.0;   // sampling error of the variance estimate
  double oracle = 0.0;      // pair-sum of exp(gamma^2 C) minus mean^2
  double mean = 0.0;
};
VarianceCheck gmc_variance_check(const LogKernelSpec& kernel,
                                 const Mollifier& moll, double gamma,
                                 const Box& region, GridSpec grid, double eps,
                                 int n, std::uint64_t seed);

struct MomentScanPoint {
  double q = 0.0;
  double estimate = 0.0;
  double stderror = 0.0;
  double max_share = 0.0;  // largest single term / total sum
  bool nonconvergent = false;
  double threshold = 0.0;  // 2d / gamma^2
};
std::vector<MomentScanPoint> moment_scan(const LogKernelSpec& kernel,
                                         const Mollifier& moll, double gamma,
                                         const BallRegion& ball, GridSpec grid,
                                         double eps,
                                         const std::vector<double>& qs, int n,
                                         std::uint64_t seed);

// Displacement pair-sum oracle: sum over cell pairs of region of
// f(C(displacement)), exact on periodic grids via 1-d overlap counts.
double box_pair_sum(const GridSpec& grid, const Box& region,
                    const std::vector<double>& cov_row, double gamma);

}  // namespace lqg
