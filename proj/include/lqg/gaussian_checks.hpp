#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lqg/covariance.hpp"
#include "lqg/geometry.hpp"

namespace lqg {

// Named test functionals on R^k used by the Gaussian shift identity.
class VectorFunctional {
 public:
  enum class Kind { Coordinate, SquareCoordinate, ExpLinear };

  static VectorFunctional coordinate(int i) { return {Kind::Coordinate, i, {}}; }
  static VectorFunctional square(int i) {
    return {Kind::SquareCoordinate, i, {}};
  }
  static VectorFunctional exp_linear(Eigen::VectorXd a) {
    return {Kind::ExpLinear, 0, std::move(a)};
  }

  double operator()(const Eigen::VectorXd& v) const;
  std::string name() const;

 private:
  VectorFunctional(Kind k, int i, Eigen::VectorXd a)
      : kind_(k), index_(i), coeffs_(std::move(a)) {}
  Kind kind_;
  int index_;
  Eigen::VectorXd coeffs_;
};

struct GirsanovResult {
  double lhs = 0.0;  // E[exp(Y - E[Y^2]/2) F(V)],      Y = lambda * V_k
  double rhs = 0.0;  // E[F(V + lambda * cov column k)]
};

// Both sides by tensor Gauss-Hermite quadrature; dimension <= 8.
GirsanovResult girsanov_check_quadrature(const Eigen::MatrixXd& cov,
                                         int shift_index, double lambda,
                                         const VectorFunctional& F);

// Monte Carlo rendering of the same identity.
GirsanovResult girsanov_check_mc(const Eigen::MatrixXd& cov, int shift_index,
                                 double lambda, const VectorFunctional& F,
                                 int n, std::uint64_t seed);

// Convex/concave functionals of the chaos mass for the comparison principle.
struct MassFunctional {
  enum class Kind { Square, Sqrt, Power };
  Kind kind = Kind::Square;
  double p = 2.0;

  double operator()(double mass) const;
  bool concave() const;
  std::string name() const;

  static MassFunctional square() { return {Kind::Square, 2.0}; }
  static MassFunctional sqrt() { return {Kind::Sqrt, 0.5}; }
  static MassFunctional power(double p) { return {Kind::Power, p}; }
};

// A Gaussian field specification for the comparison test: a log-type kernel,
// a mollification making the covariance continuous, and an overall scale
// multiplier applied to the covariance.
struct ComparisonField {
  LogKernelSpec kernel;
  Mollifier moll;
  double eps = 0.0625;
  double cov_scale = 1.0;
};

struct KahaneResult {
  double lhs = 0.0, lhs_stderr = 0.0;
  double rhs = 0.0, rhs_stderr = 0.0;
  bool verdict = false;  // inequality (with 3 sigma slack) in the F-direction
};

// Monte Carlo check of the convexity comparison between the chaos masses of
// two fields with pointwise-dominated covariances. The domination is scanned
// on the grid before sampling and a violation raises PreconditionError naming
// the offending pair.
KahaneResult kahane_compare(const ComparisonField& fieldY,
                            const ComparisonField& fieldZ,
                            const MassFunctional& F,
                            const std::vector<Point2>& grid_points,
                            const std::vector<double>& sigma_weights, int n,
                            std::uint64_t seed);

}  // namespace lqg
