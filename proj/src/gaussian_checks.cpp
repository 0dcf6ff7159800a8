#include "lqg/gaussian_checks.hpp"

#include <cmath>
#include <sstream>

#include "lqg/errors.hpp"
#include "lqg/quadrature.hpp"
#include "lqg/rng.hpp"
#include "lqg/stats.hpp"

namespace lqg {

double VectorFunctional::operator()(const Eigen::VectorXd& v) const {
  switch (kind_) {
    case Kind::Coordinate:
      return v(index_);
    case Kind::SquareCoordinate:
      return v(index_) * v(index_);
    case Kind::ExpLinear:
      return std::exp(coeffs_.dot(v));
  }
  return 0.0;
}

std::string VectorFunctional::name() const {
  switch (kind_) {
    case Kind::Coordinate:
      return "coordinate";
    case Kind::SquareCoordinate:
      return "square";
    case Kind::ExpLinear:
      return "exp-linear";
  }
  return "?";
}

namespace {

Eigen::MatrixXd factor_cov(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols())
    throw PreconditionError("girsanov: covariance must be square");
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::MatrixXd jittered = sym;
  jittered.diagonal().array() += 1e-12;
  Eigen::LLT<Eigen::MatrixXd> retry(jittered);
  if (retry.info() != Eigen::Success)
    throw PreconditionError("girsanov: covariance is not PSD");
  return retry.matrixL();
}

int nodes_for_dimension(int dim) {
  switch (dim) {
    case 1:
      return 48;
    case 2:
      return 40;
    case 3:
      return 32;
    case 4:
      return 24;
    case 5:
      return 14;
    case 6:
      return 11;
    case 7:
      return 9;
    default:
      return 7;
  }
}

}  // namespace

GirsanovResult girsanov_check_quadrature(const Eigen::MatrixXd& cov,
                                         int shift_index, double lambda,
                                         const VectorFunctional& F) {
  int dim = static_cast<int>(cov.rows());
  if (dim > 8)
    throw PreconditionError("girsanov quadrature mode limited to dimension 8");
  if (shift_index < 0 || shift_index >= dim)
    throw PreconditionError("girsanov: shift index out of range");
  Eigen::MatrixXd L = factor_cov(cov);
  Eigen::VectorXd shift = lambda * cov.col(shift_index);
  double y_var = lambda * lambda * cov(shift_index, shift_index);

  int m = nodes_for_dimension(dim);
  QuadratureRule rule = gauss_hermite_prob(m);

  GirsanovResult out;
  std::vector<int> idx(dim, 0);
  Eigen::VectorXd u(dim);
  for (;;) {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      u(d) = rule.nodes[idx[d]];
      w *= rule.weights[idx[d]];
    }
    Eigen::VectorXd v = L * u;
    out.lhs += w * std::exp(lambda * v(shift_index) - 0.5 * y_var) * F(v);
    out.rhs += w * F(v + shift);
    int d = 0;
    while (d < dim && ++idx[d] == m) {
      idx[d] = 0;
      ++d;
    }
    if (d == dim) break;
  }
  return out;
}

GirsanovResult girsanov_check_mc(const Eigen::MatrixXd& cov, int shift_index,
                                 double lambda, const VectorFunctional& F,
                                 int n, std::uint64_t seed) {
  int dim = static_cast<int>(cov.rows());
  if (shift_index < 0 || shift_index >= dim)
    throw PreconditionError("girsanov: shift index out of range");
  Eigen::MatrixXd L = factor_cov(cov);
  Eigen::VectorXd shift = lambda * cov.col(shift_index);
  double y_var = lambda * lambda * cov(shift_index, shift_index);

  RunningStat lhs, rhs;
  Eigen::VectorXd u(dim);
  for (int k = 0; k < n; ++k) {
    RngStream rng(seed, k);
    for (int d = 0; d < dim; ++d) u(d) = rng.gaussian();
    Eigen::VectorXd v = L * u;
    lhs.add(std::exp(lambda * v(shift_index) - 0.5 * y_var) * F(v));
    rhs.add(F(v + shift));
  }
  return {lhs.mean(), rhs.mean()};
}

double MassFunctional::operator()(double mass) const {
  switch (kind) {
    case Kind::Square:
      return mass * mass;
    case Kind::Sqrt:
      return std::sqrt(std::max(mass, 0.0));
    case Kind::Power:
      return std::pow(std::max(mass, 0.0), p);
  }
  return 0.0;
}

bool MassFunctional::concave() const {
  switch (kind) {
    case Kind::Square:
      return false;
    case Kind::Sqrt:
      return true;
    case Kind::Power:
      return p < 1.0;
  }
  return false;
}

std::string MassFunctional::name() const {
  switch (kind) {
    case Kind::Square:
      return "x^2";
    case Kind::Sqrt:
      return "sqrt";
    case Kind::Power: {
      std::ostringstream s;
      s << "x^" << p;
      return s.str();
    }
  }
  return "?";
}

KahaneResult kahane_compare(const ComparisonField& fieldY,
                            const ComparisonField& fieldZ,
                            const MassFunctional& F,
                            const std::vector<Point2>& grid_points,
                            const std::vector<double>& sigma_weights, int n,
                            std::uint64_t seed) {
  std::size_t m = grid_points.size();
  if (sigma_weights.size() != m)
    throw UsageError("kahane_compare: sigma weight count mismatch");

  auto build = [&](const ComparisonField& f) {
    PairCovariance pc(f.kernel, f.moll, f.eps, f.moll, f.eps);
    Eigen::MatrixXd cov(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        double v = f.cov_scale * pc.at_distance(dist(grid_points[a], grid_points[b]));
        cov(a, b) = v;
        cov(b, a) = v;
      }
    return cov;
  };
  Eigen::MatrixXd covY = build(fieldY);
  Eigen::MatrixXd covZ = build(fieldZ);

  // Pointwise domination scan before any sampling.
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (covY(a, b) > covZ(a, b) + 1e-12) {
        std::ostringstream msg;
        msg << "kahane_compare: domination fails at pair (" << a << ", " << b
            << "): K_Y = " << covY(a, b) << " > K_Z = " << covZ(a, b);
        throw PreconditionError(msg.str());
      }

  Eigen::MatrixXd LY = factor_cov(covY);
  Eigen::MatrixXd LZ = factor_cov(covZ);

  auto run_side = [&](const Eigen::MatrixXd& L, const Eigen::MatrixXd& cov,
                      std::uint64_t stream_base) {
    RunningStat stat;
    Eigen::VectorXd u(m);
    for (int k = 0; k < n; ++k) {
      RngStream rng(seed, stream_base + k);
      for (std::size_t d = 0; d < m; ++d) u(d) = rng.gaussian();
      Eigen::VectorXd x = L * u;
      double mass = 0.0;
      for (std::size_t d = 0; d < m; ++d)
        mass += std::exp(x(d) - 0.5 * cov(d, d)) * sigma_weights[d];
      stat.add(F(mass));
    }
    return stat;
  };
  RunningStat statY = run_side(LY, covY, 0);
  RunningStat statZ = run_side(LZ, covZ, 1u << 30);

  KahaneResult out;
  out.lhs = statY.mean();
  out.lhs_stderr = statY.stderror();
  out.rhs = statZ.mean();
  out.rhs_stderr = statZ.stderror();
  double slack = 3.0 * std::sqrt(out.lhs_stderr * out.lhs_stderr +
                                 out.rhs_stderr * out.rhs_stderr);
  if (F.concave())
    out.verdict = out.lhs >= out.rhs - slack;
  else
    out.verdict = out.lhs <= out.rhs + slack;
  return out;
}

}  // namespace lqg
