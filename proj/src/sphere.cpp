#include "lqg/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lqg/errors.hpp"
#include "lqg/rng.hpp"

namespace lqg {

namespace {

// Integral of g over a chart cell [cx-h/2,cx+h/2]^2, subsampled m x m with
// an inside-the-unit-disk indicator for boundary cells.
double disk_cell_weight(double cx, double cy, double h, int m) {
  double sum = 0.0;
  double sub = h / m;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double x = cx - 0.5 * h + (a + 0.5) * sub;
      double y = cy - 0.5 * h + (b + 0.5) * sub;
      if (x * x + y * y <= 1.0)
        sum += round_density(Complex(x, y)) * sub * sub;
    }
  return sum;
}

}  // namespace

std::shared_ptr<const SphereGrid> SphereGrid::make(int n_side) {
  if (n_side < 8) throw UsageError("SphereGrid: n_side too small");
  if (n_side % 2 != 0)
    throw UsageError("SphereGrid: n_side must be even (keeps 0 off-center)");
  auto grid = std::make_shared<SphereGrid>();
  grid->n_side = n_side;
  double h = 2.0 / n_side;
  double half_diag = 0.5 * h * std::sqrt(2.0);
  for (int j = 0; j < n_side; ++j) {
    for (int i = 0; i < n_side; ++i) {
      double cx = -1.0 + (i + 0.5) * h;
      double cy = -1.0 + (j + 0.5) * h;
      double r = std::hypot(cx, cy);
      if (r > 1.0 + half_diag) continue;
      double w;
      if (r <= 1.0 - half_diag) {
        w = round_density(Complex(cx, cy)) * h * h;
      } else {
        w = disk_cell_weight(cx, cy, h, 32);
        if (w <= 0.0) continue;
      }
      Complex z(cx, cy);
      grid->points.push_back(z);
      grid->weights.push_back(w);
      grid->cell_scale.push_back(h);
      // Mirror cell under inversion; the round measure is invariant, so the
      // weight carries over unchanged. The chart cell side scales by |w|^2.
      Complex zi = 1.0 / std::conj(z);
      grid->points.push_back(zi);
      grid->weights.push_back(w);
      grid->cell_scale.push_back(h * std::norm(zi));
    }
  }
  return grid;
}

double SphereGrid::total_weight() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum;
}

std::size_t SphereGrid::nearest_cell(Complex z) const {
  double best = 1e300;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = sphere_distance(points[i], z);
    if (d < best) {
      best = d;
      arg = i;
    }
  }
  return arg;
}

double green_sphere(Complex z, Complex zp) {
  double r = std::abs(z - zp);
  if (r == 0.0)
    throw PreconditionError("green_sphere: coincident points are singular");
  return std::log(std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(zp))) / r);
}

double green_quadrature_mean(const SphereGrid& grid, Complex z0) {
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    double h = grid.cell_scale[i];
    double d = std::abs(grid.points[i] - z0);
    if (d < 3.0 * h) {
      // Subsample with round-density weighting: handles both the log
      // singularity near z0 and the g variation inside large mirrored cells.
      int m = 16;
      double cellsum = 0.0;
      double cellmass = 0.0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          Complex p = grid.points[i] +
                      Complex((a + 0.5) / m - 0.5, (b + 0.5) / m - 0.5) * h;
          if (std::abs(p - z0) == 0.0) continue;
          double gp = round_density(p);
          cellsum += gp * green_sphere(z0, p);
          cellmass += gp;
        }
      if (cellmass > 0.0) sum += grid.weights[i] * cellsum / cellmass;
    } else {
      sum += grid.weights[i] * green_sphere(z0, grid.points[i]);
    }
  }
  return sum / grid.total_weight();
}

SphereGffSampler::SphereGffSampler(std::shared_ptr<const SphereGrid> grid,
                                   double jitter_max)
    : grid_(std::move(grid)) {
  const SphereGrid& g = *grid_;
  std::size_t n = g.size();
  if (n > 4096)
    throw PreconditionError(
        "sphere GFF exact factorization limited to 4096 grid points");
  cov_.resize(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    // Cell-regularized diagonal: the self-average of the Green function over
    // a chart cell of side l is ln(1/l) + c_square + ln(1+|z|^2).
    cov_(a, a) = -std::log(g.cell_scale[a]) + cell_log_constant() +
                 std::log1p(std::norm(g.points[a]));
    for (std::size_t b = a + 1; b < n; ++b) {
      double v = green_sphere(g.points[a], g.points[b]);
      cov_(a, b) = v;
      cov_(b, a) = v;
    }
  }
  double total = g.total_weight();
  norm_weights_.resize(n);
  for (std::size_t i = 0; i < n; ++i) norm_weights_[i] = g.weights[i] / total;

  // Factor with escalating jitter.
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd work = cov_;
    if (jitter > 0.0) work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      break;
    }
    jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
    if (jitter > jitter_max) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_,
                                                        Eigen::EigenvaluesOnly);
      std::ostringstream msg;
      msg << "sphere GFF covariance not PSD after jitter " << jitter_max
          << "; smallest eigenvalue " << es.eigenvalues().minCoeff();
      throw NumericError(msg.str());
    }
  }
}

void SphereGffSampler::project_mean_zero(
    Eigen::Ref<Eigen::VectorXd> values) const {
  double mean = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    mean += norm_weights_[i] * values(i);
  values.array() -= mean;
}

FieldSample SphereGffSampler::sample(std::uint64_t seed,
                                     std::uint64_t stream) const {
  std::size_t n = grid_->size();
  Eigen::VectorXd z(n);
  RngStream rng(seed, stream);
  for (std::size_t i = 0; i < n; ++i) z(i) = rng.gaussian();
  Eigen::VectorXd x = chol_ * z;
  project_mean_zero(x);
  FieldSample out;
  out.sphere = grid_;
  out.eps = 0.0;
  out.seed = {seed, stream};
  out.values.assign(x.data(), x.data() + n);
  out.variance_at.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.variance_at[i] = cov_(i, i);
  return out;
}

Eigen::MatrixXd SphereGffSampler::sample_block(std::uint64_t seed,
                                               std::uint64_t first_stream,
                                               int count) const {
  std::size_t n = grid_->size();
  Eigen::MatrixXd z(n, count);
  for (int c = 0; c < count; ++c) {
    RngStream rng(seed, first_stream + c);
    for (std::size_t i = 0; i < n; ++i) z(i, c) = rng.gaussian();
  }
  Eigen::MatrixXd x = chol_ * z;
  for (int c = 0; c < count; ++c) project_mean_zero(x.col(c));
  return x;
}

}  // namespace lqg
