#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "lqg/field.hpp"
#include "lqg/geometry.hpp"

namespace lqg {

// Quadrature grid covering the whole sphere in the stereographic chart: a
// uniform grid on the unit disk plus its image under z -> 1/conj(z). The
// round volume form is inversion-invariant, so mirrored cells carry the same
// weight as their originals and the total weight is twice the disk quadrature
// (~ 4*pi).
struct SphereGrid {
  std::vector<Complex> points;
  std::vector<double> weights;     // round volume form g(z) dz per cell
  std::vector<double> cell_scale;  // effective chart-side of the cell
  int n_side = 0;

  static std::shared_ptr<const SphereGrid> make(int n_side = 50);

  std::size_t size() const { return points.size(); }
  double total_weight() const;
  // Index of the cell whose center is nearest to z (chart metric on the
  // matching hemisphere).
  std::size_t nearest_cell(Complex z) const;
};

// Green function of the Laplacian on the round sphere:
// ln[(1+|z|^2)^{1/2} (1+z'|^2)^{1/2} / |z - z'|]. Coincident points raise.
double green_sphere(Complex z, Complex zp);

// Quadrature of G_g(z0, .) against the round volume form over the grid; the
// exact value is 0. Cells close to the singularity are subsampled.
double green_quadrature_mean(const SphereGrid& grid, Complex z0);

// Exact sphere GFF: factorizes the cell-regularized Green covariance at the
// grid points and projects every realization to zero g-weighted mean.
class SphereGffSampler {
 public:
  explicit SphereGffSampler(std::shared_ptr<const SphereGrid> grid,
                            double jitter_max = 1e-8);

  FieldSample sample(std::uint64_t seed, std::uint64_t stream = 0) const;

  // Draw `count` realizations as columns (blocked matrix product; much
  // faster than repeated single draws). Column c uses stream first + c.
  Eigen::MatrixXd sample_block(std::uint64_t seed, std::uint64_t first_stream,
                               int count) const;

  double model_covariance(int i, int j) const { return cov_(i, j); }
  const SphereGrid& grid() const { return *grid_; }
  std::shared_ptr<const SphereGrid> grid_ptr() const { return grid_; }

  // Log-distance self-average over a unit cell, used for the covariance
  // diagonal.
  static double cell_log_constant() { return 0.8050867220670188; }

 private:
  void project_mean_zero(Eigen::Ref<Eigen::VectorXd> values) const;

  std::shared_ptr<const SphereGrid> grid_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  std::vector<double> norm_weights_;  // weights / total
};

}  // namespace lqg
