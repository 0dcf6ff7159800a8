#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "lqg/covariance.hpp"
#include "lqg/geometry.hpp"
#include "lqg/kernel.hpp"
#include "lqg/mollifier.hpp"

namespace lqg {

struct SphereGrid;  // sphere.hpp

// Regular lattice of cell centers over a square box; periodic grids are the
// torus used by spectral synthesis.
struct GridSpec {
  int n = 32;
  double length = 1.0;
  Point2 origin{0.0, 0.0};
  bool periodic = false;

  double spacing() const { return length / n; }
  int count() const { return n * n; }
  Point2 point(int idx) const {
    double h = spacing();
    return {origin.x + (idx % n + 0.5) * h, origin.y + (idx / n + 0.5) * h};
  }
  int index(int i, int j) const { return j * n + i; }

  // Distance between grid points, respecting periodicity.
  double distance(int a, int b) const;
  double torus_distance(const Point2& p, const Point2& q) const;
};

struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// One realization of a mollified field at scale eps, with the exact model
// variance used for Wick normalization.
struct FieldSample {
  GridSpec grid;
  std::vector<double> values;
  std::vector<double> variance_at;
  double eps = 0.0;
  SeedRecord seed;
  std::shared_ptr<const SphereGrid> sphere;  // set for sphere-chart fields

  bool on_sphere() const { return sphere != nullptr; }
  void check_invariants() const;  // finite values, positive variances
};

// Exact-mode sampler: factorizes the covariance of X_eps at the grid points
// (quadrature-exact kernel, true non-periodic domain). Limited to 64^2
// points; jitter escalates from 1e-12 to jitter_max before giving up.
class ExactFieldSampler {
 public:
  ExactFieldSampler(const LogKernelSpec& kernel, const Mollifier& moll,
                    GridSpec grid, double eps, double jitter_max = 1e-8);

  FieldSample sample(std::uint64_t seed, std::uint64_t stream = 0) const;
  double model_covariance(int i, int j) const { return cov_(i, j); }
  double variance() const { return cov_(0, 0); }
  const GridSpec& grid() const { return grid_; }
  double jitter_used() const { return jitter_used_; }

 private:
  GridSpec grid_;
  double eps_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  double jitter_used_ = 0.0;
};

// Joint sampler for two mollification channels (different scales and/or
// shapes) driven by one underlying field: factorizes the stacked covariance
// so cross-covariances are quadrature-exact.
class CoupledExactSampler {
 public:
  CoupledExactSampler(const LogKernelSpec& kernel, const Mollifier& mollA,
                      double epsA, const Mollifier& mollB, double epsB,
                      GridSpec grid, double jitter_max = 1e-8);

  std::pair<FieldSample, FieldSample> sample(std::uint64_t seed,
                                             std::uint64_t stream = 0) const;
  double cross_covariance(int i, int j) const { return cov_(i, grid_.count() + j); }
  double auto_covariance_a(int i, int j) const { return cov_(i, j); }
  double auto_covariance_b(int i, int j) const {
    int n = grid_.count();
    return cov_(n + i, n + j);
  }

 private:
  GridSpec grid_;
  double epsA_, epsB_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
};

// Spectral mode: stationary periodic synthesis on the torus. The circulant
// spectrum is the DFT of the mollified radial covariance sampled at torus
// distances; negative eigenvalues are clipped and the clipped mass is
// reported as the model's documented covariance error.
class SpectralFieldSampler {
 public:
  SpectralFieldSampler(const LogKernelSpec& kernel, const Mollifier& moll,
                       GridSpec grid, double eps, int table_nodes = 1024);
  ~SpectralFieldSampler();
  SpectralFieldSampler(const SpectralFieldSampler&) = delete;
  SpectralFieldSampler& operator=(const SpectralFieldSampler&) = delete;

  FieldSample sample(std::uint64_t seed, std::uint64_t stream = 0) const;

  // Synthesize several scales from one white-noise draw (coupled mode). All
  // samplers must share the same grid.
  static std::vector<FieldSample> sample_coupled(
      const std::vector<const SpectralFieldSampler*>& chain,
      std::uint64_t seed, std::uint64_t stream = 0);

  double variance() const { return model_variance_; }
  double clip_fraction() const { return clip_fraction_; }
  double eps() const { return eps_; }
  const GridSpec& grid() const { return grid_; }

  // Covariance of the synthesized model at lattice displacement (di, dj).
  double model_covariance(int di, int dj) const;
  // Cross-covariance between two coupled samplers (geometric-mean spectrum).
  static std::vector<double> cross_covariance_row(const SpectralFieldSampler& a,
                                                  const SpectralFieldSampler& b);
  const std::vector<double>& spectrum() const { return lambda_; }

 private:
  void fill_white(std::uint64_t seed, std::uint64_t stream) const;

  GridSpec grid_;
  double eps_;
  std::vector<double> lambda_;       // clipped circulant spectrum
  std::vector<double> sqrt_lambda_;
  double model_variance_ = 0.0;
  double clip_fraction_ = 0.0;
  mutable std::vector<double> cov_row_;  // lazily computed model covariance
  struct FftPlans;
  std::unique_ptr<FftPlans> fft_;
};

// Dispatcher matching the operation contract: periodic grids go to spectral
// mode, plain grids to exact mode (<= 64^2 points).
FieldSample sample_log_field(const LogKernelSpec& kernel, const Mollifier& moll,
                             const GridSpec& grid, double eps,
                             std::uint64_t seed, std::uint64_t stream = 0);

enum class BallMode { Automatic, ChartEuclidean, Metric };

// Arithmetic mean of field values over grid points within distance r of x.
// Planar fields use (torus) Euclidean distance; sphere fields default to the
// round metric and may be forced to chart-Euclidean balls.
double ball_average(const FieldSample& field, const Point2& x, double r,
                    BallMode mode = BallMode::Automatic);

}  // namespace lqg
