#include "lqg/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "lqg/errors.hpp"
#include "lqg/rng.hpp"
#include "lqg/sphere.hpp"

namespace lqg {

namespace {

// LLT with escalating diagonal jitter. Returns the lower factor; throws a
// NumericError naming the smallest eigenvalue if jitter_max is not enough.
Eigen::MatrixXd factor_spd(const Eigen::MatrixXd& cov, double jitter_max,
                           double* jitter_used) {
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd work = cov;
    if (jitter > 0.0)
      work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
    if (jitter == 0.0)
      jitter = 1e-12;
    else
      jitter *= 10.0;
    if (jitter > jitter_max) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          cov, Eigen::EigenvaluesOnly);
      std::ostringstream msg;
      msg << "covariance not positive semidefinite after jitter " << jitter_max
          << "; smallest eigenvalue " << es.eigenvalues().minCoeff();
      throw NumericError(msg.str());
    }
  }
}

void draw_gaussians(std::uint64_t seed, std::uint64_t stream,
                    Eigen::VectorXd& out) {
  RngStream rng(seed, stream);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = rng.gaussian();
}

}  // namespace

double GridSpec::torus_distance(const Point2& p, const Point2& q) const {
  double dx = std::abs(p.x - q.x);
  double dy = std::abs(p.y - q.y);
  if (periodic) {
    dx = std::min(dx, length - dx);
    dy = std::min(dy, length - dy);
  }
  return std::hypot(dx, dy);
}

double GridSpec::distance(int a, int b) const {
  return torus_distance(point(a), point(b));
}

void FieldSample::check_invariants() const {
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError("field sample has non-finite value");
  for (double v : variance_at)
    if (!(v > 0.0) || !std::isfinite(v))
      throw NumericError("field sample has non-positive variance entry");
}

// ---------------------------------------------------------------------------
// Exact mode
// ---------------------------------------------------------------------------

namespace {

void check_exact_preconditions(const GridSpec& grid, double eps) {
  if (grid.count() > 64 * 64)
    throw PreconditionError(
        "exact mode limited to 64^2 grid points; use a periodic grid for "
        "spectral synthesis");
  if (eps < 2.0 * grid.spacing()) {
    std::ostringstream msg;
    msg << "mollification scale " << eps << " unresolved by grid spacing "
        << grid.spacing() << " (need eps >= 2h)";
    throw PreconditionError(msg.str());
  }
  if (grid.periodic)
    throw PreconditionError("exact mode uses the true non-periodic kernel");
}

Eigen::MatrixXd assemble_covariance(const GridSpec& grid,
                                    const PairCovariance& pc) {
  int n = grid.count();
  Eigen::MatrixXd cov(n, n);
  for (int a = 0; a < n; ++a) {
    cov(a, a) = pc.at_distance(0.0);
    for (int b = a + 1; b < n; ++b) {
      double v = pc.at_distance(grid.distance(a, b));
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }
  return cov;
}

}  // namespace

ExactFieldSampler::ExactFieldSampler(const LogKernelSpec& kernel,
                                     const Mollifier& moll, GridSpec grid,
                                     double eps, double jitter_max)
    : grid_(grid), eps_(eps) {
  check_exact_preconditions(grid, eps);
  PairCovariance pc(kernel, moll, eps, moll, eps);
  cov_ = assemble_covariance(grid, pc);
  chol_ = factor_spd(cov_, jitter_max, &jitter_used_);
}

FieldSample ExactFieldSampler::sample(std::uint64_t seed,
                                      std::uint64_t stream) const {
  int n = grid_.count();
  Eigen::VectorXd z(n);
  draw_gaussians(seed, stream, z);
  Eigen::VectorXd x = chol_ * z;
  FieldSample out;
  out.grid = grid_;
  out.eps = eps_;
  out.seed = {seed, stream};
  out.values.assign(x.data(), x.data() + n);
  out.variance_at.resize(n);
  for (int i = 0; i < n; ++i) out.variance_at[i] = cov_(i, i);
  return out;
}

CoupledExactSampler::CoupledExactSampler(const LogKernelSpec& kernel,
                                         const Mollifier& mollA, double epsA,
                                         const Mollifier& mollB, double epsB,
                                         GridSpec grid, double jitter_max)
    : grid_(grid), epsA_(epsA), epsB_(epsB) {
  check_exact_preconditions(grid, std::min(epsA, epsB));
  if (grid.count() > 48 * 48)
    throw PreconditionError("coupled exact mode limited to 48^2 grid points");
  int n = grid.count();
  PairCovariance aa(kernel, mollA, epsA, mollA, epsA);
  PairCovariance bb(kernel, mollB, epsB, mollB, epsB);
  PairCovariance ab(kernel, mollA, epsA, mollB, epsB);
  cov_.resize(2 * n, 2 * n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double rho = grid.distance(a, b);
      double vaa = aa.at_distance(rho);
      double vbb = bb.at_distance(rho);
      cov_(a, b) = vaa;
      cov_(b, a) = vaa;
      cov_(n + a, n + b) = vbb;
      cov_(n + b, n + a) = vbb;
    }
    for (int b = 0; b < n; ++b) {
      double vab = ab.at_distance(grid.distance(a, b));
      cov_(a, n + b) = vab;
      cov_(n + b, a) = vab;
    }
  }
  chol_ = factor_spd(cov_, jitter_max, nullptr);
}

std::pair<FieldSample, FieldSample> CoupledExactSampler::sample(
    std::uint64_t seed, std::uint64_t stream) const {
  int n = grid_.count();
  Eigen::VectorXd z(2 * n);
  draw_gaussians(seed, stream, z);
  Eigen::VectorXd x = chol_ * z;
  FieldSample a, b;
  a.grid = grid_;
  b.grid = grid_;
  a.eps = epsA_;
  b.eps = epsB_;
  a.seed = {seed, stream};
  b.seed = {seed, stream};
  a.values.assign(x.data(), x.data() + n);
  b.values.assign(x.data() + n, x.data() + 2 * n);
  a.variance_at.resize(n);
  b.variance_at.resize(n);
  for (int i = 0; i < n; ++i) {
    a.variance_at[i] = cov_(i, i);
    b.variance_at[i] = cov_(n + i, n + i);
  }
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Spectral mode
// ---------------------------------------------------------------------------

struct SpectralFieldSampler::FftPlans {
  int n = 0;
  fftw_complex* buf = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit FftPlans(int n_side) : n(n_side) {
    buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    forward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftPlans() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(buf);
  }
};

SpectralFieldSampler::SpectralFieldSampler(const LogKernelSpec& kernel,
                                           const Mollifier& moll, GridSpec grid,
                                           double eps, int table_nodes)
    : grid_(grid), eps_(eps) {
  if (!grid.periodic)
    throw PreconditionError("spectral mode requires a periodic grid");
  if (eps < 2.0 * grid.spacing())
    throw PreconditionError("spectral mode needs eps >= 2h");
  if (kernel.correction_kind() != KernelCorrection::Zero)
    throw PreconditionError(
        "spectral mode synthesizes stationary kernels (zero correction)");
  int n = grid.n;
  fft_ = std::make_unique<FftPlans>(n);

  double diag = 0.5 * std::sqrt(2.0) * grid.length;
  RadialCovarianceTable table(kernel, moll, eps, moll, eps, diag + grid.spacing(),
                              table_nodes);
  // Circulant row: covariance at torus displacements.
  double h = grid.spacing();
  for (int j = 0; j < n; ++j) {
    double dy = std::min(j, n - j) * h;
    for (int i = 0; i < n; ++i) {
      double dx = std::min(i, n - i) * h;
      fft_->buf[j * n + i][0] = table(std::hypot(dx, dy));
      fft_->buf[j * n + i][1] = 0.0;
    }
  }
  fftw_execute(fft_->forward);
  lambda_.resize(static_cast<std::size_t>(n) * n);
  double clipped = 0.0, total = 0.0;
  for (std::size_t k = 0; k < lambda_.size(); ++k) {
    double lam = fft_->buf[k][0];
    total += std::abs(lam);
    if (lam < 0.0) {
      clipped += -lam;
      lam = 0.0;
    }
    lambda_[k] = lam;
  }
  clip_fraction_ = total > 0.0 ? clipped / total : 0.0;
  sqrt_lambda_.resize(lambda_.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < lambda_.size(); ++k) {
    sqrt_lambda_[k] = std::sqrt(lambda_[k]);
    sum += lambda_[k];
  }
  model_variance_ = sum / static_cast<double>(lambda_.size());
}

SpectralFieldSampler::~SpectralFieldSampler() = default;

void SpectralFieldSampler::fill_white(std::uint64_t seed,
                                      std::uint64_t stream) const {
  RngStream rng(seed, stream);
  std::size_t m = static_cast<std::size_t>(grid_.n) * grid_.n;
  for (std::size_t k = 0; k < m; ++k) {
    fft_->buf[k][0] = rng.gaussian();
    fft_->buf[k][1] = 0.0;
  }
}

FieldSample SpectralFieldSampler::sample(std::uint64_t seed,
                                         std::uint64_t stream) const {
  std::vector<const SpectralFieldSampler*> chain{this};
  return std::move(sample_coupled(chain, seed, stream).front());
}

std::vector<FieldSample> SpectralFieldSampler::sample_coupled(
    const std::vector<const SpectralFieldSampler*>& chain, std::uint64_t seed,
    std::uint64_t stream) {
  if (chain.empty()) return {};
  const SpectralFieldSampler& head = *chain.front();
  std::size_t m = static_cast<std::size_t>(head.grid_.n) * head.grid_.n;
  for (const auto* s : chain)
    if (s->grid_.n != head.grid_.n || s->grid_.length != head.grid_.length)
      throw PreconditionError("coupled spectral samplers must share a grid");

  head.fill_white(seed, stream);
  fftw_execute(head.fft_->forward);
  std::vector<double> wre(m), wim(m);
  for (std::size_t k = 0; k < m; ++k) {
    wre[k] = head.fft_->buf[k][0];
    wim[k] = head.fft_->buf[k][1];
  }

  std::vector<FieldSample> out;
  out.reserve(chain.size());
  double scale = 1.0 / static_cast<double>(m);
  for (const auto* s : chain) {
    for (std::size_t k = 0; k < m; ++k) {
      s->fft_->buf[k][0] = s->sqrt_lambda_[k] * wre[k];
      s->fft_->buf[k][1] = s->sqrt_lambda_[k] * wim[k];
    }
    fftw_execute(s->fft_->backward);
    FieldSample f;
    f.grid = s->grid_;
    f.eps = s->eps_;
    f.seed = {seed, stream};
    f.values.resize(m);
    for (std::size_t k = 0; k < m; ++k) f.values[k] = s->fft_->buf[k][0] * scale;
    f.variance_at.assign(m, s->model_variance_);
    out.push_back(std::move(f));
  }
  return out;
}

double SpectralFieldSampler::model_covariance(int di, int dj) const {
  std::size_t m = static_cast<std::size_t>(grid_.n) * grid_.n;
  if (cov_row_.empty()) {
    for (std::size_t k = 0; k < m; ++k) {
      fft_->buf[k][0] = lambda_[k];
      fft_->buf[k][1] = 0.0;
    }
    fftw_execute(fft_->backward);
    cov_row_.resize(m);
    for (std::size_t k = 0; k < m; ++k)
      cov_row_[k] = fft_->buf[k][0] / static_cast<double>(m);
  }
  int n = grid_.n;
  int i = ((di % n) + n) % n;
  int j = ((dj % n) + n) % n;
  return cov_row_[static_cast<std::size_t>(j) * n + i];
}

std::vector<double> SpectralFieldSampler::cross_covariance_row(
    const SpectralFieldSampler& a, const SpectralFieldSampler& b) {
  if (a.grid_.n != b.grid_.n)
    throw PreconditionError("cross covariance needs matching grids");
  std::size_t m = static_cast<std::size_t>(a.grid_.n) * a.grid_.n;
  for (std::size_t k = 0; k < m; ++k) {
    a.fft_->buf[k][0] = a.sqrt_lambda_[k] * b.sqrt_lambda_[k];
    a.fft_->buf[k][1] = 0.0;
  }
  fftw_execute(a.fft_->backward);
  std::vector<double> row(m);
  for (std::size_t k = 0; k < m; ++k)
    row[k] = a.fft_->buf[k][0] / static_cast<double>(m);
  return row;
}

FieldSample sample_log_field(const LogKernelSpec& kernel, const Mollifier& moll,
                             const GridSpec& grid, double eps,
                             std::uint64_t seed, std::uint64_t stream) {
  if (grid.periodic) {
    SpectralFieldSampler sampler(kernel, moll, grid, eps);
    return sampler.sample(seed, stream);
  }
  ExactFieldSampler sampler(kernel, moll, grid, eps);
  return sampler.sample(seed, stream);
}

// ---------------------------------------------------------------------------
// Ball averages
// ---------------------------------------------------------------------------

double ball_average(const FieldSample& field, const Point2& x, double r,
                    BallMode mode) {
  if (field.on_sphere()) {
    const SphereGrid& sph = *field.sphere;
    bool metric = mode != BallMode::ChartEuclidean;
    Complex zx(x.x, x.y);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sph.points.size(); ++i) {
      double d = metric ? sphere_distance(sph.points[i], zx)
                        : std::abs(sph.points[i] - zx);
      if (d <= r) {
        sum += field.values[i];
        ++count;
      }
    }
    if (count == 0)
      throw NumericError("ball_average: ball contains no grid point");
    return sum / static_cast<double>(count);
  }

  if (r < 2.0 * field.grid.spacing())
    throw PreconditionError("ball_average: radius below 2h resolution floor");
  double sum = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < field.grid.count(); ++i) {
    if (field.grid.torus_distance(field.grid.point(i), x) <= r) {
      sum += field.values[i];
      ++count;
    }
  }
  if (count == 0)
    throw NumericError("ball_average: ball contains no grid point");
  return sum / static_cast<double>(count);
}

}  // namespace lqg
