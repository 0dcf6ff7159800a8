#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "lqg/covariance.hpp"
#include "lqg/errors.hpp"
#include "lqg/field.hpp"
#include "lqg/gaussian_checks.hpp"
#include "lqg/rng.hpp"
#include "lqg/sphere.hpp"
#include "lqg/stats.hpp"

using namespace lqg;

namespace {

LogKernelSpec unit_kernel() {
  return LogKernelSpec(2, KernelCorrection::Zero, Box{{0.0, 0.0}, {1.0, 1.0}});
}

}  // namespace

TEST_CASE("single point grid realizes a centered gaussian") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  GridSpec grid{1, 0.01, {0.0, 0.0}, false};
  ExactFieldSampler sampler(kernel, bump, grid, 0.1);
  RunningStat mean, var;
  double model_var = sampler.variance();
  for (int r = 0; r < 20000; ++r) {
    FieldSample f = sampler.sample(99, r);
    mean.add(f.values[0]);
    var.add(f.values[0] * f.values[0]);
    if (r == 0) CHECK(f.variance_at[0] == doctest::Approx(model_var));
  }
  CHECK(std::abs(mean.mean()) < 4.0 * mean.stderror());
  CHECK(std::abs(var.mean() - model_var) < 4.0 * var.stderror());
}

TEST_CASE("exact mode: sample covariance matches quadrature at random pairs") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  GridSpec grid{16, 0.5, {0.0, 0.0}, false};
  double eps = 2.5 * grid.spacing();
  ExactFieldSampler sampler(kernel, bump, grid, eps);

  int n = 10000;
  RngStream pick(7, 0);
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < 5; ++k)
    pairs.push_back({static_cast<int>(pick.below(grid.count())),
                     static_cast<int>(pick.below(grid.count()))});

  std::vector<RunningStat> prod(pairs.size());
  for (int r = 0; r < n; ++r) {
    FieldSample f = sampler.sample(1234, r);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      prod[k].add(f.values[pairs[k].first] * f.values[pairs[k].second]);
  }
  PairCovariance pc(kernel, bump, eps, bump, eps);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    double target = pc.at_distance(grid.distance(pairs[k].first, pairs[k].second));
    INFO("pair ", k, ": mc ", prod[k].mean(), " target ", target);
    CHECK(std::abs(prod[k].mean() - target) < 4.0 * prod[k].stderror());
  }
}

TEST_CASE("coupled two-scale sampling matches the cross covariance") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  GridSpec grid{12, 0.4, {0.0, 0.0}, false};
  double eps = 3.0 * grid.spacing();
  double eps_prime = 0.5 * eps;
  CoupledExactSampler sampler(kernel, bump, eps_prime, bump, eps, grid);

  int a = 5, b = 100;
  RunningStat cross;
  for (int r = 0; r < 10000; ++r) {
    auto [fa, fb] = sampler.sample(77, r);
    cross.add(fa.values[a] * fb.values[b]);
  }
  PairCovariance pc(kernel, bump, eps_prime, bump, eps);
  double target = pc.at_distance(grid.distance(a, b));
  INFO("coupled: mc ", cross.mean(), " target ", target);
  CHECK(std::abs(cross.mean() - target) < 4.0 * cross.stderror());
  CHECK(sampler.cross_covariance(a, b) == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("variance ladder is nondecreasing as eps decreases") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  PairCovariance* prev = nullptr;
  double prev_var = -1e300;
  for (double eps : {0.25, 0.125, 0.0625, 0.03125}) {
    PairCovariance pc(kernel, bump, eps, bump, eps);
    double v = pc.at_zero();
    CHECK(v > prev_var);
    prev_var = v;
  }
  (void)prev;
}

TEST_CASE("bit-exact reproducibility of field samples") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  GridSpec grid{8, 0.25, {0.0, 0.0}, false};
  ExactFieldSampler sampler(kernel, bump, grid, 3.0 * grid.spacing());
  FieldSample a = sampler.sample(2024, 3);
  FieldSample b = sampler.sample(2024, 3);
  CHECK(std::memcmp(a.values.data(), b.values.data(),
                    a.values.size() * sizeof(double)) == 0);
  FieldSample c = sampler.sample(2024, 4);
  CHECK(std::memcmp(a.values.data(), c.values.data(),
                    a.values.size() * sizeof(double)) != 0);
}

TEST_CASE("exact mode rejects unresolved mollification and oversized grids") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  GridSpec grid{16, 1.0, {0.0, 0.0}, false};
  CHECK_THROWS_AS(ExactFieldSampler(kernel, bump, grid, 0.5 * grid.spacing()),
                  PreconditionError);
  GridSpec big{80, 1.0, {0.0, 0.0}, false};
  CHECK_THROWS_AS(ExactFieldSampler(kernel, bump, big, 0.1), PreconditionError);
}

TEST_CASE("spectral mode: model covariance is realized and clip error small") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  GridSpec grid{64, 1.0, {0.0, 0.0}, true};
  double eps = 1.0 / 16.0;
  SpectralFieldSampler sampler(kernel, bump, grid, eps);
  CHECK(sampler.clip_fraction() < 1e-6);

  int a = grid.index(3, 5), b = grid.index(19, 40);
  RunningStat cross, var0;
  for (int r = 0; r < 8000; ++r) {
    FieldSample f = sampler.sample(31, r);
    cross.add(f.values[a] * f.values[b]);
    var0.add(f.values[a] * f.values[a]);
  }
  double target = sampler.model_covariance(19 - 3, 40 - 5);
  INFO("spectral cross: mc ", cross.mean(), " target ", target);
  CHECK(std::abs(cross.mean() - target) < 4.0 * cross.stderror());
  CHECK(std::abs(var0.mean() - sampler.variance()) < 4.0 * var0.stderror());

  // Model covariance should track the mollified kernel closely away from the
  // torus seam.
  PairCovariance pc(kernel, bump, eps, bump, eps);
  double kernel_cov = pc.at_distance(grid.spacing() * std::hypot(16.0, 0.0));
  CHECK(std::abs(sampler.model_covariance(16, 0) - kernel_cov) < 0.08);
}

TEST_CASE("spectral coupled scales share one white noise") {
  LogKernelSpec kernel = unit_kernel();
  Mollifier bump(MollifierShape::Bump);
  GridSpec grid{64, 1.0, {0.0, 0.0}, true};
  SpectralFieldSampler coarse(kernel, bump, grid, 1.0 / 8.0);
  SpectralFieldSampler fine(kernel, bump, grid, 1.0 / 16.0);
  std::vector<const SpectralFieldSampler*> chain{&coarse, &fine};

  std::vector<double> cross_row =
      SpectralFieldSampler::cross_covariance_row(coarse, fine);
  int a = grid.index(10, 10), b = grid.index(20, 14);
  RunningStat cross;
  for (int r = 0; r < 8000; ++r) {
    auto fields = SpectralFieldSampler::sample_coupled(chain, 55, r);
    cross.add(fields[0].values[a] * fields[1].values[b]);
  }
  double target = cross_row[static_cast<std::size_t>(4) * grid.n + 10];
  INFO("coupled spectral cross: mc ", cross.mean(), " target ", target);
  CHECK(std::abs(cross.mean() - target) < 4.0 * cross.stderror());

  // The coupled cross covariance should agree with the quadrature value of
  // the two-scale mollified kernel to a few percent.
  PairCovariance pc(kernel, bump, 1.0 / 8.0, bump, 1.0 / 16.0);
  double quad = pc.at_distance(grid.spacing() * std::hypot(10.0, 4.0));
  CHECK(std::abs(target - quad) < 0.05);
}

TEST_CASE("ball average of a constant field is the constant") {
  FieldSample f;
  f.grid = GridSpec{32, 1.0, {0.0, 0.0}, false};
  f.values.assign(f.grid.count(), 3.25);
  f.variance_at.assign(f.grid.count(), 1.0);
  f.eps = 0.1;
  CHECK(ball_average(f, {0.5, 0.5}, 0.2) == doctest::Approx(3.25));
  CHECK_THROWS_AS(ball_average(f, {0.5, 0.5}, 0.01), PreconditionError);
}

TEST_CASE("ball average against doubled resolution (smooth test function)") {
  auto fill = [](int n) {
    FieldSample f;
    f.grid = GridSpec{n, 1.0, {0.0, 0.0}, false};
    f.values.resize(f.grid.count());
    f.variance_at.assign(f.grid.count(), 1.0);
    f.eps = 0.05;
    for (int i = 0; i < f.grid.count(); ++i) {
      Point2 p = f.grid.point(i);
      f.values[i] = std::sin(6.0 * p.x) * std::cos(4.0 * p.y) + p.x * p.y;
    }
    return f;
  };
  FieldSample coarse = fill(32), fine = fill(64);
  for (double r : {0.1, 0.2}) {
    double a = ball_average(coarse, {0.45, 0.55}, r);
    double b = ball_average(fine, {0.45, 0.55}, r);
    CHECK(std::abs(a - b) < 0.05);
  }
}

// ---------------------------------------------------------------------------
// Sphere geometry and GFF
// ---------------------------------------------------------------------------

TEST_CASE("sphere grid quadrature reproduces the round volume") {
  auto grid = SphereGrid::make(50);
  CHECK(grid->size() <= 4096);
  double vol = grid->total_weight();
  INFO("total weight ", vol);
  CHECK(std::abs(vol - 4.0 * M_PI) / (4.0 * M_PI) < 1e-3);
}

TEST_CASE("green function closed form and symmetry") {
  CHECK(green_sphere(Complex(0, 0), Complex(1, 0)) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  RngStream rng(3, 0);
  for (int i = 0; i < 20; ++i) {
    Complex z(rng.uniform(-2, 2), rng.uniform(-2, 2));
    Complex w(rng.uniform(-2, 2), rng.uniform(-2, 2));
    if (std::abs(z - w) < 1e-6) continue;
    CHECK(green_sphere(z, w) == doctest::Approx(green_sphere(w, z)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(green_sphere(Complex(1, 1), Complex(1, 1)), PreconditionError);
}

TEST_CASE("green function integrates to zero against the round measure") {
  auto grid = SphereGrid::make(50);
  double residual0 = green_quadrature_mean(*grid, Complex(0.0, 0.0));
  INFO("residual at 0: ", residual0);
  CHECK(std::abs(residual0) < 1e-3);
  double residual1 = green_quadrature_mean(*grid, Complex(0.6, -0.3));
  INFO("residual off-center: ", residual1);
  CHECK(std::abs(residual1) < 1e-3);
}

TEST_CASE("sphere gff: vanishing mean, covariance, integrated-field variance") {
  auto grid = SphereGrid::make(26);
  SphereGffSampler sampler(grid);

  std::size_t a = 11, b = grid->size() / 2 + 3;
  RunningStat cross, gmean_sq;
  double total = grid->total_weight();
  for (int r = 0; r < 8000; ++r) {
    FieldSample f = sampler.sample(17, r);
    if (r < 100) {
      double gmean = 0.0;
      for (std::size_t i = 0; i < grid->size(); ++i)
        gmean += grid->weights[i] * f.values[i];
      CHECK(std::abs(gmean / total) < 1e-10);
    }
    cross.add(f.values[a] * f.values[b]);
    double gsum = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i)
      gsum += grid->weights[i] * f.values[i];
    gmean_sq.add(gsum * gsum);
  }
  double target = green_sphere(grid->points[a], grid->points[b]);
  INFO("gff cov: mc ", cross.mean(), " target ", target);
  CHECK(std::abs(cross.mean() - target) < 4.0 * cross.stderror());
  CHECK(gmean_sq.mean() < 1e-18);
}

TEST_CASE("sphere gff euclid-ball average variance follows the curvature law") {
  auto grid = SphereGrid::make(40);
  SphereGffSampler sampler(grid);

  std::vector<Complex> pts{{0.05, 0.05}, {0.25, 0.05}, {0.45, -0.15},
                           {0.05, 0.65}, {0.65, 0.45}};
  double r_ball = 0.15;
  int n = 6000;

  std::vector<RunningStat> stats(pts.size());
  Eigen::MatrixXd block;
  FieldSample probe = sampler.sample(0, 0);
  for (int r = 0; r < n; ++r) {
    FieldSample f = sampler.sample(4242, r);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      double avg = ball_average(f, {pts[k].real(), pts[k].imag()}, r_ball,
                                BallMode::ChartEuclidean);
      stats[k].add(avg * avg);
    }
  }
  // Var = ln(1/r) - (1/2) ln g(z) + C with one fitted constant C.
  double fitted_c = 0.0;
  std::vector<double> predicted(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    predicted[k] = std::log(1.0 / r_ball) - 0.5 * std::log(round_density(pts[k]));
    fitted_c += stats[k].mean() - predicted[k];
  }
  fitted_c /= pts.size();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    double residual = stats[k].mean() - predicted[k] - fitted_c;
    INFO("point ", k, " residual ", residual, " var ", stats[k].mean());
    CHECK(std::abs(residual) < 0.1);
  }
}

// ---------------------------------------------------------------------------
// Girsanov / Kahane
// ---------------------------------------------------------------------------

TEST_CASE("girsanov: identity covariance, coordinate functional") {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  auto res = girsanov_check_quadrature(cov, 0, 1.0,
                                       VectorFunctional::coordinate(0));
  CHECK(res.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.rhs == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("girsanov: zero shift is the plain expectation") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.3, 0.3, 0.8;
  auto res = girsanov_check_quadrature(cov, 1, 0.0,
                                       VectorFunctional::square(0));
  CHECK(res.lhs == doctest::Approx(res.rhs).epsilon(1e-13));
  CHECK(res.lhs == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("girsanov: random PSD covariances, exp-linear functional") {
  RngStream rng(606, 0);
  for (int trial = 0; trial < 10; ++trial) {
    int dim = 2 + static_cast<int>(rng.below(3));  // 2..4
    Eigen::MatrixXd A(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) A(i, j) = rng.gaussian();
    Eigen::MatrixXd cov = A * A.transpose() / dim;
    Eigen::VectorXd a(dim);
    for (int i = 0; i < dim; ++i) a(i) = 0.5 * rng.gaussian();
    double lambda = 0.5 + rng.uniform();
    int k = static_cast<int>(rng.below(dim));
    auto res = girsanov_check_quadrature(cov, k, lambda,
                                         VectorFunctional::exp_linear(a));
    INFO("trial ", trial, " dim ", dim, " lhs ", res.lhs, " rhs ", res.rhs);
    CHECK(std::abs(res.lhs - res.rhs) < 1e-10 * std::max(1.0, std::abs(res.rhs)));
  }
}

TEST_CASE("girsanov monte carlo rendering agrees loosely") {
  Eigen::MatrixXd cov(3, 3);
  cov << 1.0, 0.2, 0.1, 0.2, 0.9, 0.3, 0.1, 0.3, 1.1;
  auto mc = girsanov_check_mc(cov, 1, 0.7, VectorFunctional::coordinate(2),
                              200000, 2718);
  auto quad = girsanov_check_quadrature(cov, 1, 0.7,
                                        VectorFunctional::coordinate(2));
  CHECK(std::abs(mc.lhs - quad.lhs) < 0.03);
  CHECK(std::abs(mc.rhs - quad.rhs) < 0.03);
}

namespace {

std::pair<std::vector<Point2>, std::vector<double>> comparison_grid() {
  std::vector<Point2> pts;
  std::vector<double> sigma;
  int n = 4;
  double h = 0.4 / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      pts.push_back({(i + 0.5) * h, (j + 0.5) * h});
      sigma.push_back(h * h);
    }
  return {pts, sigma};
}

}  // namespace

TEST_CASE("kahane comparison: equal fields agree within error") {
  auto [pts, sigma] = comparison_grid();
  ComparisonField f{unit_kernel(), Mollifier(MollifierShape::Bump), 0.0625, 1.0};
  auto res = kahane_compare(f, f, MassFunctional::square(), pts, sigma, 4000, 11);
  CHECK(std::abs(res.lhs - res.rhs) <
        4.0 * std::hypot(res.lhs_stderr, res.rhs_stderr));
  CHECK(res.verdict);
}

TEST_CASE("kahane comparison: convex and concave directions") {
  auto [pts, sigma] = comparison_grid();
  ComparisonField weak{unit_kernel(), Mollifier(MollifierShape::Bump), 0.0625, 0.5};
  ComparisonField strong{unit_kernel(), Mollifier(MollifierShape::Bump), 0.0625, 1.0};

  int pass_convex = 0, pass_concave = 0;
  for (int run = 0; run < 20; ++run) {
    auto cx = kahane_compare(weak, strong, MassFunctional::square(), pts, sigma,
                             2000, 1000 + run);
    if (cx.verdict) ++pass_convex;
    auto cv = kahane_compare(weak, strong, MassFunctional::sqrt(), pts, sigma,
                             2000, 5000 + run);
    if (cv.verdict) ++pass_concave;
  }
  CHECK(pass_convex >= 19);
  CHECK(pass_concave >= 19);
}

TEST_CASE("kahane comparison: domination scan rejects reversed kernels") {
  auto [pts, sigma] = comparison_grid();
  ComparisonField weak{unit_kernel(), Mollifier(MollifierShape::Bump), 0.0625, 0.5};
  ComparisonField strong{unit_kernel(), Mollifier(MollifierShape::Bump), 0.0625, 1.0};
  CHECK_THROWS_AS(kahane_compare(strong, weak, MassFunctional::square(), pts,
                                 sigma, 10, 1),
                  PreconditionError);
}
