#include "lqg/gmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lqg/errors.hpp"
#include "lqg/sphere.hpp"

namespace lqg {

double BaseDensity::operator()(const Point2& p) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::Gauss: {
      double dx = p.x - center.x, dy = p.y - center.y;
      return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
    }
  }
  return 1.0;
}

std::string BaseDensity::name() const {
  return kind == Kind::One ? "one" : "gauss";
}

Point2 GmcMeasure::center(std::size_t i) const {
  if (on_sphere()) {
    Complex z = sphere->points[i];
    return {z.real(), z.imag()};
  }
  return grid.point(static_cast<int>(i));
}

void GmcMeasure::check_invariants() const {
  double sum = 0.0;
  for (double w : cell_weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw NumericError("measure has a negative or non-finite cell weight");
    sum += w;
  }
  if (std::abs(sum - total_mass) > 1e-12 * std::max(1.0, std::abs(sum)))
    throw NumericError("cached total mass out of sync with cell weights");
}

void require_subcritical(double gamma, int dimension) {
  double threshold = std::sqrt(2.0 * dimension);
  if (!(gamma > 0.0) || gamma >= threshold) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " outside the subcritical range (0, sqrt(2d)) = (0, "
        << threshold << ") for d = " << dimension;
    throw PreconditionError(msg.str());
  }
}

GmcMeasure build_gmc(const FieldSample& field, double gamma,
                     const BaseDensity& f) {
  int d = 2;
  require_subcritical(gamma, d);
  if (field.values.size() != field.variance_at.size() || field.values.empty())
    throw PreconditionError("build_gmc: field sample has no variance data");

  GmcMeasure m;
  m.gamma = gamma;
  m.eps = field.eps;
  m.dimension = d;
  m.base_name = f.name();
  m.cell_weights.resize(field.values.size());
  double total = 0.0;
  if (field.on_sphere()) {
    m.sphere = field.sphere;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
      double w = std::exp(gamma * field.values[i] -
                          0.5 * gamma * gamma * field.variance_at[i]) *
                 field.sphere->weights[i];
      m.cell_weights[i] = w;
      total += w;
    }
  } else {
    m.grid = field.grid;
    double cell = field.grid.spacing() * field.grid.spacing();
    for (std::size_t i = 0; i < field.values.size(); ++i) {
      Point2 p = field.grid.point(static_cast<int>(i));
      double w = std::exp(gamma * field.values[i] -
                          0.5 * gamma * gamma * field.variance_at[i]) *
                 f(p) * cell;
      m.cell_weights[i] = w;
      total += w;
    }
  }
  m.total_mass = total;
  return m;
}

MassResult mass(const GmcMeasure& m, const Region& region) {
  MassResult out;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (region_contains(region, m.center(i))) {
      out.value += m.cell_weights[i];
      ++hit;
    }
  }
  out.empty_warning = (hit == 0);
  return out;
}

bool TrendSeries::decreasing(double nsigma) const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    double gap = points[i - 1].estimate - points[i].estimate;
    double sig = std::hypot(points[i - 1].stderror, points[i].stderror);
    if (gap < -nsigma * sig) return false;
    if (gap <= 0.0 && sig == 0.0) return false;
  }
  return !points.empty();
}

namespace {

// 1-d overlap count of a length-`span` window with itself at displacement dx
// on a circle of size n.
long long overlap_1d(int span, int dx, int n) {
  long long direct = std::max(0, span - dx);
  long long wrapped = std::max(0, dx - (n - span));
  return direct + wrapped;
}

struct CellBox {
  int i0 = 0, j0 = 0, ni = 0, nj = 0;  // index window of cells inside region
};

CellBox region_cells(const GridSpec& grid, const Box& region) {
  CellBox cb;
  std::vector<int> is, js;
  for (int i = 0; i < grid.n; ++i) {
    double x = grid.origin.x + (i + 0.5) * grid.spacing();
    if (x >= region.lo.x && x <= region.hi.x) is.push_back(i);
  }
  for (int j = 0; j < grid.n; ++j) {
    double y = grid.origin.y + (j + 0.5) * grid.spacing();
    if (y >= region.lo.y && y <= region.hi.y) js.push_back(j);
  }
  if (is.empty() || js.empty()) return cb;
  cb.i0 = is.front();
  cb.j0 = js.front();
  cb.ni = static_cast<int>(is.size());
  cb.nj = static_cast<int>(js.size());
  return cb;
}

double region_mass(const GmcMeasure& m, const CellBox& cb) {
  double sum = 0.0;
  const GridSpec& g = m.grid;
  for (int j = 0; j < cb.nj; ++j)
    for (int i = 0; i < cb.ni; ++i)
      sum += m.cell_weights[g.index(cb.i0 + i, cb.j0 + j)];
  return sum;
}

}  // namespace

double box_pair_sum(const GridSpec& grid, const Box& region,
                    const std::vector<double>& cov_row, double gamma) {
  CellBox cb = region_cells(grid, region);
  int n = grid.n;
  double h2 = grid.spacing() * grid.spacing();
  double g2 = gamma * gamma;
  double total = 0.0;
  for (int dj = 0; dj < n; ++dj) {
    long long cj = overlap_1d(cb.nj, dj, n);
    if (cj == 0) continue;
    for (int di = 0; di < n; ++di) {
      long long ci = overlap_1d(cb.ni, di, n);
      if (ci == 0) continue;
      double count = static_cast<double>(ci) * static_cast<double>(cj);
      // displacements +-di match the same covariance by symmetry; counts
      // for di and n-di are accumulated separately as di runs over [0, n).
      total += count * std::exp(g2 * cov_row[static_cast<std::size_t>(dj) * n + di]);
    }
  }
  return total * h2 * h2;
}

TrendSeries cauchy_ladder(const LogKernelSpec& kernel, const Mollifier& moll,
                          double gamma, const Box& region, GridSpec grid,
                          const std::vector<double>& eps_ladder, int n,
                          std::uint64_t seed) {
  int d = kernel.dimension();
  require_subcritical(gamma, d);
  if (gamma * gamma >= d)
    throw PreconditionError(
        "cauchy diagnostic is valid in the L2 regime gamma^2 < d only");
  if (!grid.periodic)
    throw PreconditionError("cauchy_ladder uses coupled spectral sampling");

  TrendSeries series;
  CellBox cb = region_cells(grid, region);
  std::uint64_t rung_stream = 0;
  for (double eps : eps_ladder) {
    double eps_prime = 0.5 * eps;
    SpectralFieldSampler coarse(kernel, moll, grid, eps);
    SpectralFieldSampler fine(kernel, moll, grid, eps_prime);
    std::vector<const SpectralFieldSampler*> chain{&coarse, &fine};

    RunningStat stat;
    for (int r = 0; r < n; ++r) {
      auto fields =
          SpectralFieldSampler::sample_coupled(chain, seed, rung_stream + r);
      GmcMeasure ma = build_gmc(fields[0], gamma);
      GmcMeasure mb = build_gmc(fields[1], gamma);
      double diff = region_mass(ma, cb) - region_mass(mb, cb);
      stat.add(diff * diff);
    }
    rung_stream += static_cast<std::uint64_t>(n);

    // Three-term expansion oracle with the model covariances.
    int nn = grid.n;
    std::vector<double> row_aa(static_cast<std::size_t>(nn) * nn);
    std::vector<double> row_bb(row_aa.size());
    for (int dj = 0; dj < nn; ++dj)
      for (int di = 0; di < nn; ++di) {
        row_aa[static_cast<std::size_t>(dj) * nn + di] = coarse.model_covariance(di, dj);
        row_bb[static_cast<std::size_t>(dj) * nn + di] = fine.model_covariance(di, dj);
      }
    std::vector<double> row_ab =
        SpectralFieldSampler::cross_covariance_row(coarse, fine);
    double oracle = box_pair_sum(grid, region, row_aa, gamma) +
                    box_pair_sum(grid, region, row_bb, gamma) -
                    2.0 * box_pair_sum(grid, region, row_ab, gamma);

    series.points.push_back(
        {eps, eps_prime, stat.mean(), stat.stderror(), oracle});
  }
  return series;
}

TrendSeries mollifier_invariance(const LogKernelSpec& kernel,
                                 const Mollifier& mollA, const Mollifier& mollB,
                                 double gamma, const Box& region, GridSpec grid,
                                 const std::vector<double>& eps_ladder, int n,
                                 std::uint64_t seed) {
  int d = kernel.dimension();
  require_subcritical(gamma, d);
  if (gamma * gamma >= d)
    throw PreconditionError(
        "mollifier invariance diagnostic requires gamma^2 < d");
  if (!grid.periodic)
    throw PreconditionError("mollifier_invariance uses spectral sampling");

  TrendSeries series;
  CellBox cb = region_cells(grid, region);
  std::uint64_t rung_stream = 0;
  for (double eps : eps_ladder) {
    SpectralFieldSampler sa(kernel, mollA, grid, eps);
    SpectralFieldSampler sb(kernel, mollB, grid, eps);
    std::vector<const SpectralFieldSampler*> chain{&sa, &sb};

    RunningStat stat;
    for (int r = 0; r < n; ++r) {
      auto fields =
          SpectralFieldSampler::sample_coupled(chain, seed, rung_stream + r);
      GmcMeasure ma = build_gmc(fields[0], gamma);
      GmcMeasure mb = build_gmc(fields[1], gamma);
      double diff = region_mass(ma, cb) - region_mass(mb, cb);
      stat.add(diff * diff);
    }
    rung_stream += static_cast<std::uint64_t>(n);

    int nn = grid.n;
    std::vector<double> row_aa(static_cast<std::size_t>(nn) * nn);
    std::vector<double> row_bb(row_aa.size());
    for (int dj = 0; dj < nn; ++dj)
      for (int di = 0; di < nn; ++di) {
        row_aa[static_cast<std::size_t>(dj) * nn + di] = sa.model_covariance(di, dj);
        row_bb[static_cast<std::size_t>(dj) * nn + di] = sb.model_covariance(di, dj);
      }
    std::vector<double> row_ab =
        SpectralFieldSampler::cross_covariance_row(sa, sb);
    double oracle = box_pair_sum(grid, region, row_aa, gamma) +
                    box_pair_sum(grid, region, row_bb, gamma) -
                    2.0 * box_pair_sum(grid, region, row_ab, gamma);

    series.points.push_back({eps, eps, stat.mean(), stat.stderror(), oracle});
  }
  return series;
}

MeanEstimate gmc_mean_mass(const LogKernelSpec& kernel, const Mollifier& moll,
                           double gamma, const Region& region, GridSpec grid,
                           double eps, int n, std::uint64_t seed) {
  require_subcritical(gamma, kernel.dimension());
  SpectralFieldSampler sampler(kernel, moll, grid, eps);
  RunningStat stat;
  for (int r = 0; r < n; ++r) {
    FieldSample f = sampler.sample(seed, r);
    GmcMeasure m = build_gmc(f, gamma);
    stat.add(mass(m, region).value);
  }
  return {stat.mean(), stat.stderror(), stat.count()};
}

VarianceCheck gmc_variance_check(const LogKernelSpec& kernel,
                                 const Mollifier& moll, double gamma,
                                 const Box& region, GridSpec grid, double eps,
                                 int n, std::uint64_t seed) {
  require_subcritical(gamma, kernel.dimension());
  if (gamma * gamma >= kernel.dimension())
    throw PreconditionError("second-moment identity requires gamma^2 < d");
  SpectralFieldSampler sampler(kernel, moll, grid, eps);
  CellBox cb = region_cells(grid, region);

  std::vector<double> masses(n);
  for (int r = 0; r < n; ++r) {
    FieldSample f = sampler.sample(seed, r);
    GmcMeasure m = build_gmc(f, gamma);
    masses[r] = region_mass(m, cb);
  }
  double mean = 0.0;
  for (double v : masses) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : masses) {
    double c = v - mean;
    m2 += c * c;
    m4 += c * c * c * c;
  }
  m2 /= n;
  m4 /= n;

  VarianceCheck out;
  out.mean = mean;
  out.mc_variance = m2 * n / (n - 1.0);
  out.mc_stderr = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);

  int nn = grid.n;
  std::vector<double> row(static_cast<std::size_t>(nn) * nn);
  for (int dj = 0; dj < nn; ++dj)
    for (int di = 0; di < nn; ++di)
      row[static_cast<std::size_t>(dj) * nn + di] = sampler.model_covariance(di, dj);
  double second_moment = box_pair_sum(grid, region, row, gamma);
  double h2 = grid.spacing() * grid.spacing();
  double mean_exact = h2 * static_cast<double>(cb.ni) * cb.nj;
  out.oracle = second_moment - mean_exact * mean_exact;
  return out;
}

std::vector<MomentScanPoint> moment_scan(const LogKernelSpec& kernel,
                                         const Mollifier& moll, double gamma,
                                         const BallRegion& ball, GridSpec grid,
                                         double eps,
                                         const std::vector<double>& qs, int n,
                                         std::uint64_t seed) {
  require_subcritical(gamma, kernel.dimension());
  for (double q : qs)
    if (q == 0.0) throw PreconditionError("moment_scan: q must be nonzero");
  SpectralFieldSampler sampler(kernel, moll, grid, eps);

  // Cell membership of the ball, precomputed once.
  std::vector<int> cells;
  for (int i = 0; i < grid.count(); ++i)
    if (ball.contains(grid.point(i))) cells.push_back(i);
  if (cells.empty())
    throw PreconditionError("moment_scan: ball contains no grid cell");

  std::vector<RunningStat> stats(qs.size());
  std::vector<double> max_term(qs.size(), 0.0);
  std::vector<double> sums(qs.size(), 0.0);
  for (int r = 0; r < n; ++r) {
    FieldSample f = sampler.sample(seed, r);
    GmcMeasure m = build_gmc(f, gamma);
    double v = 0.0;
    for (int c : cells) v += m.cell_weights[c];
    for (std::size_t k = 0; k < qs.size(); ++k) {
      double term = std::pow(v, qs[k]);
      stats[k].add(term);
      sums[k] += term;
      max_term[k] = std::max(max_term[k], term);
    }
  }

  double threshold = 2.0 * kernel.dimension() / (gamma * gamma);
  std::vector<MomentScanPoint> out(qs.size());
  for (std::size_t k = 0; k < qs.size(); ++k) {
    out[k].q = qs[k];
    out[k].estimate = stats[k].mean();
    out[k].stderror = stats[k].stderror();
    out[k].max_share = sums[k] > 0.0 ? max_term[k] / sums[k] : 0.0;
    out[k].nonconvergent = out[k].max_share > 0.5;
    out[k].threshold = threshold;
  }
  return out;
}

}  // namespace lqg
