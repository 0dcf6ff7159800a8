#include "lqg/stats.hpp"

#include <algorithm>

#include "lqg/errors.hpp"

namespace lqg {

MeanEstimate mean_estimate(const std::vector<double>& xs) {
  RunningStat s;
  for (double x : xs) s.add(x);
  return {s.mean(), s.stderror(), s.count()};
}

double effective_sample_size(const std::vector<double>& weights) {
  double sum = 0.0, sumsq = 0.0;
  for (double w : weights) {
    sum += w;
    sumsq += w * w;
  }
  if (sumsq <= 0.0) return 0.0;
  return sum * sum / sumsq;
}

double t_quantile_975(std::size_t nu) {
  static const double table[] = {0,     12.71, 4.303, 3.182, 2.776, 2.571,
                                 2.447, 2.365, 2.306, 2.262, 2.228, 2.201,
                                 2.179, 2.160, 2.145, 2.131, 2.120, 2.110,
                                 2.101, 2.093, 2.086, 2.080, 2.074, 2.069,
                                 2.064, 2.060, 2.056, 2.052, 2.048, 2.045,
                                 2.042};
  if (nu == 0) return 12.71;
  if (nu <= 30) return table[nu];
  if (nu <= 60) return 2.0;
  return 1.96;
}

LineFit least_squares(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  std::vector<double> w(xs.size(), 1.0);
  return weighted_least_squares(xs, ys, w);
}

LineFit weighted_least_squares(const std::vector<double>& xs,
                               const std::vector<double>& ys,
                               const std::vector<double>& ws) {
  std::size_t n = xs.size();
  if (n != ys.size() || n != ws.size())
    throw UsageError("least_squares: size mismatch");
  if (n < 2) throw NumericError("least_squares: need at least 2 points");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += ws[i] * (xs[i] - xbar) * (xs[i] - xbar);
    sxy += ws[i] * (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx <= 0.0) throw NumericError("least_squares: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ys[i] - fit.intercept - fit.slope * xs[i];
    rss += ws[i] * r * r;
  }
  double dof = static_cast<double>(n) - 2.0;
  double s2 = dof > 0 ? rss / dof : 0.0;
  fit.slope_stderr = std::sqrt(s2 / sxx);
  double t = t_quantile_975(n > 2 ? n - 2 : 1);
  fit.slope_lo = fit.slope - t * fit.slope_stderr;
  fit.slope_hi = fit.slope + t * fit.slope_stderr;
  return fit;
}

double z_statistic(const MeanEstimate& a, const MeanEstimate& b) {
  double se = std::sqrt(a.stderror * a.stderror + b.stderror * b.stderror);
  if (se == 0.0) return 0.0;
  return (a.mean - b.mean) / se;
}

}  // namespace lqg
