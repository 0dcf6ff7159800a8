#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace lqg {

// Welford accumulator for mean / variance / standard error.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }
  double stderror() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double stderror = 0.0;
  std::size_t n = 0;
};

MeanEstimate mean_estimate(const std::vector<double>& xs);

// Effective sample size of a self-normalized importance sampler,
// (sum w)^2 / sum w^2.
double effective_sample_size(const std::vector<double>& weights);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  // 95% interval for the slope (t-based for the plain fit, percentile for
  // bootstrap fits).
  double slope_lo = 0.0;
  double slope_hi = 0.0;
};

// Ordinary least squares y ~ a + b x with a t-based 95% CI on the slope.
LineFit least_squares(const std::vector<double>& xs,
                      const std::vector<double>& ys);

// Weighted least squares with per-point weights (1/variance style).
LineFit weighted_least_squares(const std::vector<double>& xs,
                               const std::vector<double>& ys,
                               const std::vector<double>& ws);

// Two-sided z statistic for the difference of two independent estimates.
double z_statistic(const MeanEstimate& a, const MeanEstimate& b);

// 97.5% quantile of Student's t with nu dof (1.96 for large nu).
double t_quantile_975(std::size_t nu);

}  // namespace lqg
