#include "lqg/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lqg/errors.hpp"
#include "lqg/quadrature.hpp"

namespace lqg {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// max(ln r, 0): the difference ln_+(1/r) - (-ln r).
double log_excess(double r) { return r > 1.0 ? std::log(r) : 0.0; }

// Radial logarithmic potential of a scaled mollifier:
//   Phi(r) = int ln|w - u| theta_eps(u) du,  |w| = r.
// With m(tau) = 2*pi*tau*theta(tau) the circle mean-value property gives
//   Phi(r) = ln(r) * M(r/eps) + int_{r/eps}^{1} ln(eps*tau) m(tau) dtau.
class RadialLogPotential {
 public:
  RadialLogPotential(const Mollifier& moll, double eps, int order)
      : moll_(&moll), eps_(eps), order_(order) {}

  double operator()(double r) const {
    double a = std::min(r / eps_, 1.0);
    double inner = 0.0;  // M(a), mass within radius a
    if (r > 0.0 && a > 0.0) {
      QuadratureRule rule = cached_rule(order_);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double tau = a * 0.5 * (rule.nodes[i] + 1.0);
        inner += a * 0.5 * rule.weights[i] * kTwoPi * tau * moll_->radial(tau);
      }
    }
    double tail = 0.0;
    if (a < 1.0) {
      QuadratureRule rule = cached_rule(order_);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double tau = a + (1.0 - a) * 0.5 * (rule.nodes[i] + 1.0);
        tail += (1.0 - a) * 0.5 * rule.weights[i] *
                std::log(eps_ * tau) * kTwoPi * tau * moll_->radial(tau);
      }
    }
    double head = (r > 0.0 && inner > 0.0) ? std::log(r) * inner : 0.0;
    return head + tail;
  }

 private:
  static const QuadratureRule& cached_rule(int order) {
    static thread_local std::vector<QuadratureRule> cache(80);
    if (order >= static_cast<int>(cache.size())) cache.resize(order + 1);
    if (cache[order].nodes.empty()) cache[order] = gauss_legendre(order);
    return cache[order];
  }

  const Mollifier* moll_;
  double eps_;
  int order_;
};

const QuadratureRule& unit_gl_rule(int order) {
  static thread_local std::vector<QuadratureRule> cache(100);
  if (order >= static_cast<int>(cache.size())) cache.resize(order + 1);
  if (cache[order].nodes.empty())
    cache[order] = gauss_legendre(order, 0.0, 1.0);
  return cache[order];
}

// 2-d polar average of a radial or plane function f against theta_eps
// centered at c: int f(c + eps*tau*e^{i phi}) theta(tau) tau dtau dphi.
template <class F>
double ball_average_against(const Mollifier& moll, double eps, int n_r,
                            int n_phi, double phase, F&& f) {
  const QuadratureRule& radial = unit_gl_rule(n_r);
  double total = 0.0;
  for (int i = 0; i < n_r; ++i) {
    double tau = radial.nodes[i];
    double wr = radial.weights[i] * kTwoPi * tau * moll.radial(tau);
    if (wr == 0.0) continue;
    double ring = 0.0;
    for (int j = 0; j < n_phi; ++j) {
      double phi = kTwoPi * (j + phase) / n_phi;
      ring += f(eps * tau * std::cos(phi), eps * tau * std::sin(phi));
    }
    total += wr * ring / n_phi;
  }
  return total;
}

struct Orders {
  int pot;    // 1-d order inside the radial potential
  int r;      // radial nodes of the outer polar rule
  int phi;    // angular nodes of the outer polar rule
};

// int 0.5*ln(1 + |x - u|^2) theta_eps(u) du, the sphere-green lift term.
double lift_part(const Mollifier& moll, double eps, const Point2& x,
                 const Orders& ord) {
  return ball_average_against(
      moll, eps, ord.r, ord.phi, 0.5, [&](double ux, double uy) {
        double px = x.x - ux, py = x.y - uy;
        return 0.5 * std::log1p(px * px + py * py);
      });
}

double evaluate(const LogKernelSpec& kernel, const Mollifier& mollA,
                double epsA, const Mollifier& mollB, double epsB,
                const Point2& x, const Point2& y, const Orders& ord) {
  double s = dist(x, y);
  // Convolution of -ln|.| with both mollifiers, via the radial potential.
  RadialLogPotential phiA(mollA, epsA, ord.pot);
  double neg_log_conv = -ball_average_against(
      mollB, epsB, ord.r, ord.phi, 0.5,
      [&](double vx, double vy) { return phiA(std::hypot(s + vx, vy)); });
  switch (kernel.correction_kind()) {
    case KernelCorrection::Zero: {
      double value = neg_log_conv;
      // ln_+ truncation term int int max(ln|s - u + v|, 0) thetaA thetaB;
      // vanishes unless the mollified separation can exceed 1.
      if (s + epsA + epsB > 1.0) {
        value += ball_average_against(
            mollB, epsB, ord.r, ord.phi, 0.5, [&](double vx, double vy) {
              return ball_average_against(
                  mollA, epsA, ord.r, ord.phi, 0.25,
                  [&](double ux, double uy) {
                    return log_excess(std::hypot(s + vx - ux, vy - uy));
                  });
            });
      }
      return value;
    }
    case KernelCorrection::SphereGreen:
      // K = G_g = -ln r + lift(x) + lift(y) exactly, so no truncation term.
      return neg_log_conv + lift_part(mollA, epsA, x, ord) +
             lift_part(mollB, epsB, y, ord);
  }
  return neg_log_conv;
}

}  // namespace

double mollified_covariance(const LogKernelSpec& kernel, const Mollifier& mollA,
                            double epsA, const Mollifier& mollB, double epsB,
                            const Point2& x, const Point2& y, double tol) {
  if (epsA <= 0.0 || epsB <= 0.0)
    throw PreconditionError("mollified_covariance: scales must be positive");
  static const Orders ladder[] = {{24, 16, 24}, {32, 24, 36}, {48, 36, 54}};
  double prev = 0.0;
  bool have_prev = false;
  for (const Orders& ord : ladder) {
    double v = evaluate(kernel, mollA, epsA, mollB, epsB, x, y, ord);
    if (have_prev && std::abs(v - prev) <= tol * std::max(1.0, std::abs(v)))
      return v;
    prev = v;
    have_prev = true;
  }
  double final_v =
      evaluate(kernel, mollA, epsA, mollB, epsB, x, y, {64, 48, 72});
  if (std::abs(final_v - prev) <= tol * std::max(1.0, std::abs(final_v)))
    return final_v;
  std::ostringstream msg;
  msg << "mollified_covariance failed to stabilize: last iterates " << prev
      << " and " << final_v << " differ by " << std::abs(final_v - prev)
      << " (tol " << tol << ")";
  throw NumericError(msg.str());
}

double mollified_covariance(const LogKernelSpec& kernel, const Mollifier& moll,
                            double eps, double eps_prime, const Point2& x,
                            const Point2& y, double tol) {
  return mollified_covariance(kernel, moll, eps, moll, eps_prime, x, y, tol);
}

PairCovariance::PairCovariance(const LogKernelSpec& kernel, Mollifier mollA,
                               double epsA, Mollifier mollB, double epsB)
    : kernel_(kernel),
      mollA_(std::move(mollA)),
      mollB_(std::move(mollB)),
      epsA_(epsA),
      epsB_(epsB) {
  if (kernel.correction_kind() != KernelCorrection::Zero)
    throw PreconditionError(
        "PairCovariance: stationary evaluation requires the zero correction");
}

double PairCovariance::at_distance(double rho) const {
  auto it = std::lower_bound(
      cache_.begin(), cache_.end(), rho,
      [](const std::pair<double, double>& e, double v) { return e.first < v; });
  if (it != cache_.end() && std::abs(it->first - rho) < 1e-14 * (1.0 + rho))
    return it->second;
  double v = mollified_covariance(kernel_, mollA_, epsA_, mollB_, epsB_,
                                  Point2{0.0, 0.0}, Point2{rho, 0.0});
  cache_.insert(it, {rho, v});
  return v;
}

RadialCovarianceTable::RadialCovarianceTable(const LogKernelSpec& kernel,
                                             const Mollifier& mollA,
                                             double epsA, const Mollifier& mollB,
                                             double epsB, double rho_max,
                                             int n_nodes)
    : rho_max_(rho_max) {
  if (n_nodes < 8) throw UsageError("RadialCovarianceTable: need >= 8 nodes");
  shift_ = 0.25 * std::min(epsA, epsB);
  u0_ = std::log(shift_);
  double u1 = std::log(rho_max + shift_);
  du_ = (u1 - u0_) / (n_nodes - 1);
  values_.resize(n_nodes);
  PairCovariance pc(kernel, mollA, epsA, mollB, epsB);
  for (int i = 0; i < n_nodes; ++i) {
    double rho = i == 0 ? 0.0 : std::exp(u0_ + i * du_) - shift_;
    values_[i] = pc.at_distance(rho);
  }
}

double RadialCovarianceTable::operator()(double rho) const {
  if (rho <= 0.0) return values_.front();
  double u = std::log(std::min(rho, rho_max_) + shift_);
  double t = (u - u0_) / du_;
  int i = static_cast<int>(std::floor(t));
  i = std::clamp(i, 0, static_cast<int>(values_.size()) - 2);
  double frac = t - i;
  frac = std::clamp(frac, 0.0, 1.0);
  return values_[i] * (1.0 - frac) + values_[i + 1] * frac;
}

FundamentalBand calibrate_fundamental_band(const LogKernelSpec& kernel,
                                           const Mollifier& moll,
                                           const std::vector<double>& eps_ladder,
                                           double rho_max, int n_rho) {
  FundamentalBand band{1e300, -1e300};
  for (double eps : eps_ladder) {
    for (double eps_prime : eps_ladder) {
      if (eps_prime > eps) continue;
      PairCovariance pc(kernel, moll, eps_prime, moll, eps);
      for (int k = 0; k < n_rho; ++k) {
        double rho = rho_max * k / (n_rho - 1);
        double excess = pc.at_distance(rho) - std::log(1.0 / (rho + eps));
        band.lower = std::min(band.lower, excess);
        band.upper = std::max(band.upper, excess);
      }
    }
  }
  return band;
}

}  // namespace lqg
