#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <variant>

namespace lqg {

using Complex = std::complex<double>;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Box {
  Point2 lo;
  Point2 hi;
  bool contains(const Point2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  double area() const { return (hi.x - lo.x) * (hi.y - lo.y); }
};

struct BallRegion {
  Point2 center;
  double radius = 0.0;
  bool contains(const Point2& p) const { return dist(center, p) <= radius; }
};

using Region = std::variant<Box, BallRegion>;

inline bool region_contains(const Region& r, const Point2& p) {
  return std::visit([&](const auto& reg) { return reg.contains(p); }, r);
}

// Moebius transform z -> (az+b)/(cz+d). Maps are kept in unit-determinant
// form so psi'(z) = 1/(cz+d)^2.
struct MobiusMap {
  Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

  Complex det() const { return a * d - b * c; }

  MobiusMap normalized() const {
    Complex s = std::sqrt(det());
    return {a / s, b / s, c / s, d / s};
  }

  Complex apply(Complex z) const { return (a * z + b) / (c * z + d); }

  Complex derivative(Complex z) const {
    Complex q = c * z + d;
    return det() / (q * q);
  }

  MobiusMap inverse() const { return MobiusMap{d, -b, -c, a}; }

  MobiusMap compose(const MobiusMap& o) const {
    return MobiusMap{a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
                     c * o.b + d * o.d};
  }

  static MobiusMap identity() { return {}; }

  static MobiusMap rotation(double theta) {
    Complex h = std::polar(1.0, theta / 2.0);
    return {h, 0.0, 0.0, std::conj(h)};
  }

  // z -> z / lambda, lambda > 0, in unit-determinant form.
  static MobiusMap scaling(double lambda) {
    double s = std::sqrt(lambda);
    return {Complex(1.0 / s, 0.0), 0.0, 0.0, Complex(s, 0.0)};
  }

  static MobiusMap translation(Complex t) {
    return {Complex(1.0, 0.0), t, Complex(0.0, 0.0), Complex(1.0, 0.0)};
  }
};

// Round metric density g(z) = 4 / (1+|z|^2)^2 (stereographic chart of the
// unit sphere; total volume 4*pi, constant curvature 2).
inline double round_density(Complex z) {
  double q = 1.0 + std::norm(z);
  return 4.0 / (q * q);
}

// Great-circle distance between stereographic points.
inline double sphere_distance(Complex z, Complex w) {
  double chord =
      2.0 * std::abs(z - w) / std::sqrt((1.0 + std::norm(z)) * (1.0 + std::norm(w)));
  chord = std::min(chord, 2.0);
  return 2.0 * std::asin(0.5 * chord);
}

}  // namespace lqg
