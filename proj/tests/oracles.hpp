#ifndef WILLMORE_TEST_ORACLES_HPP
#define WILLMORE_TEST_ORACLES_HPP

// Reference computations for the tests: high-order finite differences of
// analytic functions at tiny steps, and 1-D / 2-D quadrature of analytic
// integrands. Independent of the library's grid operators.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

using Fn2 = std::function<double(double, double)>;

inline double dx4(const Fn2 &f, double x, double y, double s) {
  return (f(x - 2 * s, y) - 8 * f(x - s, y) + 8 * f(x + s, y) - f(x + 2 * s, y)) / (12 * s);
}
inline double dy4(const Fn2 &f, double x, double y, double s) {
  return (f(x, y - 2 * s) - 8 * f(x, y - s) + 8 * f(x, y + s) - f(x, y + 2 * s)) / (12 * s);
}
inline double dxx4(const Fn2 &f, double x, double y, double s) {
  return (-f(x - 2 * s, y) + 16 * f(x - s, y) - 30 * f(x, y) + 16 * f(x + s, y) -
          f(x + 2 * s, y)) /
         (12 * s * s);
}
inline double dyy4(const Fn2 &f, double x, double y, double s) {
  return (-f(x, y - 2 * s) + 16 * f(x, y - s) - 30 * f(x, y) + 16 * f(x, y + s) -
          f(x, y + 2 * s)) /
         (12 * s * s);
}
inline double dxy4(const Fn2 &f, double x, double y, double s) {
  Fn2 g = [&](double a, double b) { return dx4(f, a, b, s); };
  return dy4(g, x, y, s);
}

// ux, uy, uxx, uxy, uyy
inline std::array<double, 5> derivs(const Fn2 &f, double x, double y, double s = 1e-4) {
  return {dx4(f, x, y, s), dy4(f, x, y, s), dxx4(f, x, y, s), dxy4(f, x, y, s),
          dyy4(f, x, y, s)};
}

// adaptive Simpson on [a, b]
inline double simpson(const std::function<double(double)> &f, double a, double b, double fa,
                      double fm, double fb, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * eps)
    return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, eps / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, eps / 2, depth - 1);
}

inline double integrate_1d(const std::function<double(double)> &f, double a, double b,
                           double eps = 1e-10, int depth = 22) {
  double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(m), f(b), eps, depth);
}

// integral of f over the annulus a < r < b (polar measure r dr dtheta),
// adaptive in r, uniform Simpson-capable panel count in theta
inline double integrate_annulus(const Fn2 &f, double a, double b, int ntheta = 64,
                                double eps = 1e-8) {
  auto ring = [&](double r) {
    double acc = 0.0, dt = 2 * std::acos(-1.0) / ntheta;
    for (int q = 0; q < ntheta; ++q) {
      double t = (q + 0.5) * dt;
      acc += f(r * std::cos(t), r * std::sin(t));
    }
    return acc * dt * r;
  };
  return integrate_1d(ring, a, b, eps, 14);
}

} // namespace oracle

#endif
