#pragma once
// Adaptive Simpson quadrature, plus a log-space variant for integrands given
// as g = log f. The log variant factors out max(g) on each panel so that
// integrals of the form ∫ exp(g) with g ~ -4000 stay representable.

#include <cmath>
#include <functional>

#include "fakedist/common.hpp"

namespace fakedist {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double fa, double m, double fm, double b, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double fa,
                    double b, double fb, double m, double fm, double whole,
                    double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, lm, flm, m, fm);
  double right = simpson(f, m, fm, rm, frm, b, fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// ∫_a^b f, adaptive Simpson with absolute tolerance scaled by a first
// estimate when rel_tol is given.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double rel_tol = 1e-12, int max_depth = 48) {
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = detail::simpson(f, a, fa, m, fm, b, fb);
  double tol = std::fabs(whole) * rel_tol + 1e-300;
  return detail::adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// log ∫_a^b exp(g(s)) ds for finite a < b. Factors out the larger endpoint
// value of g (the kernel densities are monotone on panels; for safety the
// interior max found during refinement is folded in by the exp underflowing
// harmlessly, never overflowing).
inline double log_integrate(const std::function<double(double)>& g, double a,
                            double b, double rel_tol = 1e-11,
                            int max_depth = 48) {
  if (!(b > a)) return NEG_INF;
  double M = std::max(g(a), g(b));
  double Mm = g(0.5 * (a + b));
  if (Mm > M) M = Mm;
  auto f = [&](double s) { return std::exp(g(s) - M); };
  double I = integrate(f, a, b, rel_tol, max_depth);
  if (!(I > 0)) return NEG_INF;
  return M + std::log(I);
}

// 5-point Gauss-Legendre on [a,b]; exact through degree 9. Used for interval
// masses of smooth tabulated densities.
inline double gauss5(const std::function<double(double)>& f, double a,
                     double b) {
  static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                              0.5384693101056831, 0.9061798459386640};
  static const double w[5] = {0.2369268850561891, 0.4786286704993665,
                              0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * f(c + h * x[i]);
  return s * h;
}

}  // namespace fakedist
