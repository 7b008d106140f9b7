#pragma once
// Rotationally symmetric comparison geometries: warping factor h solving
// h'' = H h, h(0)=0, h'(0)=1; sphere/ball volumes; the radial p-Green kernel
// G(t) = ∫_t^R v_h^{-1/(p-1)} with log-space tables, analytic tails, and a
// pole asymptote; kernel inversion and the log-derivative χ.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fakedist/common.hpp"

namespace fakedist {

struct CurvatureProfile {
  enum class Kind { Constant, Table, Callable };
  Kind kind = Kind::Constant;
  double kappa2 = 0.0;                       // Constant: H(t) = kappa2
  std::vector<double> t, H;                  // Table: linear interpolation
  std::function<double(double)> fn;          // Callable (in-code use only)

  static CurvatureProfile constant(double k2);
  static CurvatureProfile table(std::vector<double> t, std::vector<double> H);
  static CurvatureProfile callable(std::function<double(double)> f);

  double operator()(double s) const;         // constant extension beyond table
  // Constant profiles may be negative (comparison-from-above geometries);
  // table/callable profiles must be >= 0 and non-increasing.
  void validate(double t_max) const;
  bool is_constant() const { return kind == Kind::Constant; }
};

// Tail model of log v_h on the last decade of the table:
//   exponential: log v_h ≈ a + b t       (b > 0)
//   power law:   log v_h ≈ a + b log t
struct TailFit {
  bool exponential = false;
  double a = 0, b = 0;
  double residual = 0;   // rms fit residual, used for regime selection
};

struct ModelManifold {
  int m = 0;
  CurvatureProfile profile;
  double t_max = 0;
  double omega = 0;                // volume of the unit (m-1)-sphere
  double R_inf = POS_INF;          // first zero of h, +inf if none in table
  bool power_law = false;          // h = t^kprime comparison geometry
  double kprime = 1.0;
  std::vector<double> t, h, hp;    // uniform samples, RK4 solution
  std::vector<double> Vtab;        // ball volume at the samples
  TailFit tail;                    // fit of log v_h, last decade of table

  double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  double h_at(double s) const;     // cubic Hermite between samples
  double hp_at(double s) const;
  double log_h_at(double s) const;
  double v(double s) const { return omega * std::pow(h_at(s), m - 1); }
  double log_v(double s) const { return std::log(omega) + (m - 1) * log_h_at(s); }
  double v_ratio(double s) const;  // v'/v = (m-1) h'/h
  double V(double s) const;        // ball volume, table + partial interval
  double mean_v(double a, double b) const;  // (V(b)-V(a))/(b-a)
  double inverse_v(double val) const;       // v^{-1}, flat asymptote near 0
  void check_range(double s) const;
};

double unit_sphere_volume(int m);  // omega_{m-1}

// RK4 integration of the warping ODE on [0, t_max] with n uniform steps.
ModelManifold solve_warping(const CurvatureProfile& profile, int m,
                            double t_max, int n = 4096);

// Comparison geometry h(t) = t^kprime (kprime >= 1); not a true pole model,
// used to audit quadratic-decay bounds.
ModelManifold power_law_model(int m, double kprime, double t_max, int n = 4096);

double sphere_volume(const ModelManifold& mm, double t);  // v_h(t)
double ball_volume(const ModelManifold& mm, double t);    // V_h(t)

// Radial p-kernel of flat space: p<m power law, p=m logarithmic.
double mu_euclidean(int m, double p, double r);
double log_mu_euclidean(int m, double p, double r);

// True when v_h^{-1/(p-1)} is integrable at infinity. Exact for constant
// profiles; tail-fit based otherwise, with an indeterminate error when the
// power-law exponent sits within 1e-6 of the borderline.
bool nonparabolic(const ModelManifold& mm, double p);

struct ModelKernel {
  ModelManifold mm;         // value copy: kernels own their geometry
  double p = 2;
  double R = POS_INF;       // outer kernel radius (may be +inf)
  double lambda = 1;        // 1/(p-1)
  double t_split = 0;       // below: pole asymptote continuation
  std::vector<double> tk;   // nodes covering [t_split, min(R, t_max)]
  std::vector<double> logG; // log kernel at the nodes
  double log_c_split = 0;   // slope-matching factor of the pole asymptote
  double log_tail_at_tmax = NEG_INF;  // R=inf: analytic tail mass past t_max

  double log_value(double s) const;   // all branches
  double value(double s) const { return std::exp(log_value(s)); }
  double chi(double s) const;         // |d log G/dt| = v^{-1/(p-1)}/G
  double log_interval(double a, double b) const;  // log ∫_a^b v^{-1/(p-1)}
};

// Requires p in (1, m] and, for R=+inf, a nonparabolic model.
ModelKernel green_kernel_model(const ModelManifold& mm, double p,
                               double R = POS_INF);

struct InvertResult {
  double t = 0;
  bool extrapolated = false;  // value below the table range, tail formula used
};

// Solve G(t) = g; |G(t)-g| <= 1e-12·g (beats the 1e-10·g contract).
InvertResult invert_kernel_log(const ModelKernel& k, double log_g);
double invert_kernel(const ModelKernel& k, double g);

double log_kernel_derivative(const ModelKernel& k, double t);  // χ(t)

// Model kernel limit audit helper: log of G^h_R(t) for the power-law flat
// comparison, used in closed-form tests.

}  // namespace fakedist
