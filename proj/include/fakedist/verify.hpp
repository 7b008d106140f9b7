#pragma once
// Explicit constants of the sharp kernel estimates, and audits checking the
// corresponding inequalities and identities on computed solutions: kernel
// decay, one-sided (half) Harnack bounds, the Harnack functional form in p,
// flux functionals of the fake distance, and isoperimetric identities of the
// limit flow.

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "fakedist/common.hpp"
#include "fakedist/geom.hpp"
#include "fakedist/imcf.hpp"
#include "fakedist/model.hpp"

namespace fakedist {

// ------------------------------------------------------------ constants

// Decay constant C(p, nu, S) of the kernel upper bound
//   G(x) <= [C * eta(2 r(x))]^{1/(p-1)} * r(x)^{-(nu-p)/(p-1)},
// for the power-p Sobolev inequality with constant S. Requires 1 < p < nu,
// S > 0; stays bounded as p -> 1 when S does.
double decay_constant(double p, double nu, double S);

// Limit of the localized decay constant as p -> 1: S^m * 2^(m^2 - 1).
double decay_constant_p1_limit(double S, int m);

// Constant of the one-sided Moser bounds; the branch is selected by the
// integrability exponent q (q = 0 is not allowed):
//   q >= p:     2^nu (1+p)^p          (sup bound)
//   q in (0,p): 2^nu 3^p nu^nu / (p^p (nu-p)^(nu-p))   (sup bound)
//   q < 0:      2^(p+nu)              (inf bound)
double half_harnack_constant(double p, double nu, double q);

// Constructive starting exponent q0 for the sup-bound iteration: q0 <= q
// with q < q0 * nu/(nu-p), chosen so the geometric ladder q0 * k^i
// (k = nu/(nu-p)) keeps a quantified distance from p-1. Requires q != 0;
// for q < 0 and q >= p the choice is q0 = q.
double moser_q0(double p, double nu, double q);

// L^1 Sobolev (isoperimetric) constant of flat m-space:
//   m^{-(m-1)/m} * omega_{m-1}^{-1/m}.
double flat_isoperimetric_constant(int m);

// Power-p Sobolev constant implied by an L^1 (isoperimetric) constant S1 on
// the same set: S = [S1 * p (nu-1)/(nu-p)]^p. Bounded as p -> 1.
double sobolev_from_isoperimetric(double S1, double p, double nu);

// Bundle of the explicit constants entering the audits.
struct ConstantsRecord {
  double p = 2;          // exponent of the solve being audited
  double nu = 3;         // dimension parameter of the Sobolev inequality
  double p0 = 0;         // upper end of the continuation range (0 = unset)
  double sobolev = 1;    // power-p Sobolev constant S
  double poincare = 1;   // (1,p) Poincare constant (recorded, not derived)
  double radius = 1;     // localization radius of the p -> 1 constant
  double decay = 0;                     // C(p, nu, S)
  double decay_p1 = 0;                  // S^m 2^(m^2-1) with m = round(nu)
  double half_sup_small_q = 0;          // q in (0,p) branch
  double half_sup_large_q = 0;          // q >= p branch
  double half_inf = 0;                  // q < 0 branch
  bool finite_positive() const;         // every derived constant > 0, finite
};

// Evaluates all derived constants. Requires 1 < p < nu, S > 0.
ConstantsRecord make_constants(double p, double nu, double S, double p0 = 0,
                               double poincare = 1, double radius = 1);

// ----------------------------------------------------------- decay audit

// Weight eta in the decay bound: 1, or the measured volume-ratio weight
// eta(t) = sup_{s in (0,t]} s^nu / |B_s(o)| with |B_s| the model ball
// volume (exact) or the mesh sublevel area of the distance field plus the
// pole cap.
using LevelWeight = std::function<double(double)>;
LevelWeight unit_weight();
LevelWeight volume_ratio_weight(const ModelManifold& mm, double nu);
LevelWeight volume_ratio_weight(const SurfaceMesh& mesh, double nu);

// Vertexwise audit of the kernel decay bound on a log-kernel field.
// lhs = sup over audited points of
//   (p-1) log G + (nu-p) log r - log C - log eta(2r)   (<= 0 when it holds);
// points with r <= r_min are skipped (the bound is void at the pole).
EstimateAudit check_decay(const RadialGrid& g, const Eigen::VectorXd& log_G,
                          const ConstantsRecord& c,
                          const LevelWeight& eta = {}, double r_min = 0,
                          double tol = 1e-9);
EstimateAudit check_decay(const SurfaceMesh& mesh,
                          const Eigen::VectorXd& log_G,
                          const ConstantsRecord& c,
                          const LevelWeight& eta = {}, double r_min = 0,
                          double tol = 1e-9);

// ----------------------------------------------- one-sided Moser bounds

// Core band {r in [r_lo, r_hi]} inflated by the collar width T to the full
// band A0 = {r in [r_lo - T, r_hi + T]}; A0 must stay inside the chart.
struct AnnulusSpec {
  double r_lo = 0, r_hi = 0, T = 0;
};

// Audits  sup_{core} u <= (S C)^{nu/(p q0)} T^{-nu/q0} |A0|^{1/q0}
//                         (mean of u^q over A0)^{1/q}
// for q > 0 (sup audit), or the reversed inf bound for q < 0. The field u
// must be a nonnegative solution (sup) or positive supersolution (inf) on
// the full band.
EstimateAudit check_half_harnack(const SurfaceMesh& mesh,
                                 const Eigen::VectorXd& u, double q,
                                 const AnnulusSpec& a,
                                 const ConstantsRecord& c, double tol = 0);

// --------------------------------------------- Harnack form continuation

// One continuation stage: sup and inf of a positive solution on a fixed
// ball, at exponent p.
struct HarnackSample {
  double p = 2;
  double sup = 1, inf = 1;
};

// Least-squares fit of (p-1) log(sup/inf) ~ c over the samples.
double harnack_exponent_fit(const std::vector<HarnackSample>& samples);

// Audits that the scaled oscillation (p-1) log(sup/inf) is bounded by the
// fitted constant uniformly over the samples: max_p z_p <= (1+slack) c.
// Needs >= 3 samples with finite positive sup/inf.
EstimateAudit check_harnack_form(const std::vector<HarnackSample>& samples,
                                 double slack = 0.1);

// --------------------------------------------------- flux functionals

// Boundary and bulk flux functionals of a distance-like field rho at level t:
//   A_u(t) = (1/v_h(t)) * \int_{rho = t} u |grad rho|^(p-1)
//   V_u(t) = (1/V_h(t)) * \int_{rho <= t} u |grad rho|^p
// The mesh version fills the missing pole cap with the collar-averaged
// integrand; t is nudged off exact vertex values.
struct FluxFunctionals {
  double A_u = 0, V_u = 0;
};
FluxFunctionals flux_functionals(const RadialGrid& g,
                                 const Eigen::VectorXd& rho,
                                 const Eigen::VectorXd& u, double p, double t);
FluxFunctionals flux_functionals(const SurfaceMesh& mesh,
                                 const Eigen::VectorXd& rho,
                                 const Eigen::VectorXd& u, double p, double t);

// Audits the derivative identity V_u' = (v_h/V_h) (A_u - V_u) at level t by
// a centered difference with half-width delta_rel * t, as a relative
// identity check against the scale max(|A_u|, |V_u|, 0.1).
EstimateAudit check_flux_derivative(const SurfaceMesh& mesh,
                                    const Eigen::VectorXd& rho,
                                    const Eigen::VectorXd& u, double p,
                                    double t, double delta_rel = 0.05,
                                    double tol = 0.05);
EstimateAudit check_flux_derivative(const RadialGrid& g,
                                    const Eigen::VectorXd& rho,
                                    const Eigen::VectorXd& u, double p,
                                    double t, double delta_rel = 0.05,
                                    double tol = 0.05);

// One row of the level diagnostics table: unit flux functionals, measured
// perimeter/volume of the rho sublevels, and their model counterparts.
struct FluxTableRow {
  double t = 0;
  double A1 = 0, V1 = 0;
  double perimeter = 0, v_h = 0;
  double volume = 0, V_h = 0;
};
std::vector<FluxTableRow> flux_table(const RadialGrid& g,
                                     const Eigen::VectorXd& rho, double p,
                                     const std::vector<double>& levels);
std::vector<FluxTableRow> flux_table(const SurfaceMesh& mesh,
                                     const Eigen::VectorXd& rho, double p,
                                     const std::vector<double>& levels);

// ------------------------------------------------ isoperimetric audits

// For each mid-range level t: perimeter of {rho1 < t} matches v_h(t) within
// rel_tol (identity audit), and the enclosed volume is >= vol_slack * V_h(t)
// (inequality audit). A final soft audit checks the small-t perimeter ratio
// approaches 1. Levels default to an interior grid.
std::vector<EstimateAudit> check_isoperimetric(
    const RadialGrid& g, const FlowResult& fr,
    const std::vector<double>& levels = {}, double rel_tol = 0.03,
    double vol_slack = 0.99);
std::vector<EstimateAudit> check_isoperimetric(
    const SurfaceMesh& mesh, const FlowResult& fr,
    const std::vector<double>& levels = {}, double rel_tol = 0.03,
    double vol_slack = 0.99);

}  // namespace fakedist
