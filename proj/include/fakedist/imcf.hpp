#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fakedist/common.hpp"
#include "fakedist/fake.hpp"
#include "fakedist/geom.hpp"
#include "fakedist/model.hpp"
#include "fakedist/psolve.hpp"

namespace fakedist {

// Decreasing sequence of p values driving the continuation toward p = 1.
struct ContinuationSchedule {
  std::vector<double> p_list;
  double tol_flow = 1e-3;  // declare convergence when the sup gap drops below

  // p_k = 1 + start * 2^{-k}, k = 0..K
  static ContinuationSchedule dyadic(int K, double start = 0.5);
  void validate(double p_floor) const;
};

// Limit of the continuation: the expanding-front coordinate rho1 and the
// flow variable w. Point mode drives w_p = (1-p) log G_p; domain mode drives
// w_p = (1-p) log u_p for the capacity potential of the source region.
struct FlowResult {
  std::string mode;                  // "point" or "domain"
  std::vector<double> p_list;
  std::vector<Eigen::VectorXd> rho_p;  // per-p fake distances
  std::vector<Eigen::VectorXd> w_p;    // per-p flow snapshots
  std::vector<double> cauchy_trace;    // sup-norm consecutive gaps
  Eigen::VectorXd rho1;  // extrapolated limit of rho_p, >= 0
  Eigen::VectorXd w;     // limit flow field: log v_h(rho1) in point mode
  bool converged = false;
  int extrap_stage = -1;  // later index of the Richardson pair (trace argmin)
  // domain mode extras
  double omega_radius = 0;     // coordinate radius of the source region
  double R_i = 0, R_o = 0;     // limit fake inner/outer radii
  std::vector<double> Ri_p, Ro_p;
  int total_iterations = 0;         // mesh flows: cumulative reweighting count
  std::vector<int> iterations_p;    // mesh flows: per-stage reweighting count
};

// Point-source continuation: per p, a numeric kernel and its fake distance;
// rho1/w by first-order extrapolation of the pair of stages with the
// smallest consecutive sup gap. On radial grids each stage solves on a
// dyadically refined copy of the reporting grid (the direct solvers are
// O(N)), so the per-stage discretization bias -- which grows like
// (p-1)^{-1} dt^2 at fixed resolution -- keeps shrinking down the schedule
// and the extrapolation pair lands on the final two stages. Snapshots are
// restricted to the reporting nodes. Mesh stages reuse one mesh; their
// trace bottoms out at the resolution floor and the pair sits there.
FlowResult run_point_flow(const RadialGrid& g, const ContinuationSchedule& s);
FlowResult run_point_flow(const SurfaceMesh& mesh, const PSolveConfig& cfg,
                          const ContinuationSchedule& s);

// Domain-source continuation from the region {coordinate <= a}: capacity
// potentials give w_p; the point kernels give rho_p and the fake radii of
// the source boundary.
FlowResult run_domain_flow(const RadialGrid& g, double a,
                           const ContinuationSchedule& s);
FlowResult run_domain_flow(const SurfaceMesh& mesh, const PSolveConfig& cfg,
                           double a, const ContinuationSchedule& s);

// Vertexwise gradient bound for the limit flow:
//   |grad w| <= (m-1) h'(s)/h(s)  at  s = v_h^{-1}(e^w),
// audited as a worst ratio against 1. With kappa_form (constant-curvature
// profiles only) the right side is (m-1) sqrt(kappa^2 + e^{-2 wn/(m-1)}),
// wn = w - log omega_{m-1}.
EstimateAudit check_mean_curvature_bound(const RadialGrid& g,
                                         const FlowResult& fr,
                                         double band = 0.0, double tol = -1.0,
                                         bool kappa_form = false);
EstimateAudit check_mean_curvature_bound(const SurfaceMesh& mesh,
                                         const FlowResult& fr,
                                         double band = 0.0, double tol = -1.0,
                                         bool kappa_form = false);

// Domain-mode sandwich:
//   log v_h(rho1) - log v_h(R_o) <= w <= log v_h(rho1) - log v_h(R_i),
// audited as the worst one-sided violation (<= 0 up to tol).
EstimateAudit sandwich_audit(const RadialGrid& g, const FlowResult& fr,
                             double band = 0.0, double tol = -1.0);
EstimateAudit sandwich_audit(const SurfaceMesh& mesh, const FlowResult& fr,
                             double band = 0.0, double tol = -1.0);

// Domain-mode gradient bound max|grad w| <= max{(m-1) sqrt(H(R_i)), Hplus}
// with Hplus the largest positive boundary curvature of the source region.
EstimateAudit check_flow_gradient_bound(const RadialGrid& g,
                                        const FlowResult& fr, double H_plus,
                                        double band = 0.0, double tol = -1.0);

// Quadratic-decay profiles H(t) = kappa^2 / t^2 admit the explicit bound
//   |grad w| <= (R_o / rho1) max{kp (m-1)/R_i, Hplus},
// kp = (1 + sqrt(1+4 kappa^2))/2. Requires a domain-mode result whose model
// profile matches the quadratic form.
EstimateAudit explicit_quadratic_decay_bound(const RadialGrid& g,
                                             const FlowResult& fr,
                                             double kappa, double H_plus,
                                             double band = 0.0,
                                             double tol = -1.0);

// Sandwich of the limit coordinate against the true radius:
//   v_h^{-1}( r^{m-1} / (S^m 2^{m^2-1}) ) <= rho1 <= r,
// with S the isoperimetric constant supplied by the caller.
EstimateAudit lower_bound_rho1(const RadialGrid& g, const FlowResult& fr,
                               double S, double band = 0.0, double tol = -1.0);
EstimateAudit lower_bound_rho1(const SurfaceMesh& mesh, const FlowResult& fr,
                               double S, double band = 0.0, double tol = -1.0);

// Extrapolated limit of the products [G_p]^{p-1} against 1/v_h(rho1):
// worst vertexwise ratio, audited as an identity within tol.
EstimateAudit limit_product_audit(const RadialGrid& g, const FlowResult& fr,
                                  double band = 0.0, double tol = 0.02);
EstimateAudit limit_product_audit(const SurfaceMesh& mesh,
                                  const FlowResult& fr, double band = 0.0,
                                  double tol = 0.02);

// Largest positive discrete geodesic curvature along a closed vertex ring
// (chart turning angles in the cell metric over arc length).
double boundary_mean_curvature_plus(const SurfaceMesh& mesh,
                                    const std::vector<int>& ring);

}  // namespace fakedist
