#pragma once

#include <Eigen/Dense>

#include "fakedist/common.hpp"
#include "fakedist/geom.hpp"
#include "fakedist/model.hpp"
#include "fakedist/psolve.hpp"

namespace fakedist {

// Radius-like coordinate obtained by pushing a numeric kernel through the
// inverse of a model kernel: G^h(rho) = G vertexwise.
struct FakeDistanceField {
  Eigen::VectorXd rho;   // one value per grid node / mesh vertex, >= 0
  double p = 2;
  int extrapolated = 0;  // entries resolved by the pole asymptote branch
};

// Vertexwise inversion of the tail-corrected log kernel. The kernel report
// and the model kernel must carry the same p.
FakeDistanceField fake_distance(const KernelReport& kernel,
                                const ModelKernel& model);

// max |grad rho| <= 1 over cells whose coordinate lies in
// [collar + band, rim - band]; default tolerance 5h absorbs the first-order
// gradient error of P1 fields. A negative tol selects the default.
EstimateAudit check_gradient_bound(const RadialGrid& g,
                                   const FakeDistanceField& fd,
                                   double band = 0.0, double tol = -1.0);
EstimateAudit check_gradient_bound(const SurfaceMesh& mesh,
                                   const FakeDistanceField& fd,
                                   double band = 0.0, double tol = -1.0);

// Normalized weak residual of  div(|grad rho|^{p-2} grad rho)
//                                = (v_h'/v_h)(rho) |grad rho|^p
// over interior hat tests with coordinate in [collar + band, rim - band].
// The radial quadrature integrates v(rho(t)) exactly on each cell through the
// volume table, so a grid whose rho equals t reproduces the identity to
// rounding; the mesh version is first-order consistent.
double pde_residual_rho(const RadialGrid& g, const Eigen::VectorXd& rho,
                        double p, double band = 0.0);
double pde_residual_rho(const SurfaceMesh& mesh, const Eigen::VectorXd& rho,
                        double p, double band = 0.0);

// Same weak test for the composed field psi(rho) with psi(t) = t^2, whose
// drift picks up the extra term 2^{p-1}[(p-1) s^{p-2} + s^{p-1} v'/v](rho):
// div(|grad psi(rho)|^{p-2} grad psi(rho)) =
//     [v_h^{-1} (v_h |psi'|^{p-2} psi')'](rho) |grad rho|^p.
double pde_residual_rho_squared(const RadialGrid& g,
                                const Eigen::VectorXd& rho, double p,
                                double band = 0.0);
double pde_residual_rho_squared(const SurfaceMesh& mesh,
                                const Eigen::VectorXd& rho, double p,
                                double band = 0.0);

// Interior gradient bound for positive p-harmonic fields on curvature >=
// -(m-1) kappa^2 backgrounds:
//   max interior |grad log u| <= max{ (m-1) kappa / (p-1), boundary sup }.
// boundary_sup < 0 measures the right-hand sup from the cells touching the
// Dirichlet rings (radial: the first and last cell). A negative tol selects
// 5h * (1 + rhs).
EstimateAudit check_sharp_gradient_estimate(const RadialGrid& g,
                                            const Eigen::VectorXd& log_u,
                                            double p, double kappa,
                                            double boundary_sup = -1.0,
                                            double tol = -1.0);
EstimateAudit check_sharp_gradient_estimate(const SurfaceMesh& mesh,
                                            const Eigen::VectorXd& log_u,
                                            double p, double kappa,
                                            double boundary_sup = -1.0,
                                            double tol = -1.0);

// Barrier value |(log G^kappa_{R_x+tau})'(R_x)| from the constant-curvature
// comparison model in dimension m: the collar gradient of log u is bounded by
// it whenever the source ball has interior radius R_x and the domain fits in
// the tau-enlargement. tau may be +inf when the comparison model is
// non-parabolic (kappa > 0, or kappa = 0 with p < m).
double boundary_barrier_rhs(int m, double p, double kappa, double R_x,
                            double tau);

// Audit: measured collar gradient of log u on the grid vs the barrier.
EstimateAudit check_boundary_barrier(const RadialGrid& g,
                                     const Eigen::VectorXd& log_u, double p,
                                     double kappa, double R_x, double tau,
                                     double tol = -1.0);

}  // namespace fakedist
