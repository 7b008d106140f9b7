#pragma once
// Capacity potentials and Green kernels of the p-Laplacian on radial grids
// and surface meshes.
//
// The capacity potential solves div(|grad u|^{p-2} grad u) = 0 with u = 1 on
// the inner (collar) boundary and u = 0 on the outer one; its p-Dirichlet
// energy is the p-capacity of the pair. The Green kernel with unit flux at
// the collar is cap^{-1/(p-1)} * u, computed by domain exhaustion with a
// model-kernel tail correction, entirely in log space so the p -> 1 regime
// (values like exp(-4000)) stays representable.

#include <Eigen/Dense>
#include <vector>

#include "fakedist/geom.hpp"
#include "fakedist/model.hpp"

namespace fakedist {

// Exponent range the solvers support; the floors are the deepest
// continuation stages (dyadic (p-1) halvings landing exactly on them).
// The mesh floor is a double-precision limit: the potential behaves like
// exp(-I(x)/(p-1)) with I of order one on the test annuli, so by
// p = 1 + 1/16 its dynamic range already spans ~20 orders of magnitude and
// one more halving would push the far field below machine noise.
constexpr double RADIAL_P_FLOOR = 1.0 + 1.0 / 512.0;
constexpr double MESH_P_FLOOR = 1.0 + 1.0 / 16.0;
constexpr double P_CEIL = 12.0;

struct PSolveConfig {
  double p = 2.0;
  double tol_energy = 1e-12;  // relative energy stagnation stop
  double lin_tol = 1e-12;  // residual guard on the factorized linear solves
  int max_iters = 400;        // total reweighting iterations
  int iters_per_eps = 40;     // reweighting iterations per smoothing level
  int eps_levels = 14;        // halvings of the relative gradient smoothing
  double eps_floor_rel = 1e-4;  // final relative smoothing level
};

struct SolveReport {
  double p = 2;
  Eigen::VectorXd u;      // potential, 1 at the collar, 0 outside
  Eigen::VectorXd log_u;  // log potential (source of truth near p = 1)
  double energy = 0;      // p-Dirichlet energy of u
  double capacity = 0;    // == energy for capacity potentials
  double collar_flux = 0;  // |grad u|^{p-1} flux through the collar ring
  double residual_weak = 0;  // normalized interior weak-form residual
  double eps_final = 0;  // relative gradient smoothing at exit (mesh solves)
  std::vector<double> energy_trace;  // non-increasing across all iterations
  int iterations = 0;
};

// Radial potentials have a closed-form discrete minimizer (constant discrete
// flux); outer_node < 0 means the outermost grid node. Valid for
// p >= 1 + 2^-9, the deepest radial continuation stage.
SolveReport capacity_potential(const RadialGrid& g, double p,
                               int outer_node = -1);

// Mesh potentials by iteratively reweighted FEM with a halving smoothing
// schedule; monotone energy descent is enforced by a line search. Valid for
// p >= 1 + 2^-5, the deepest mesh continuation stage. `ones`/`zeros` are
// Dirichlet vertex sets; `warm` seeds the first reweighting pass.
SolveReport capacity_potential(const SurfaceMesh& mesh, const PSolveConfig& cfg,
                               const std::vector<int>& ones,
                               const std::vector<int>& zeros,
                               const Eigen::VectorXd* warm = nullptr);
SolveReport capacity_potential(const SurfaceMesh& mesh, const PSolveConfig& cfg);

struct KernelReport {
  double p = 2;
  Eigen::VectorXd log_G;          // tail-corrected log kernel, whole domain
  std::vector<double> radii;      // exhaustion radii, increasing
  std::vector<double> capacities;   // per-stage collar capacities
  std::vector<double> cauchy_gaps;  // sup log-gap between corrected stages
  bool converged = false;
  double collar_log_value = 0;
  Eigen::VectorXd last_stage_u;   // mesh: final-stage potential (warm starts)
  int iterations = 0;             // mesh: cumulative reweighting iterations
};

// Green kernel by exhaustion over sub-domains {r <= R_j}. Raw stages are
// checked for the exhaustion monotonicity (they must increase with R_j);
// each stage is completed by the model tail beyond R_j before comparing.
// Empty `radii` picks a default increasing schedule ending at the domain rim.
KernelReport green_kernel_numeric(const RadialGrid& g, double p,
                                  std::vector<double> radii = {},
                                  double cauchy_tol = 1e-4);
KernelReport green_kernel_numeric(const SurfaceMesh& mesh,
                                  const PSolveConfig& cfg,
                                  std::vector<double> radii = {},
                                  double cauchy_tol = 5e-3,
                                  const Eigen::VectorXd* warm = nullptr);

// p-Dirichlet energy of a P1 field.
double p_energy(const RadialGrid& g, const Eigen::VectorXd& u, double p);
double p_energy(const SurfaceMesh& mesh, const Eigen::VectorXd& u, double p);

// Flux of |grad u|^{p-2} grad u into the collar ring (the weak form tested
// against the sum of collar hat functions).
double collar_flux(const SurfaceMesh& mesh, const Eigen::VectorXd& u, double p,
                   double eps_smooth = 0.0);

// Max over interior hats of the normalized weak p-Laplace residual.
double weak_residual(const SurfaceMesh& mesh, const Eigen::VectorXd& u,
                     double p, double eps_smooth = 0.0);
// Radial version: relative constancy defect of the discrete radial flux,
// computed from log u so deep-continuation potentials stay representable.
double weak_residual(const RadialGrid& g, const Eigen::VectorXd& log_u,
                     double p, int outer_node = -1);

}  // namespace fakedist
