#include "fakedist/psolve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <string>

#include "fakedist/common.hpp"

namespace fakedist {

namespace {

void check_p(double p, double floor_val, const char* what) {
  if (!(p >= floor_val - 1e-12) || !(p <= P_CEIL))
    throw config_error(std::string(what) +
                       ": exponent p outside the supported range");
}

std::vector<double> log_cell_means(const RadialGrid& g) {
  std::vector<double> lv(g.N());
  for (int i = 0; i < g.N(); ++i)
    lv[i] = std::log(g.mm.mean_v(g.t[i], g.t[i + 1]));
  return lv;
}

// ---------------------------------------------------------------- mesh FEM

struct FemCache {
  std::vector<Eigen::Matrix<double, 2, 3>> B;  // P1 basis chart gradients
  std::vector<Eigen::Matrix2d> Ginv;
  std::vector<double> area;

  explicit FemCache(const SurfaceMesh& mesh) {
    const int m = mesh.nf();
    B.resize(m);
    Ginv.resize(m);
    area.resize(m);
    for (int f = 0; f < m; ++f) {
      Eigen::Matrix2d D;
      D << mesh.P(f, 2) - mesh.P(f, 0), mesh.P(f, 4) - mesh.P(f, 0),
          mesh.P(f, 3) - mesh.P(f, 1), mesh.P(f, 5) - mesh.P(f, 1);
      const Eigen::Matrix2d Dit = D.inverse().transpose();
      B[f].col(0) = Dit * Eigen::Vector2d(-1, -1);
      B[f].col(1) = Dit * Eigen::Vector2d(1, 0);
      B[f].col(2) = Dit * Eigen::Vector2d(0, 1);
      Ginv[f] = mesh.metric(f).inverse();
      area[f] = mesh.tri_area(f);
    }
  }

  Eigen::Vector2d grad(const SurfaceMesh& mesh, const Eigen::VectorXd& u,
                       int f) const {
    return B[f].col(0) * u[mesh.F(f, 0)] + B[f].col(1) * u[mesh.F(f, 1)] +
           B[f].col(2) * u[mesh.F(f, 2)];
  }
  double grad_sq(const Eigen::Vector2d& gc, int f) const {
    return gc.dot(Ginv[f] * gc);
  }
};

double energy_smoothed(const SurfaceMesh& mesh, const FemCache& fem,
                       const Eigen::VectorXd& u, double p, double eps) {
  double E = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    const double q = fem.grad_sq(fem.grad(mesh, u, f), f);
    E += fem.area[f] * std::pow(eps * eps + q, 0.5 * p);
  }
  return E;
}

// Same smoothed energy with a per-face smoothing vector (already squared).
double energy_smoothed(const SurfaceMesh& mesh, const FemCache& fem,
                       const Eigen::VectorXd& u, double p,
                       const std::vector<double>& eps2) {
  double E = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    const double q = fem.grad_sq(fem.grad(mesh, u, f), f);
    E += fem.area[f] * std::pow(eps2[f] + q, 0.5 * p);
  }
  return E;
}

Eigen::VectorXd solve_weighted(const SurfaceMesh& mesh, const FemCache& fem,
                               const std::vector<double>& w,
                               const std::vector<int>& free_idx,
                               const std::vector<int>& vmap,
                               const Eigen::VectorXd& bc, double lin_tol) {
  const int nfree = (int)free_idx.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.nf());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  for (int f = 0; f < mesh.nf(); ++f) {
    const double c = w[f] * fem.area[f];
    for (int a = 0; a < 3; ++a) {
      const int ia = vmap[mesh.F(f, a)];
      if (ia < 0) continue;
      const Eigen::Vector2d ga = fem.Ginv[f] * fem.B[f].col(a);
      for (int b = 0; b < 3; ++b) {
        const double kab = c * fem.B[f].col(b).dot(ga);
        const int vb = mesh.F(f, b), ib = vmap[vb];
        if (ib >= 0)
          trips.emplace_back(ia, ib, kab);
        else
          rhs[ia] -= kab * bc[vb];
      }
    }
  }
  Eigen::SparseMatrix<double> A(nfree, nfree);
  A.setFromTriplets(trips.begin(), trips.end());
  // The weights span many orders of magnitude near p = 1, which starves
  // iterative methods; a sparse Cholesky factorization is exact in that
  // regime and the systems here are small enough for it.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw math_error("mesh potential: the weighted linear solve broke down");
  const Eigen::VectorXd x = ldlt.solve(rhs);
  // Backward-error guard: the residual is compared against the natural
  // ||A||*||x|| + ||b|| scale so wide weight ranges do not trip it.
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(nfree);
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  const double scale =
      rowsum.maxCoeff() * x.cwiseAbs().maxCoeff() + rhs.norm();
  if (scale > 0 && (A * x - rhs).norm() > std::max(lin_tol, 1e-10) * scale)
    throw math_error("mesh potential: the weighted linear solve lost accuracy");
  Eigen::VectorXd full = bc;
  for (int i = 0; i < nfree; ++i) full[free_idx[i]] = x[i];
  return full;
}

double weak_residual_masked(const SurfaceMesh& mesh, const FemCache& fem,
                            const Eigen::VectorXd& u, double p, double eps,
                            const std::vector<char>& skip) {
  const int n = mesh.nv();
  std::vector<double> R(n, 0.0), S(n, 0.0);
  for (int f = 0; f < mesh.nf(); ++f) {
    const Eigen::Vector2d gc = fem.grad(mesh, u, f);
    const double q = fem.grad_sq(gc, f);
    if (q <= 0 && p < 2 && eps == 0) continue;  // |0|^{p-1} direction is 0
    const double w = std::pow(eps * eps + q, 0.5 * (p - 2.0));
    const Eigen::Vector2d flow = fem.Ginv[f] * gc;
    const double gnorm = std::sqrt(std::max(q, 0.0));
    for (int a = 0; a < 3; ++a) {
      const int va = mesh.F(f, a);
      if (skip[va]) continue;
      const double term = w * fem.area[f] * fem.B[f].col(a).dot(flow);
      R[va] += term;
      const double ba = std::sqrt(fem.grad_sq(fem.B[f].col(a), f));
      S[va] += w * fem.area[f] * gnorm * ba;
    }
  }
  double worst = 0;
  for (int v = 0; v < n; ++v)
    if (!skip[v] && S[v] > 1e-300) worst = std::max(worst, std::abs(R[v]) / S[v]);
  return worst;
}

double flux_through(const SurfaceMesh& mesh, const FemCache& fem,
                    const Eigen::VectorXd& u, double p, double eps,
                    const std::vector<char>& ring) {
  double flux = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    const Eigen::Vector2d gc = fem.grad(mesh, u, f);
    const double q = fem.grad_sq(gc, f);
    if (q <= 0 && p < 2 && eps == 0) continue;  // |0|^{p-1} direction is 0
    const double w = std::pow(eps * eps + q, 0.5 * (p - 2.0));
    const Eigen::Vector2d flow = fem.Ginv[f] * gc;
    for (int a = 0; a < 3; ++a)
      if (ring[mesh.F(f, a)])
        flux += w * fem.area[f] * fem.B[f].col(a).dot(flow);
  }
  return flux;
}

}  // namespace

// ----------------------------------------------------------------- radial

SolveReport capacity_potential(const RadialGrid& g, double p, int outer_node) {
  check_p(p, RADIAL_P_FLOOR, "radial potential");
  const int N = g.N();
  if (outer_node < 0) outer_node = N;
  if (outer_node < 1 || outer_node > N)
    throw config_error("radial potential: outer node index out of range");
  const double lambda = 1.0 / (p - 1.0);
  const auto lv = log_cell_means(g);

  // closed-form discrete minimizer: drops proportional to dt * vbar^{-lambda}
  std::vector<double> logS(outer_node + 1);
  logS[outer_node] = NEG_INF;
  for (int i = outer_node - 1; i >= 0; --i)
    logS[i] =
        logaddexp(std::log(g.dt(i)) - lambda * lv[i], logS[i + 1]);

  SolveReport rep;
  rep.p = p;
  rep.u = Eigen::VectorXd::Zero(N + 1);
  rep.log_u = Eigen::VectorXd::Constant(N + 1, NEG_INF);
  for (int i = 0; i < outer_node; ++i) {
    rep.log_u[i] = logS[i] - logS[0];
    rep.u[i] = std::exp(rep.log_u[i]);
  }
  rep.capacity = rep.energy = std::exp((1.0 - p) * logS[0]);
  rep.collar_flux = rep.capacity;  // the discrete flux is constant
  rep.residual_weak = weak_residual(g, rep.log_u, p, outer_node);
  rep.eps_final = 0;
  rep.energy_trace = {rep.energy};
  rep.iterations = 0;
  return rep;
}

double weak_residual(const RadialGrid& g, const Eigen::VectorXd& log_u,
                     double p, int outer_node) {
  const int N = g.N();
  if (outer_node < 0) outer_node = N;
  if (log_u.size() != N + 1)
    throw config_error("radial residual: field size does not match the grid");
  const auto lv = log_cell_means(g);
  double ref = 0, worst = 0;
  for (int i = 0; i < outer_node; ++i) {
    if (!(log_u[i] > log_u[i + 1])) return 1.0;  // not a decreasing potential
    const double ldrop = logsubexp(log_u[i], log_u[i + 1]);
    const double lF =
        (p - 1.0) * (ldrop - std::log(g.dt(i))) + lv[i];
    if (i == 0)
      ref = lF;
    else
      worst = std::max(worst, std::abs(std::expm1(lF - ref)));
  }
  return worst;
}

double p_energy(const RadialGrid& g, const Eigen::VectorXd& u, double p) {
  if (u.size() != g.N() + 1)
    throw config_error("radial energy: field size does not match the grid");
  double E = 0;
  for (int i = 0; i < g.N(); ++i) {
    const double slope = (u[i + 1] - u[i]) / g.dt(i);
    E += std::pow(std::abs(slope), p) * g.mm.mean_v(g.t[i], g.t[i + 1]) *
         g.dt(i);
  }
  return E;
}

KernelReport green_kernel_numeric(const RadialGrid& g, double p,
                                  std::vector<double> radii,
                                  double cauchy_tol) {
  check_p(p, RADIAL_P_FLOOR, "radial kernel");
  const int N = g.N();
  const double lambda = 1.0 / (p - 1.0);
  const auto K = green_kernel_model(g.mm, p);  // throws when parabolic

  if (radii.empty())
    for (double f : {0.25, 0.375, 0.5, 0.75, 1.0})
      radii.push_back(g.eps_pole + f * (g.T_out - g.eps_pole));
  std::vector<int> nodes;
  for (double R : radii) {
    if (!(R > g.eps_pole) || R > g.T_out * (1 + 1e-12))
      throw config_error("kernel exhaustion: radius outside the domain");
    int j = (int)(std::lower_bound(g.t.begin(), g.t.end(), R * (1 - 1e-12)) -
                  g.t.begin());
    j = std::min(j, N);
    if (j < 8)
      throw config_error("kernel exhaustion: radius too close to the collar");
    if (nodes.empty() || j > nodes.back()) nodes.push_back(j);
  }
  if (nodes.back() != N) nodes.push_back(N);

  const auto lv = log_cell_means(g);
  KernelReport out;
  out.p = p;
  Eigen::VectorXd prev_raw, prev_corr;
  for (size_t stage = 0; stage < nodes.size(); ++stage) {
    const int nj = nodes[stage];
    const double Rj = g.t[nj];
    Eigen::VectorXd raw = Eigen::VectorXd::Constant(N + 1, NEG_INF);
    for (int i = nj - 1; i >= 0; --i)
      raw[i] = logaddexp(std::log(g.dt(i)) - lambda * lv[i], raw[i + 1]);
    if (stage > 0)
      for (int i = 0; i <= nodes[stage - 1]; ++i)
        if (raw[i] < prev_raw[i] - 1e-10)
          throw math_error(
              "kernel exhaustion lost monotonicity on a radial grid");
    const double log_tail = K.log_value(Rj);
    Eigen::VectorXd corr(N + 1);
    for (int i = 0; i <= N; ++i) corr[i] = logaddexp(raw[i], log_tail);
    out.radii.push_back(Rj);
    out.capacities.push_back(std::exp((1.0 - p) * raw[0]));
    if (stage > 0) {
      double gap = 0;
      for (int i = 0; i <= nodes[stage - 1]; ++i)
        gap = std::max(gap, std::abs(corr[i] - prev_corr[i]));
      out.cauchy_gaps.push_back(gap);
    }
    prev_raw = raw;
    prev_corr = corr;
  }
  out.log_G = prev_corr;
  out.collar_log_value = out.log_G[0];
  out.converged =
      !out.cauchy_gaps.empty() && out.cauchy_gaps.back() <= cauchy_tol;
  return out;
}

// ------------------------------------------------------------------ meshes

SolveReport capacity_potential(const SurfaceMesh& mesh, const PSolveConfig& cfg,
                               const std::vector<int>& ones,
                               const std::vector<int>& zeros,
                               const Eigen::VectorXd* warm) {
  check_p(cfg.p, MESH_P_FLOOR, "mesh potential");
  if (ones.empty() || zeros.empty())
    throw config_error("mesh potential: a Dirichlet vertex set is empty");
  const int n = mesh.nv();
  std::vector<char> fixed(n, 0);
  Eigen::VectorXd bc = Eigen::VectorXd::Zero(n);
  for (int v : ones) {
    if (v < 0 || v >= n)
      throw config_error("mesh potential: Dirichlet vertex out of range");
    fixed[v] = 1;
    bc[v] = 1.0;
  }
  for (int v : zeros) {
    if (v < 0 || v >= n)
      throw config_error("mesh potential: Dirichlet vertex out of range");
    if (fixed[v] && bc[v] == 1.0)
      throw config_error("mesh potential: a vertex carries both boundary values");
    fixed[v] = 1;
  }
  std::vector<int> vmap(n, -1), free_idx;
  for (int v = 0; v < n; ++v)
    if (!fixed[v]) {
      vmap[v] = (int)free_idx.size();
      free_idx.push_back(v);
    }
  if (free_idx.empty())
    throw config_error("mesh potential: no interior vertices remain");

  const FemCache fem(mesh);
  SolveReport rep;
  rep.p = cfg.p;
  const double p = cfg.p;

  Eigen::VectorXd u;
  std::vector<double> w(mesh.nf(), 1.0);
  if (warm) {
    if (warm->size() != n)
      throw config_error("mesh potential: warm start has the wrong size");
    u = *warm;
    for (int v = 0; v < n; ++v)
      if (fixed[v]) u[v] = bc[v];
  } else {
    u = solve_weighted(mesh, fem, w, free_idx, vmap, bc, cfg.lin_tol);
    ++rep.iterations;
  }

  if (p == 2.0) {
    if (warm) {
      u = solve_weighted(mesh, fem, w, free_idx, vmap, bc, cfg.lin_tol);
      ++rep.iterations;
    }
    rep.eps_final = 0;
    rep.energy_trace.push_back(energy_smoothed(mesh, fem, u, p, 0.0));
  } else {
    double g2 = 0, asum = 0;
    for (int f = 0; f < mesh.nf(); ++f) {
      g2 += fem.area[f] * fem.grad_sq(fem.grad(mesh, u, f), f);
      asum += fem.area[f];
    }
    double gamma = std::sqrt(g2 / asum);
    if (!(gamma > 0) || !std::isfinite(gamma)) gamma = 1.0;
    // Absolute floor keeping exactly-flat faces finite; everything above
    // machine noise is smoothed relative to its own gradient scale.
    const double floor2 = (1e-14 * gamma) * (1e-14 * gamma);

    // Smoothing ladder: each level freezes a per-face smoothing
    // eps_f^2 = rel^2 * |grad u|_f^2 evaluated at level entry, then runs
    // reweighted solves to an energy stall.  Scaling the smoothing by the
    // local gradient regularizes the exponentially small far field by the
    // same relative amount as the collar region, where a single global
    // epsilon would linearize everything below it.  Freezing it per level
    // keeps each level a monotone descent on one fixed smoothed energy.
    std::vector<double> eps2(mesh.nf());
    for (int lev = 0; lev <= cfg.eps_levels && rep.iterations < cfg.max_iters;
         ++lev) {
      const double rel = std::max(std::pow(0.5, lev), cfg.eps_floor_rel);
      rep.eps_final = rel;
      for (int f = 0; f < mesh.nf(); ++f) {
        const double q = fem.grad_sq(fem.grad(mesh, u, f), f);
        eps2[f] = rel * rel * q + floor2;
      }
      double E = energy_smoothed(mesh, fem, u, p, eps2);
      bool stalled = false;
      for (int it = 0;
           it < cfg.iters_per_eps && rep.iterations < cfg.max_iters && !stalled;
           ++it) {
        for (int f = 0; f < mesh.nf(); ++f) {
          const double q = fem.grad_sq(fem.grad(mesh, u, f), f);
          w[f] = std::pow(eps2[f] + q, 0.5 * (p - 2.0));
        }
        const Eigen::VectorXd uh =
            solve_weighted(mesh, fem, w, free_idx, vmap, bc, cfg.lin_tol);
        ++rep.iterations;
        // monotone energy descent: accept the first non-increasing step
        bool accepted = false;
        double tau = 1.0;
        for (int bt = 0; bt < 40 && !accepted; ++bt, tau *= 0.5) {
          const Eigen::VectorXd ut = u + tau * (uh - u);
          const double Et = energy_smoothed(mesh, fem, ut, p, eps2);
          if (Et <= E * (1.0 + 1e-14)) {
            stalled = (E - Et) <= cfg.tol_energy * std::max(E, 1e-300);
            u = ut;
            E = Et;
            rep.energy_trace.push_back(E);
            accepted = true;
          }
        }
        if (!accepted) stalled = true;  // no descent direction left here
      }
      if (rel <= cfg.eps_floor_rel) break;
    }
  }

  rep.u = u;
  rep.log_u.resize(n);
  for (int v = 0; v < n; ++v)
    rep.log_u[v] = u[v] > 0 ? std::log(u[v]) : NEG_INF;
  rep.energy = rep.capacity = energy_smoothed(mesh, fem, u, p, 0.0);
  std::vector<char> ring(n, 0);
  for (int v : ones) ring[v] = 1;
  rep.collar_flux = flux_through(mesh, fem, u, p, 0.0, ring);
  rep.residual_weak = weak_residual_masked(mesh, fem, u, p, 0.0, fixed);
  return rep;
}

SolveReport capacity_potential(const SurfaceMesh& mesh,
                               const PSolveConfig& cfg) {
  if (mesh.collar.empty() || mesh.outer.empty())
    throw config_error("mesh potential: mesh has no boundary rings");
  return capacity_potential(mesh, cfg, mesh.collar, mesh.outer, nullptr);
}

double p_energy(const SurfaceMesh& mesh, const Eigen::VectorXd& u, double p) {
  if (u.size() != mesh.nv())
    throw config_error("mesh energy: field size does not match the mesh");
  const FemCache fem(mesh);
  return energy_smoothed(mesh, fem, u, p, 0.0);
}

double collar_flux(const SurfaceMesh& mesh, const Eigen::VectorXd& u, double p,
                   double eps_smooth) {
  if (mesh.collar.empty())
    throw config_error("collar flux: mesh has no collar ring");
  const FemCache fem(mesh);
  std::vector<char> ring(mesh.nv(), 0);
  for (int v : mesh.collar) ring[v] = 1;
  return flux_through(mesh, fem, u, p, eps_smooth, ring);
}

double weak_residual(const SurfaceMesh& mesh, const Eigen::VectorXd& u,
                     double p, double eps_smooth) {
  const FemCache fem(mesh);
  std::vector<char> skip(mesh.nv(), 0);
  for (int v = 0; v < mesh.nv(); ++v)
    if (mesh.on_boundary[v]) skip[v] = 1;
  return weak_residual_masked(mesh, fem, u, p, eps_smooth, skip);
}

KernelReport green_kernel_numeric(const SurfaceMesh& mesh,
                                  const PSolveConfig& cfg,
                                  std::vector<double> radii,
                                  double cauchy_tol,
                                  const Eigen::VectorXd* warm_start) {
  if (!mesh.has_model)
    throw config_error("mesh kernel: the mesh carries no base model for the tail");
  check_p(cfg.p, MESH_P_FLOOR, "mesh kernel");
  const double lambda = 1.0 / (cfg.p - 1.0);
  const auto K = green_kernel_model(mesh.mm, cfg.p);  // throws when parabolic

  if (radii.empty())
    for (double f : {0.25, 0.375, 0.5, 0.75, 1.0})
      radii.push_back(mesh.eps_pole + f * (mesh.T_out - mesh.eps_pole));
  for (size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] < radii[i + 1]))
      throw config_error("mesh kernel: exhaustion radii must increase");
  if (radii.back() < mesh.T_out * (1 - 1e-12)) radii.push_back(mesh.T_out);
  if (!(radii.front() > mesh.eps_pole + 3.0 * mesh.h_mesh))
    throw config_error("mesh kernel: first exhaustion radius hugs the collar");

  KernelReport out;
  out.p = cfg.p;
  const int n = mesh.nv();
  Eigen::VectorXd warm;
  bool have_warm = false;
  if (warm_start) {
    if (warm_start->size() != n)
      throw config_error("mesh kernel: warm start has the wrong size");
    warm = *warm_start;
    have_warm = true;
  }
  Eigen::VectorXd prev_raw, prev_corr;
  double prev_R = 0;
  for (size_t stage = 0; stage < radii.size(); ++stage) {
    const double Rj = radii[stage];
    std::vector<int> zeros;
    for (int v = 0; v < n; ++v)
      if (mesh.r_field[v] >= Rj * (1 - 1e-12)) zeros.push_back(v);
    if (zeros.empty())
      throw config_error("mesh kernel: exhaustion radius beyond the domain rim");
    auto rep = capacity_potential(mesh, cfg, mesh.collar, zeros,
                                  have_warm ? &warm : nullptr);
    warm = rep.u;
    have_warm = true;
    out.iterations += rep.iterations;
    const double log_cap = std::log(rep.capacity);
    Eigen::VectorXd raw(n), corr(n);
    const double log_tail = K.log_value(Rj);
    for (int v = 0; v < n; ++v) {
      raw[v] = rep.log_u[v] - lambda * log_cap;
      corr[v] = logaddexp(raw[v], log_tail);
    }
    if (stage > 0) {
      // exhaustion growth, judged where the potential is far from the rim
      for (int v = 0; v < n; ++v)
        if (mesh.r_field[v] <= 0.5 * prev_R && raw[v] < prev_raw[v] - 0.02)
          throw math_error("kernel exhaustion lost monotonicity on the mesh");
      double gap = 0;
      for (int v = 0; v < n; ++v)
        if (mesh.r_field[v] <= prev_R - 2.0 * mesh.h_mesh)
          gap = std::max(gap, std::abs(corr[v] - prev_corr[v]));
      out.cauchy_gaps.push_back(gap);
    }
    out.radii.push_back(Rj);
    out.capacities.push_back(rep.capacity);
    prev_raw = raw;
    prev_corr = corr;
    prev_R = Rj;
  }
  out.log_G = prev_corr;
  out.last_stage_u = warm;
  double cl = 0;
  for (int v : mesh.collar) cl += out.log_G[v];
  out.collar_log_value = cl / (double)mesh.collar.size();
  out.converged =
      !out.cauchy_gaps.empty() && out.cauchy_gaps.back() <= cauchy_tol;
  return out;
}

}  // namespace fakedist
