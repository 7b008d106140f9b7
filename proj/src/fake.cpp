#include "fakedist/fake.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fakedist/common.hpp"

namespace fakedist {

namespace {

double qflux(double slope, double p) {
  if (slope == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(slope), p - 1.0), slope);
}

// |psi'|^{p-2} psi' for psi(t) = t^2 composed with the drift of v_h:
// [v^{-1} (v |psi'|^{p-2} psi')'](s) = 2^{p-1} [(p-1) s^{p-2} + s^{p-1} v'/v].
double composed_drift(const ModelManifold& mm, double s, double p) {
  const double vpv = (mm.m - 1) * mm.hp_at(s) / mm.h_at(s);
  return std::pow(2.0, p - 1.0) *
         ((p - 1.0) * std::pow(s, p - 2.0) + std::pow(s, p - 1.0) * vpv);
}

struct FaceBasis {
  Eigen::Matrix2d Ainv;  // chart-gradient solve for the three hats
  Eigen::Vector2d grad(int corner) const {
    switch (corner) {
      case 1: return Ainv.col(0);
      case 2: return Ainv.col(1);
      default: return -(Ainv.col(0) + Ainv.col(1));
    }
  }
};

FaceBasis face_basis(const SurfaceMesh& mesh, int f) {
  Eigen::Matrix2d A;
  A << mesh.P(f, 2) - mesh.P(f, 0), mesh.P(f, 3) - mesh.P(f, 1),
      mesh.P(f, 4) - mesh.P(f, 0), mesh.P(f, 5) - mesh.P(f, 1);
  // columns of A^{-T} are the hat gradients of corners 1 and 2
  return FaceBasis{A.inverse().transpose()};
}

// Normalized worst hat residual of
//   div(|grad z|^{p-2} grad z) = drift(rho) |grad rho|^p
// with z and the drift supplied by the caller; shared by the plain and the
// composed checks.
template <class Drift>
double mesh_weak_drift_residual(const SurfaceMesh& mesh,
                                const Eigen::VectorXd& z,
                                const Eigen::VectorXd& rho, double p,
                                double band, Drift&& drift) {
  if (z.size() != mesh.nv() || rho.size() != mesh.nv())
    throw config_error("weak residual: field size does not match the mesh");
  const double lo = mesh.eps_pole + band, hi = mesh.T_out - band;
  Eigen::VectorXd resid = Eigen::VectorXd::Zero(mesh.nv());
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(mesh.nv());
  for (int f = 0; f < mesh.nf(); ++f) {
    const auto fb = face_basis(mesh, f);
    const Eigen::Matrix2d Gi = mesh.metric(f).inverse();
    const double area = mesh.tri_area(f);
    const Eigen::Vector2d gz = cell_gradient(mesh, z, f);
    const Eigen::Vector2d gr = cell_gradient(mesh, rho, f);
    const double ngz = std::sqrt(std::max(0.0, double(gz.dot(Gi * gz))));
    const double ngr = std::sqrt(std::max(0.0, double(gr.dot(Gi * gr))));
    const double w = ngz > 0 ? std::pow(ngz, p - 2.0) : 0.0;
    const double rbar =
        (rho[mesh.F(f, 0)] + rho[mesh.F(f, 1)] + rho[mesh.F(f, 2)]) / 3.0;
    const double bulk = drift(rbar) * std::pow(ngr, p) * area / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.F(f, k);
      const double a = w * double(gz.dot(Gi * fb.grad(k))) * area;
      resid[v] += a + bulk;
      scale[v] += std::abs(a) + std::abs(bulk);
    }
  }
  double worst = 0;
  for (int v = 0; v < mesh.nv(); ++v) {
    if (mesh.on_boundary[v]) continue;
    if (mesh.r_field[v] < lo || mesh.r_field[v] > hi) continue;
    if (scale[v] > 0) worst = std::max(worst, resid[v] / scale[v]);
  }
  return worst;
}

}  // namespace

FakeDistanceField fake_distance(const KernelReport& kernel,
                                const ModelKernel& model) {
  if (std::abs(kernel.p - model.p) > 1e-12)
    throw config_error("fake distance: kernel and model carry different p");
  FakeDistanceField fd;
  fd.p = kernel.p;
  fd.rho.resize(kernel.log_G.size());
  for (Eigen::Index i = 0; i < kernel.log_G.size(); ++i) {
    const auto inv = invert_kernel_log(model, kernel.log_G[i]);
    fd.rho[i] = std::max(inv.t, 0.0);
    if (inv.extrapolated) ++fd.extrapolated;
  }
  return fd;
}

EstimateAudit check_gradient_bound(const RadialGrid& g,
                                   const FakeDistanceField& fd, double band,
                                   double tol) {
  if (fd.rho.size() != g.N() + 1)
    throw config_error("gradient bound: field size does not match the grid");
  double h = 0;
  for (int i = 0; i < g.N(); ++i) h = std::max(h, g.dt(i));
  if (tol < 0) tol = 5.0 * h;
  double lhs = 0, at = g.t[0];
  for (int i = 0; i < g.N(); ++i) {
    const double mid = 0.5 * (g.t[i] + g.t[i + 1]);
    if (mid < g.eps_pole + band || mid > g.T_out - band) continue;
    const double s = std::abs(fd.rho[i + 1] - fd.rho[i]) / g.dt(i);
    if (s > lhs) {
      lhs = s;
      at = mid;
    }
  }
  return EstimateAudit::inequality("gradient bound |grad rho| <= 1", lhs, 1.0,
                                   tol, "cell at t=" + fmt_g15(at));
}

EstimateAudit check_gradient_bound(const SurfaceMesh& mesh,
                                   const FakeDistanceField& fd, double band,
                                   double tol) {
  if (fd.rho.size() != mesh.nv())
    throw config_error("gradient bound: field size does not match the mesh");
  if (tol < 0) tol = 5.0 * mesh.h_mesh;
  const double lo = mesh.eps_pole + band, hi = mesh.T_out - band;
  double lhs = 0;
  int at = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    bool in = true;
    for (int k = 0; k < 3 && in; ++k) {
      const int v = mesh.F(f, k);
      in = !mesh.on_boundary[v] && mesh.r_field[v] >= lo &&
           mesh.r_field[v] <= hi;
    }
    if (!in) continue;
    const double s = cell_grad_norm(mesh, fd.rho, f);
    if (s > lhs) {
      lhs = s;
      at = f;
    }
  }
  return EstimateAudit::inequality("gradient bound |grad rho| <= 1", lhs, 1.0,
                                   tol, "face " + std::to_string(at));
}

double pde_residual_rho(const RadialGrid& g, const Eigen::VectorXd& rho,
                        double p, double band) {
  const int N = g.N();
  if (rho.size() != N + 1)
    throw config_error("weak residual: field size does not match the grid");
  const auto& mm = g.mm;

  // per-cell slope, flux and exact cell integral of d/dt[v(rho(t))] * c with
  // c = v(t)/v(rho) frozen at the cell midpoint (c = 1 when rho == t)
  std::vector<double> slope(N), flux(N), cfac(N), vbar_rho(N);
  for (int i = 0; i < N; ++i) {
    const double dt = g.dt(i);
    slope[i] = (rho[i + 1] - rho[i]) / dt;
    flux[i] = qflux(slope[i], p) * mm.mean_v(g.t[i], g.t[i + 1]);
    const double rmid = 0.5 * (rho[i] + rho[i + 1]);
    const double tmid = 0.5 * (g.t[i] + g.t[i + 1]);
    cfac[i] = rmid > 0 ? mm.v(tmid) / mm.v(rmid) : 1.0;
    vbar_rho[i] = slope[i] != 0.0
                      ? (mm.V(rho[i + 1]) - mm.V(rho[i])) / (dt * slope[i])
                      : 0.0;
  }
  double worst = 0;
  for (int i = 1; i < N; ++i) {
    if (g.t[i] < g.eps_pole + band || g.t[i] > g.T_out - band) continue;
    const double A = flux[i - 1] - flux[i];
    const double q_l = qflux(slope[i - 1], p), q_r = qflux(slope[i], p);
    const double bulk_l =
        slope[i - 1] != 0.0
            ? q_l * cfac[i - 1] * (mm.v(rho[i]) - vbar_rho[i - 1])
            : 0.0;
    const double bulk_r =
        slope[i] != 0.0 ? q_r * cfac[i] * (vbar_rho[i] - mm.v(rho[i])) : 0.0;
    const double scale = std::abs(flux[i - 1]) + std::abs(flux[i]) +
                         std::abs(bulk_l) + std::abs(bulk_r);
    if (scale > 0)
      worst = std::max(worst, std::abs(A + bulk_l + bulk_r) / scale);
  }
  return worst;
}

double pde_residual_rho(const SurfaceMesh& mesh, const Eigen::VectorXd& rho,
                        double p, double band) {
  if (!mesh.has_model)
    throw config_error("weak residual: the mesh carries no base model");
  const auto& mm = mesh.mm;
  return mesh_weak_drift_residual(
      mesh, rho, rho, p, band, [&](double s) {
        return (mm.m - 1) * mm.hp_at(s) / mm.h_at(s);
      });
}

double pde_residual_rho_squared(const RadialGrid& g,
                                const Eigen::VectorXd& rho, double p,
                                double band) {
  const int N = g.N();
  if (rho.size() != N + 1)
    throw config_error("weak residual: field size does not match the grid");
  const auto& mm = g.mm;
  std::vector<double> flux(N), bulkw(N);
  for (int i = 0; i < N; ++i) {
    const double dt = g.dt(i);
    const double zslope = (rho[i + 1] * rho[i + 1] - rho[i] * rho[i]) / dt;
    flux[i] = qflux(zslope, p) * mm.mean_v(g.t[i], g.t[i + 1]);
    const double rslope = (rho[i + 1] - rho[i]) / dt;
    const double rmid = 0.5 * (rho[i] + rho[i + 1]);
    bulkw[i] = composed_drift(mm, rmid, p) *
               std::pow(std::abs(rslope), p) *
               mm.mean_v(g.t[i], g.t[i + 1]) * dt * 0.5;
  }
  double worst = 0;
  for (int i = 1; i < N; ++i) {
    if (g.t[i] < g.eps_pole + band || g.t[i] > g.T_out - band) continue;
    const double A = flux[i - 1] - flux[i];
    const double B = bulkw[i - 1] + bulkw[i];
    const double scale =
        std::abs(flux[i - 1]) + std::abs(flux[i]) + std::abs(B);
    if (scale > 0) worst = std::max(worst, std::abs(A + B) / scale);
  }
  return worst;
}

double pde_residual_rho_squared(const SurfaceMesh& mesh,
                                const Eigen::VectorXd& rho, double p,
                                double band) {
  if (!mesh.has_model)
    throw config_error("weak residual: the mesh carries no base model");
  const auto& mm = mesh.mm;
  const Eigen::VectorXd z = rho.array().square().matrix();
  return mesh_weak_drift_residual(
      mesh, z, rho, p, band,
      [&](double s) { return composed_drift(mm, s, p); });
}

EstimateAudit check_sharp_gradient_estimate(const RadialGrid& g,
                                            const Eigen::VectorXd& log_u,
                                            double p, double kappa,
                                            double boundary_sup, double tol) {
  const int N = g.N();
  if (log_u.size() != N + 1)
    throw config_error("gradient estimate: field size mismatch");
  double h = 0;
  for (int i = 0; i < N; ++i) h = std::max(h, g.dt(i));
  auto cell = [&](int i) {
    return std::abs(log_u[i + 1] - log_u[i]) / g.dt(i);
  };
  double lhs = 0, at = g.t[0];
  for (int i = 1; i + 1 < N; ++i)
    if (cell(i) > lhs) {
      lhs = cell(i);
      at = 0.5 * (g.t[i] + g.t[i + 1]);
    }
  if (boundary_sup < 0) boundary_sup = std::max(cell(0), cell(N - 1));
  const double rhs =
      std::max((g.mm.m - 1) * kappa / (p - 1.0), boundary_sup);
  if (tol < 0) tol = 5.0 * h * (1.0 + rhs);
  return EstimateAudit::inequality("sharp gradient estimate", lhs, rhs, tol,
                                   "cell at t=" + fmt_g15(at));
}

EstimateAudit check_sharp_gradient_estimate(const SurfaceMesh& mesh,
                                            const Eigen::VectorXd& log_u,
                                            double p, double kappa,
                                            double boundary_sup, double tol) {
  if (log_u.size() != mesh.nv())
    throw config_error("gradient estimate: field size mismatch");
  const int m = mesh.has_model ? mesh.mm.m : 2;
  double lhs = 0, bsup = 0;
  int at = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    bool boundary = false;
    for (int k = 0; k < 3; ++k)
      boundary = boundary || mesh.on_boundary[mesh.F(f, k)];
    const double s = cell_grad_norm(mesh, log_u, f);
    if (boundary) {
      bsup = std::max(bsup, s);
    } else if (s > lhs) {
      lhs = s;
      at = f;
    }
  }
  if (boundary_sup < 0) boundary_sup = bsup;
  const double rhs = std::max((m - 1) * kappa / (p - 1.0), boundary_sup);
  if (tol < 0) tol = 5.0 * mesh.h_mesh * (1.0 + rhs);
  return EstimateAudit::inequality("sharp gradient estimate", lhs, rhs, tol,
                                   "face " + std::to_string(at));
}

double boundary_barrier_rhs(int m, double p, double kappa, double R_x,
                            double tau) {
  if (!(R_x > 0)) throw config_error("boundary barrier: R_x must be positive");
  if (!(tau > 0)) throw config_error("boundary barrier: tau must be positive");
  if (kappa < 0) throw config_error("boundary barrier: kappa must be >= 0");
  const bool infinite = std::isinf(tau);
  const double t_max =
      infinite ? std::max(4.0 * R_x, 16.0) : R_x + tau + 1.0;
  auto mm = solve_warping(CurvatureProfile::constant(kappa * kappa), m, t_max);
  const auto K = green_kernel_model(mm, p, infinite ? POS_INF : R_x + tau);
  return log_kernel_derivative(K, R_x);
}

EstimateAudit check_boundary_barrier(const RadialGrid& g,
                                     const Eigen::VectorXd& log_u, double p,
                                     double kappa, double R_x, double tau,
                                     double tol) {
  if (log_u.size() != g.N() + 1)
    throw config_error("boundary barrier: field size mismatch");
  const double lhs = std::abs(log_u[1] - log_u[0]) / g.dt(0);
  const double rhs = boundary_barrier_rhs(g.mm.m, p, kappa, R_x, tau);
  if (tol < 0) tol = 5.0 * g.dt(0) * (1.0 + rhs);
  return EstimateAudit::inequality("boundary gradient barrier", lhs, rhs, tol,
                                   "collar cell");
}

}  // namespace fakedist
