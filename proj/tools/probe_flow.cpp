// Probe: per-stage continuation behavior on radial and mesh flows.
#include <cstdio>
#include <cmath>

#include "fakedist/imcf.hpp"

using namespace fakedist;

static void radial_point(const ModelManifold& mm, double eps, double T, int N,
                         const char* tag) {
  auto g = build_radial_grid(mm, eps, T, N);
  std::printf("=== radial point %s N=%d ===\n", tag, N);
  std::vector<Eigen::VectorXd> rhos;
  std::vector<double> ps;
  for (int k = 0; k <= 8; ++k) {
    double p = 1.0 + 0.5 * std::pow(0.5, k);
    auto K = green_kernel_model(g.mm, p);
    auto kr = green_kernel_numeric(g, p);
    auto fd = fake_distance(kr, K);
    double worst = 0, at = 0, worst_far = 0;
    for (int i = 0; i <= g.N(); ++i) {
      double e = std::abs(fd.rho[i] - g.t[i]) / g.t[i];
      if (e > worst) { worst = e; at = g.t[i]; }
      if (g.t[i] >= 0.5) worst_far = std::max(worst_far, e);
    }
    double gap = rhos.empty() ? 0.0 : [&] {
      double s = 0;
      for (int i = 0; i <= g.N(); ++i)
        s = std::max(s, std::abs(fd.rho[i] - rhos.back()[i]));
      return s;
    }();
    std::printf("  p=%.8f  rel_err=%.3e (at t=%.3f)  far=%.3e  gap=%.3e\n", p,
                worst, at, worst_far, gap);
    rhos.push_back(fd.rho);
    ps.push_back(p);
  }
  // extrapolation error from each consecutive pair
  for (size_t k = 1; k < rhos.size(); ++k) {
    double worst = 0, at = 0;
    for (int i = 0; i <= g.N(); ++i) {
      double r1 = 2 * rhos[k][i] - rhos[k - 1][i];
      double e = std::abs(r1 - g.t[i]) / g.t[i];
      if (e > worst) { worst = e; at = g.t[i]; }
    }
    std::printf("  extrap(%g,%g): rel_err=%.3e at t=%.3f\n", ps[k - 1], ps[k],
                worst, at);
  }
}

static void mesh_flows() {
  auto mm = solve_warping(CurvatureProfile::constant(1.0), 2, 8.0);
  auto mesh = build_warped_surface(
      mm, [](double, double) { return 1.0; }, 24, 72, 0.2, 1.8);
  std::printf("=== mesh point stages 24x72 h=%.3f ===\n", mesh.h_mesh);
  PSolveConfig cfg;
  cfg.max_iters = 2000;  // generous budget to see true convergence cost
  Eigen::VectorXd warm;
  bool have = false;
  std::vector<Eigen::VectorXd> rhos;
  std::vector<double> ps;
  for (int k = 0; k <= 4; ++k) {
    double p = 1.0 + 0.5 * std::pow(0.5, k);
    PSolveConfig c = cfg;
    c.p = p;
    auto K = green_kernel_model(mm, p);
    auto kr = green_kernel_numeric(mesh, c, {}, 5e-2, have ? &warm : nullptr);
    warm = kr.last_stage_u;
    have = true;
    auto fd = fake_distance(kr, K);
    double worst = 0, sup_gap = 0;
    for (int v = 0; v < mesh.nv(); ++v) {
      if (mesh.r_field[v] >= 0.5 && mesh.r_field[v] <= 1.5)
        worst = std::max(worst, std::abs(fd.rho[v] - mesh.r_field[v]));
      if (!rhos.empty())
        sup_gap = std::max(sup_gap, std::abs(fd.rho[v] - rhos.back()[v]));
    }
    std::printf("  p=%.6f  iters=%d  band_err=%.4f  gap=%.4f  conv=%d\n", p,
                kr.iterations, worst, sup_gap, (int)kr.converged);
    rhos.push_back(fd.rho);
    ps.push_back(p);
  }
  for (size_t k = 1; k < rhos.size(); ++k) {
    double worst = 0;
    for (int v = 0; v < mesh.nv(); ++v)
      if (mesh.r_field[v] >= 0.5 && mesh.r_field[v] <= 1.5)
        worst = std::max(worst,
                         std::abs(2 * rhos[k][v] - rhos[k - 1][v] -
                                  mesh.r_field[v]));
    std::printf("  extrap(%g,%g): band_err=%.4f\n", ps[k - 1], ps[k], worst);
  }

  // domain flow ring radii per stage
  std::printf("=== mesh domain a=0.7 ===\n");
  std::vector<char> inside(mesh.nv(), 0);
  std::vector<int> ones;
  for (int v = 0; v < mesh.nv(); ++v)
    if (mesh.r_field[v] <= 0.7) { ones.push_back(v); inside[v] = 1; }
  std::vector<int> ring;
  for (int v : ones) {
    bool edge = false;
    for (int f : mesh.v2t[v])
      for (int kk = 0; kk < 3; ++kk)
        if (!inside[mesh.F(f, kk)]) edge = true;
    if (edge) ring.push_back(v);
  }
  Eigen::VectorXd wk, wu;
  bool hv = false;
  std::vector<Eigen::VectorXd> wps;
  std::vector<double> ris, ros;
  for (int k = 0; k <= 4; ++k) {
    double p = 1.0 + 0.5 * std::pow(0.5, k);
    PSolveConfig c = cfg;
    c.p = p;
    auto K = green_kernel_model(mm, p);
    auto kr = green_kernel_numeric(mesh, c, {}, 5e-2, hv ? &wk : nullptr);
    wk = kr.last_stage_u;
    auto fd = fake_distance(kr, K);
    double ri = 1e300, ro = -1e300;
    for (int v : ring) {
      ri = std::min(ri, fd.rho[v]);
      ro = std::max(ro, fd.rho[v]);
    }
    auto rep = capacity_potential(mesh, c, ones, mesh.outer,
                                  hv ? &wu : nullptr);
    wu = rep.u;
    hv = true;
    Eigen::VectorXd wp(mesh.nv());
    for (int v = 0; v < mesh.nv(); ++v)
      wp[v] = std::isfinite(rep.log_u[v]) ? (1.0 - p) * rep.log_u[v]
                                          : std::nan("");
    double gap = 0;
    if (!wps.empty())
      for (int v = 0; v < mesh.nv(); ++v)
        if (std::isfinite(wp[v]) && std::isfinite(wps.back()[v]))
          gap = std::max(gap, std::abs(wp[v] - wps.back()[v]));
    std::printf("  p=%.6f  iters=%d+%d  Ri=%.4f Ro=%.4f  wgap=%.4f\n", p,
                kr.iterations, rep.iterations, ri, ro, gap);
    wps.push_back(wp);
    ris.push_back(ri);
    ros.push_back(ro);
  }
  for (size_t k = 1; k < ris.size(); ++k)
    std::printf("  extrap Ri(%zu)=%.4f Ro=%.4f\n", k,
                2 * ris[k] - ris[k - 1], 2 * ros[k] - ros[k - 1]);
}

int main(int argc, char** argv) {
  bool do_mesh = argc > 1 && argv[1][0] == 'm';
  if (do_mesh) {
    mesh_flows();
    return 0;
  }
  auto flat2 = solve_warping(CurvatureProfile::constant(0.0), 2, 10.0);
  radial_point(flat2, 0.25, 4.0, 800, "flat m=2");
  auto hyp3 = solve_warping(CurvatureProfile::constant(1.0), 3, 10.0);
  radial_point(hyp3, 0.3, 3.0, 600, "hyp m=3");
  return 0;
}
