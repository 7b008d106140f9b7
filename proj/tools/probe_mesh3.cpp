// Probe: mesh point/domain flows on the narrow hyperbolic annulus.
#include <chrono>
#include <cstdio>
#include <cmath>

#include "fakedist/imcf.hpp"

using namespace fakedist;

int main() {
  auto mm = solve_warping(CurvatureProfile::constant(1.0), 2, 8.0);
  auto mesh = build_warped_surface(
      mm, [](double, double) { return 1.0; }, 24, 72, 0.2, 1.2);

  PSolveConfig cfg;
  auto s = ContinuationSchedule::dyadic(3);
  s.tol_flow = 0.05;

  auto t0 = std::chrono::steady_clock::now();
  auto fr = run_point_flow(mesh, cfg, s);
  auto t1 = std::chrono::steady_clock::now();
  std::printf("point: p_end=%.5f conv=%d extrap=%d t=%.1fs\n",
              fr.p_list.back(), (int)fr.converged, fr.extrap_stage,
              std::chrono::duration<double>(t1 - t0).count());
  std::printf("trace:");
  for (double g : fr.cauchy_trace) std::printf(" %.2e", g);
  std::printf("\niters:");
  for (int it : fr.iterations_p) std::printf(" %d", it);
  std::printf("\n");
  double worst = 0, upper = -1e300;
  for (int v = 0; v < mesh.nv(); ++v) {
    if (mesh.r_field[v] >= 0.5 && mesh.r_field[v] <= 0.85)
      worst = std::max(worst, std::abs(fr.rho1[v] - mesh.r_field[v]));
    upper = std::max(upper, fr.rho1[v] - mesh.r_field[v]);
  }
  std::printf("rho1 band_err=%.4f upper=%.4f (5h=%.3f)\n", worst, upper,
              5 * mesh.h_mesh);
  auto mck = check_mean_curvature_bound(mesh, fr, 0.3, -1.0, true);
  auto mc = check_mean_curvature_bound(mesh, fr, 0.3);
  std::printf("mc kappa: pass=%d lhs=%.4f rhs=%.4f | mc: pass=%d lhs=%.4f "
              "rhs=%.4f\n",
              (int)mck.pass, mck.lhs, mck.rhs, (int)mc.pass, mc.lhs, mc.rhs);
  auto lim = limit_product_audit(mesh, fr, 0.3, 0.2);
  std::printf("limit: pass=%d value=%.4f\n", (int)lim.pass, lim.lhs);

  auto s2 = s;
  s2.tol_flow = 0.1;
  auto t2 = std::chrono::steady_clock::now();
  auto fd = run_domain_flow(mesh, cfg, 0.7, s2);
  auto t3 = std::chrono::steady_clock::now();
  std::printf("domain: conv=%d extrap=%d Ri=%.4f Ro=%.4f t=%.1fs\n",
              (int)fd.converged, fd.extrap_stage, fd.R_i, fd.R_o,
              std::chrono::duration<double>(t3 - t2).count());
  std::printf("trace:");
  for (double g : fd.cauchy_trace) std::printf(" %.2e", g);
  std::printf("\n");
  for (double band : {0.2, 0.3, 0.35, 0.4}) {
    auto sw = sandwich_audit(mesh, fd, band, 0.1);
    std::printf("sandwich band=%.2f: pass=%d lhs=%.4f at=%s\n", band,
                (int)sw.pass, sw.lhs, sw.location.c_str());
  }
  return 0;
}
