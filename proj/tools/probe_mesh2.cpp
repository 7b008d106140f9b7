// Probe: mesh kernel accuracy vs IRLS budget at small p.
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdlib>

#include "fakedist/imcf.hpp"

using namespace fakedist;

int main(int argc, char** argv) {
  const double p = argc > 1 ? std::atof(argv[1]) : 1.125;
  const int ipe = argc > 2 ? std::atoi(argv[2]) : 40;
  const double t_out = argc > 3 ? std::atof(argv[3]) : 1.8;
  const double band_hi = 0.25 + 0.5 * t_out;
  auto mm = solve_warping(CurvatureProfile::constant(1.0), 2, 8.0);
  auto mesh = build_warped_surface(
      mm, [](double, double) { return 1.0; }, 24, 72, 0.2, t_out);
  PSolveConfig cfg;
  cfg.p = p;
  cfg.iters_per_eps = ipe;
  cfg.max_iters = 40000;
  auto K = green_kernel_model(mm, p);
  auto t0 = std::chrono::steady_clock::now();
  auto kr = green_kernel_numeric(mesh, cfg, {}, 5e-2, nullptr);
  auto t1 = std::chrono::steady_clock::now();
  auto fd = fake_distance(kr, K);
  double worst = 0;
  for (int v = 0; v < mesh.nv(); ++v)
    if (mesh.r_field[v] >= 0.5 && mesh.r_field[v] <= band_hi)
      worst = std::max(worst, std::abs(fd.rho[v] - mesh.r_field[v]));
  // dynamic range of log G across the band
  double lgmin = 1e300, lgmax = -1e300;
  for (int v = 0; v < mesh.nv(); ++v)
    if (std::isfinite(kr.log_G[v])) {
      lgmin = std::min(lgmin, kr.log_G[v]);
      lgmax = std::max(lgmax, kr.log_G[v]);
    }
  std::printf(
      "p=%.5f ipe=%d T=%.1f iters=%d conv=%d band_err=%.4f logG:[%.1f,%.1f] "
      "t=%.1fs\n",
      p, ipe, t_out, kr.iterations, (int)kr.converged, worst, lgmin, lgmax,
      std::chrono::duration<double>(t1 - t0).count());
  return 0;
}
