// Probe: flow driver behavior after per-stage refinement.
#include <cstdio>
#include <cmath>

#include "fakedist/imcf.hpp"

using namespace fakedist;

static void report_point(const RadialGrid& g, const FlowResult& fr,
                         const char* tag) {
  std::printf("=== %s ===\n", tag);
  std::printf("  trace:");
  for (double t : fr.cauchy_trace) std::printf(" %.3e", t);
  std::printf("\n  extrap_stage=%d converged=%d\n", fr.extrap_stage,
              (int)fr.converged);
  double worst = 0, at = 0;
  for (int i = 0; i <= g.N(); ++i) {
    double e = std::abs(fr.rho1[i] - g.t[i]) / g.t[i];
    if (e > worst) { worst = e; at = g.t[i]; }
  }
  std::printf("  rho1 rel_err=%.3e at t=%.3f\n", worst, at);
  auto lim = limit_product_audit(g, fr, 0.25 * (g.T_out - g.eps_pole) > 0.25
                                             ? 0.25
                                             : 0.1);
  std::printf("  limit product: lhs=%.6f pass=%d (%s)\n", lim.lhs,
              (int)lim.pass, lim.location.c_str());
  auto mc = check_mean_curvature_bound(g, fr, 0.25);
  std::printf("  mc: lhs=%.4f pass=%d\n", mc.lhs, (int)mc.pass);
}

int main() {
  auto flat2 = solve_warping(CurvatureProfile::constant(0.0), 2, 10.0);
  auto g1 = build_radial_grid(flat2, 0.25, 4.0, 800);
  auto fr1 = run_point_flow(g1, ContinuationSchedule::dyadic(8));
  report_point(g1, fr1, "flat m=2 point N=800");
  int i1 = 0;
  while (g1.t[i1] < 1.0) ++i1;
  std::printf("  w(1)=%.6f vs log2pi=%.6f\n", fr1.w[i1],
              std::log(2 * M_PI));

  auto hyp3 = solve_warping(CurvatureProfile::constant(1.0), 3, 10.0);
  auto g2 = build_radial_grid(hyp3, 0.3, 3.0, 600);
  auto fr2 = run_point_flow(g2, ContinuationSchedule::dyadic(8));
  report_point(g2, fr2, "hyp m=3 point N=600");

  // domain flow hyperbolic a=1
  auto g3 = build_radial_grid(hyp3, 0.2, 4.0, 800);
  auto fr3 = run_domain_flow(g3, 1.0, ContinuationSchedule::dyadic(8));
  std::printf("=== hyp m=3 domain a=1 N=800 ===\n  trace:");
  for (double t : fr3.cauchy_trace) std::printf(" %.3e", t);
  std::printf("\n  extrap_stage=%d converged=%d Ri=%.5f Ro=%.5f\n",
              fr3.extrap_stage, (int)fr3.converged, fr3.R_i, fr3.R_o);
  auto sw = sandwich_audit(g3, fr3, 0.0, 0.02);
  std::printf("  sandwich lhs=%.4e pass=%d (%s)\n", sw.lhs, (int)sw.pass,
              sw.location.c_str());
  double worstw = 0;
  for (int i = 0; i <= g3.N(); ++i) {
    if (g3.t[i] < 1.0 || g3.t[i] > 3.5 || !std::isfinite(fr3.w[i])) continue;
    worstw = std::max(worstw, std::abs(fr3.w[i] - (hyp3.log_v(fr3.rho1[i]) -
                                                   hyp3.log_v(1.0))));
  }
  std::printf("  w vs log v(rho1)-log v(a): worst=%.4e\n", worstw);
  const double H_plus = 2.0 * hyp3.hp_at(1.0) / hyp3.h_at(1.0);
  auto gb = check_flow_gradient_bound(g3, fr3, H_plus);
  std::printf("  gb lhs=%.4f rhs=%.4f pass=%d\n", gb.lhs, gb.rhs,
              (int)gb.pass);

  // quadratic decay: flat m=3 and power law
  auto flat3 = solve_warping(CurvatureProfile::constant(0.0), 3, 12.0);
  auto g4 = build_radial_grid(flat3, 0.3, 5.0, 800);
  auto fr4 = run_domain_flow(g4, 1.0, ContinuationSchedule::dyadic(8));
  auto qd = explicit_quadratic_decay_bound(g4, fr4, 0.0, 2.0, 0.1);
  std::printf("=== flat m=3 domain a=1: qd lhs=%.4f pass=%d (%s)\n", qd.lhs,
              (int)qd.pass, qd.location.c_str());

  auto mmq = power_law_model(3, 0.5 * (1 + std::sqrt(5.0)), 12.0);
  auto g5 = build_radial_grid(mmq, 0.3, 5.0, 800);
  auto fr5 = run_domain_flow(g5, 1.0, ContinuationSchedule::dyadic(8));
  const double Hq = 2.0 * 0.5 * (1 + std::sqrt(5.0));
  auto qdq = explicit_quadratic_decay_bound(g5, fr5, 1.0, Hq, 0.1);
  std::printf("=== power-law domain a=1: qd lhs=%.4f pass=%d (%s)\n", qdq.lhs,
              (int)qdq.pass, qdq.location.c_str());
  std::printf("  Ri=%.4f Ro=%.4f trace:", fr5.R_i, fr5.R_o);
  for (double t : fr5.cauchy_trace) std::printf(" %.3e", t);
  std::printf("\n");
  double tail_lw = 0, tail_rhs = 1e300;
  for (int i = 0; i < g5.N(); ++i)
    if (0.5 * (g5.t[i] + g5.t[i + 1]) > 4.0) {
      tail_lw = std::max(tail_lw,
                         std::abs(fr5.w[i + 1] - fr5.w[i]) / g5.dt(i));
      tail_rhs = std::min(tail_rhs, fr5.R_o * Hq / fr5.rho1[i]);
    }
  std::printf("  tail lw=%.4f rhs=%.4f\n", tail_lw, tail_rhs);
  return 0;
}
