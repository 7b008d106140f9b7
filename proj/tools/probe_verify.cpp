// Probe: verify-module audit magnitudes used to pin test tolerances.
#include <cmath>
#include <cstdio>

#include "fakedist/fake.hpp"
#include "fakedist/verify.hpp"
#include "fakedist/psolve.hpp"

using namespace fakedist;

int main() {
  // ---- radial decay margins (flat m=3, p=2; hyperbolic m=3, p=1.5)
  {
    auto mm = solve_warping(CurvatureProfile::constant(0.0), 3, 12.0);
    auto g = build_radial_grid(mm, 0.05, 8.0, 1200);
    auto kr = green_kernel_numeric(g, 2.0);
    const double S1 = flat_isoperimetric_constant(3);
    const double S = sobolev_from_isoperimetric(S1, 2.0, 3.0);
    auto c = make_constants(2.0, 3.0, S);
    auto a1 = check_decay(g, kr.log_G, c);
    std::printf("flat decay: pass=%d lhs=%.4f (S=%.4f C=%.4f)\n", (int)a1.pass,
                a1.lhs, S, c.decay);
    auto eta = volume_ratio_weight(mm, 3.0);
    std::printf("flat eta(1)=%.6f  3/(4pi)=%.6f\n", eta(1.0),
                3.0 / (4.0 * M_PI));
    auto a2 = check_decay(g, kr.log_G, c, eta);
    std::printf("flat decay w/ measured eta: pass=%d lhs=%.4f\n", (int)a2.pass,
                a2.lhs);
    Eigen::VectorXd inflated = kr.log_G.array() + 10.0;
    auto a3 = check_decay(g, inflated, c);
    std::printf("inflated kernel: pass=%d lhs=%.4f\n", (int)a3.pass, a3.lhs);

    auto mh = solve_warping(CurvatureProfile::constant(1.0), 3, 12.0);
    auto gh = build_radial_grid(mh, 0.05, 8.0, 1200);
    auto kh = green_kernel_numeric(gh, 1.5);
    auto ch = make_constants(1.5, 3.0, 1.0);
    auto a4 = check_decay(gh, kh.log_G, ch);
    std::printf("hyp decay p=1.5: pass=%d lhs=%.4f\n", (int)a4.pass, a4.lhs);
  }
  // ---- radial Harnack form across p
  {
    auto mm = solve_warping(CurvatureProfile::constant(1.0), 3, 12.0);
    std::vector<HarnackSample> hs;
    for (double p : {1.5, 1.2, 1.1, 1.05, 1.02}) {
      auto K = green_kernel_model(mm, p);
      HarnackSample s;
      s.p = p;
      s.sup = K.value(1.0);
      s.inf = K.value(2.0);
      hs.push_back(s);
      std::printf("harnack p=%.3f z=%.5f\n", p,
                  (p - 1) * std::log(s.sup / s.inf));
    }
    std::printf("fit c=%.5f\n", harnack_exponent_fit(hs));
    auto a = check_harnack_form(hs);
    std::printf("harnack form: pass=%d lhs=%.5f rhs=%.5f\n", (int)a.pass,
                a.lhs, a.rhs);
  }
  // ---- radial flux functionals, flat m=2
  {
    auto mm = solve_warping(CurvatureProfile::constant(0.0), 2, 12.0);
    auto g = build_radial_grid(mm, 0.05, 6.0, 1200);
    auto fr = run_point_flow(g, ContinuationSchedule::dyadic(6));
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.N() + 1);
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      auto ff = flux_functionals(g, fr.rho1, ones, 2.0, t);
      std::printf("radial flux t=%.1f A1=%.6f V1=%.6f\n", t, ff.A_u, ff.V_u);
    }
    // linear field: A_u(t->0) -> u(collar)
    Eigen::VectorXd lin(g.N() + 1);
    for (int i = 0; i <= g.N(); ++i) lin[i] = 2.0 + g.t[i];
    auto f0 = flux_functionals(g, fr.rho1, lin, 2.0, 0.08);
    std::printf("radial A_u(0.08)=%.4f u(collar)=%.4f\n", f0.A_u, lin[0]);
    auto fd = check_flux_derivative(g, fr.rho1, lin, 2.0, 1.0);
    std::printf("radial flux derivative: pass=%d lhs=%.4f rhs=%.4f\n",
                (int)fd.pass, fd.lhs, fd.rhs);
    // isoperimetric on the same flow
    auto audits = check_isoperimetric(g, fr);
    int bad = 0;
    double worst = 0;
    for (auto& a : audits) {
      if (!a.pass) ++bad;
      if (a.identity) worst = std::max(worst, std::abs(a.lhs - a.rhs));
    }
    std::printf("radial isoper: %d audits, %d fail, worst dev %.2e\n",
                (int)audits.size(), bad, worst);
  }
  // ---- mesh flux + isoperimetric on a perturbed flat surface
  {
    auto mm = solve_warping(CurvatureProfile::constant(0.0), 2, 8.0);
    auto f = [](double t, double th) {
      return 1.0 + 0.08 * std::sin(3.0 * th) * std::exp(-(t - 0.7) * (t - 0.7) / 0.08);
    };
    auto mesh = build_warped_surface(mm, f, 24, 72, 0.2, 1.2);
    PSolveConfig cfg;
    auto s = ContinuationSchedule::dyadic(3);
    s.tol_flow = 0.05;
    auto fr = run_point_flow(mesh, cfg, s);
    std::printf("perturbed mesh flow: conv=%d extrap=%d\n", (int)fr.converged,
                fr.extrap_stage);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.nv());
    for (double t : {0.5, 0.7, 0.9}) {
      auto ff = flux_functionals(mesh, fr.rho1, ones, 2.0, t);
      auto ls = level_set_measure(mesh, fr.rho1, t);
      std::printf(
          "mesh t=%.1f A1=%.4f V1=%.4f per/vh=%.4f vol/Vh=%.4f\n", t, ff.A_u,
          ff.V_u, ls.perimeter / sphere_volume(mm, t),
          (ls.volume + ball_volume(mm, 0.2)) / ball_volume(mm, t));
    }
    auto audits = check_isoperimetric(mesh, fr);
    int bad = 0;
    for (auto& a : audits)
      if (!a.pass && a.hard) ++bad;
    std::printf("mesh isoper: %d audits, %d hard fails\n", (int)audits.size(),
                bad);
    for (auto& a : audits)
      if (!a.pass)
        std::printf("  FAIL %s lhs=%.4f rhs=%.4f %s\n", a.name.c_str(), a.lhs,
                    a.rhs, a.location.c_str());
    auto fdm = check_flux_derivative(mesh, fr.rho1, ones, 2.0, 0.7);
    std::printf("mesh flux derivative: pass=%d lhs=%.4f rhs=%.4f\n",
                (int)fdm.pass, fdm.lhs, fdm.rhs);
  }
  // ---- half-Harnack on a flat-surface kernel, p=1.5
  {
    auto mm = solve_warping(CurvatureProfile::constant(0.0), 2, 8.0);
    auto mesh = build_warped_surface(
        mm, [](double, double) { return 1.0; }, 24, 72, 0.2, 1.8);
    PSolveConfig cfg;
    cfg.p = 1.5;
    auto kr = green_kernel_numeric(mesh, cfg, {}, 5e-2, nullptr);
    Eigen::VectorXd u = kr.log_G.array().exp();
    const double S = sobolev_from_isoperimetric(flat_isoperimetric_constant(2),
                                                1.5, 2.0);
    auto c = make_constants(1.5, 2.0, S);
    AnnulusSpec a{0.8, 1.0, 0.3};
    for (double q : {2.0, 0.5, -1.0}) {
      auto hh = check_half_harnack(mesh, u, q, a, c);
      std::printf("half-harnack q=%+.1f: pass=%d ratio=%.3e (q0=%.4f)\n", q,
                  (int)hh.pass, hh.lhs, moser_q0(1.5, 2.0, q));
    }
    Eigen::VectorXd onesv = Eigen::VectorXd::Ones(mesh.nv());
    auto hc = check_half_harnack(mesh, onesv, 1.0, a, c);
    std::printf("half-harnack const q=1: pass=%d ratio=%.3e\n", (int)hc.pass,
                hc.lhs);
  }
  // ---- Harnack fit refinement stability (hyperbolic mesh kernels)
  {
    auto mm = solve_warping(CurvatureProfile::constant(1.0), 2, 8.0);
    for (int scale : {1, 2}) {
      auto mesh = build_warped_surface(
          mm, [](double, double) { return 1.0; }, 24 * scale, 72 * scale, 0.2,
          1.2);
      // metric ball around a vertex near r=0.7
      int center = -1;
      double best = 1e300;
      for (int v = 0; v < mesh.nv(); ++v) {
        const double d = std::abs(mesh.r_field[v] - 0.7) +
                         std::abs(mesh.Vx(v, 1) - 3.0);
        if (d < best) {
          best = d;
          center = v;
        }
      }
      auto dist = geodesic_distance(mesh, {center}, {0.0});
      std::vector<HarnackSample> hs;
      for (double p : {1.5, 1.25, 1.125}) {
        PSolveConfig cfg;
        cfg.p = p;
        auto kr = green_kernel_numeric(mesh, cfg, {}, 5e-2, nullptr);
        HarnackSample s;
        s.p = p;
        s.sup = -1e300;
        s.inf = 1e300;
        for (int v = 0; v < mesh.nv(); ++v)
          if (dist[v] <= 0.25) {
            s.sup = std::max(s.sup, std::exp(kr.log_G[v]));
            s.inf = std::min(s.inf, std::exp(kr.log_G[v]));
          }
        hs.push_back(s);
      }
      std::printf("mesh harnack fit (scale %d): c=%.5f  z:", scale,
                  harnack_exponent_fit(hs));
      for (auto& s : hs)
        std::printf(" %.5f", (s.p - 1) * std::log(s.sup / s.inf));
      std::printf("\n");
    }
  }
  return 0;
}
