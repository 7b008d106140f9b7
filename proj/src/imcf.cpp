#include "fakedist/imcf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "fakedist/common.hpp"

namespace fakedist {

namespace {

// 2 a - b with the conventions the flow fields need: agreeing infinities
// extrapolate to themselves instead of NaN.
double extrap2(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a;
  return 2.0 * a - b;
}

double sup_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double g = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::isfinite(a[i]) && std::isfinite(b[i]))
      g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

// Convergence and the Richardson pair from the gap trace: the pair of
// stages with the smallest consecutive sup gap, declared converged when
// that gap is within the schedule tolerance.
void finish_trace(FlowResult& fr, double tol_flow) {
  const auto& tr = fr.cauchy_trace;
  size_t k = 0;
  for (size_t i = 1; i < tr.size(); ++i)
    if (tr[i] < tr[k]) k = i;
  fr.extrap_stage = (int)k + 1;
  fr.converged = !tr.empty() && tr[k] <= tol_flow;
}

// Each cell of the reporting grid split into `factor` equal parts; the
// original nodes stay at stride `factor`.
RadialGrid refine_grid(const RadialGrid& g, int factor) {
  if (factor <= 1) return g;
  RadialGrid r;
  r.mm = g.mm;
  r.eps_pole = g.eps_pole;
  r.T_out = g.T_out;
  r.grading = g.grading;
  r.t.reserve((size_t)g.N() * factor + 1);
  for (int i = 0; i < g.N(); ++i)
    for (int s = 0; s < factor; ++s)
      r.t.push_back(g.t[i] + (g.t[i + 1] - g.t[i]) * s / factor);
  r.t.push_back(g.t[g.N()]);
  return r;
}

// Dyadic stage refinement, capped so one stage stays within a fixed node
// budget. The direct radial solvers are O(N), so doubling the resolution
// with every halving of p-1 keeps the stage bias shrinking at linear cost.
int stage_factor(int k, int N0) {
  int f = 1;
  for (int j = 0; j < k; ++j) {
    if (2LL * f * std::max(N0, 1) > 400000) break;
    f *= 2;
  }
  return f;
}

Eigen::VectorXd restrict_stride(const Eigen::VectorXd& x, int f) {
  if (f <= 1) return x;
  Eigen::VectorXd out((x.size() - 1) / f + 1);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = x[i * f];
  return out;
}

Eigen::VectorXd extrap_field(const Eigen::VectorXd& last,
                             const Eigen::VectorXd& prev) {
  Eigen::VectorXd out(last.size());
  for (Eigen::Index i = 0; i < last.size(); ++i)
    out[i] = extrap2(last[i], prev[i]);
  return out;
}

double max_dt(const RadialGrid& g) {
  double h = 0;
  for (int i = 0; i < g.N(); ++i) h = std::max(h, g.dt(i));
  return h;
}

void require_domain_mode(const FlowResult& fr, const char* what) {
  if (fr.mode != "domain")
    throw config_error(std::string(what) + ": needs a domain-mode flow");
}

// Right side of the gradient bound at flow value wc.
double mc_rhs(const ModelManifold& mm, double wc, bool kappa_form) {
  const int m = mm.m;
  if (kappa_form) {
    const double kap = std::sqrt(std::max(mm.profile.kappa2, 0.0));
    const double wn = wc - std::log(mm.omega);
    return (m - 1) * std::sqrt(kap * kap + std::exp(-2.0 * wn / (m - 1)));
  }
  const double s = mm.inverse_v(std::exp(wc));
  return (m - 1) * mm.hp_at(s) / mm.h_at(s);
}

}  // namespace

ContinuationSchedule ContinuationSchedule::dyadic(int K, double start) {
  if (K < 0 || !(start > 0))
    throw config_error("continuation schedule: bad dyadic parameters");
  ContinuationSchedule s;
  for (int k = 0; k <= K; ++k)
    s.p_list.push_back(1.0 + start * std::pow(0.5, k));
  return s;
}

void ContinuationSchedule::validate(double p_floor) const {
  if (p_list.size() < 2)
    throw config_error("continuation schedule: need at least two stages");
  for (size_t k = 0; k < p_list.size(); ++k) {
    if (!(p_list[k] > 1.0) || p_list[k] > P_CEIL)
      throw config_error("continuation schedule: p outside (1, ceiling]");
    if (p_list[k] < p_floor - 1e-12)
      throw config_error(
          "continuation schedule: p below the solver floor for this "
          "discretization");
    if (k > 0 && !(p_list[k] < p_list[k - 1]))
      throw config_error("continuation schedule: p must strictly decrease");
  }
  if (!(tol_flow > 0))
    throw config_error("continuation schedule: tol_flow must be positive");
}

FlowResult run_point_flow(const RadialGrid& g, const ContinuationSchedule& s) {
  s.validate(RADIAL_P_FLOOR);
  FlowResult fr;
  fr.mode = "point";
  fr.p_list = s.p_list;
  for (size_t k = 0; k < s.p_list.size(); ++k) {
    const double p = s.p_list[k];
    const int f = stage_factor((int)k, g.N());
    const RadialGrid fine = refine_grid(g, f);
    const auto K = green_kernel_model(g.mm, p);
    auto kr = green_kernel_numeric(fine, p);
    kr.log_G = restrict_stride(kr.log_G, f);
    auto fd = fake_distance(kr, K);
    Eigen::VectorXd wp = (1.0 - p) * kr.log_G;
    if (!fr.rho_p.empty())
      fr.cauchy_trace.push_back(sup_gap(fd.rho, fr.rho_p.back()));
    fr.rho_p.push_back(std::move(fd.rho));
    fr.w_p.push_back(std::move(wp));
  }
  finish_trace(fr, s.tol_flow);
  const size_t e = (size_t)fr.extrap_stage;
  fr.rho1 = extrap_field(fr.rho_p[e], fr.rho_p[e - 1]);
  fr.w.resize(fr.rho1.size());
  for (Eigen::Index i = 0; i < fr.rho1.size(); ++i) {
    fr.rho1[i] = std::clamp(fr.rho1[i], 1e-12, g.mm.t_max);
    fr.w[i] = g.mm.log_v(fr.rho1[i]);
  }
  return fr;
}

FlowResult run_point_flow(const SurfaceMesh& mesh, const PSolveConfig& cfg,
                          const ContinuationSchedule& s) {
  if (!mesh.has_model)
    throw config_error("point flow: the mesh carries no base model");
  s.validate(MESH_P_FLOOR);
  FlowResult fr;
  fr.mode = "point";
  fr.p_list = s.p_list;
  Eigen::VectorXd warm;
  bool have_warm = false;
  for (double p : s.p_list) {
    PSolveConfig c = cfg;
    c.p = p;
    const auto K = green_kernel_model(mesh.mm, p);
    const auto kr = green_kernel_numeric(mesh, c, {}, 5e-2,
                                         have_warm ? &warm : nullptr);
    warm = kr.last_stage_u;
    have_warm = true;
    fr.total_iterations += kr.iterations;
    fr.iterations_p.push_back(kr.iterations);
    auto fd = fake_distance(kr, K);
    Eigen::VectorXd wp = (1.0 - p) * kr.log_G;
    if (!fr.rho_p.empty())
      fr.cauchy_trace.push_back(sup_gap(fd.rho, fr.rho_p.back()));
    fr.rho_p.push_back(std::move(fd.rho));
    fr.w_p.push_back(std::move(wp));
  }
  finish_trace(fr, s.tol_flow);
  const size_t e = (size_t)fr.extrap_stage;
  fr.rho1 = extrap_field(fr.rho_p[e], fr.rho_p[e - 1]);
  fr.w.resize(fr.rho1.size());
  for (Eigen::Index i = 0; i < fr.rho1.size(); ++i) {
    fr.rho1[i] = std::clamp(fr.rho1[i], 1e-12, mesh.mm.t_max);
    fr.w[i] = mesh.mm.log_v(fr.rho1[i]);
  }
  return fr;
}

FlowResult run_domain_flow(const RadialGrid& g, double a,
                           const ContinuationSchedule& s) {
  s.validate(RADIAL_P_FLOOR);
  const int N = g.N();
  int ia = (int)(std::lower_bound(g.t.begin(), g.t.end(), a * (1 - 1e-12)) -
                 g.t.begin());
  if (ia < 1 || ia > N - 8)
    throw config_error("domain flow: source radius outside the grid");

  FlowResult fr;
  fr.mode = "domain";
  fr.p_list = s.p_list;
  fr.omega_radius = g.t[ia];
  for (size_t k = 0; k < s.p_list.size(); ++k) {
    const double p = s.p_list[k];
    const int f = stage_factor((int)k, g.N());
    const RadialGrid fine = refine_grid(g, f);
    const auto K = green_kernel_model(g.mm, p);
    auto kr = green_kernel_numeric(fine, p);
    kr.log_G = restrict_stride(kr.log_G, f);
    auto fd = fake_distance(kr, K);
    fr.Ri_p.push_back(fd.rho[ia]);
    fr.Ro_p.push_back(fd.rho[ia]);

    RadialGrid sub;
    sub.mm = g.mm;
    sub.t.assign(fine.t.begin() + (size_t)ia * f, fine.t.end());
    sub.eps_pole = g.t[ia];
    sub.T_out = g.T_out;
    sub.grading = g.grading;
    auto rep = capacity_potential(sub, p);
    Eigen::VectorXd wp = Eigen::VectorXd::Zero(N + 1);
    for (int i = ia; i <= N; ++i) {
      const double lu = rep.log_u[(size_t)(i - ia) * f];
      wp[i] = std::isfinite(lu) ? (1.0 - p) * lu : POS_INF;
    }
    if (!fr.w_p.empty())
      fr.cauchy_trace.push_back(sup_gap(wp, fr.w_p.back()));
    fr.rho_p.push_back(std::move(fd.rho));
    fr.w_p.push_back(std::move(wp));
  }
  finish_trace(fr, s.tol_flow);
  const size_t e = (size_t)fr.extrap_stage;
  fr.rho1 = extrap_field(fr.rho_p[e], fr.rho_p[e - 1]);
  for (Eigen::Index i = 0; i < fr.rho1.size(); ++i)
    fr.rho1[i] = std::clamp(fr.rho1[i], 1e-12, g.mm.t_max);
  fr.w = extrap_field(fr.w_p[e], fr.w_p[e - 1]);
  fr.R_i = std::max(extrap2(fr.Ri_p[e], fr.Ri_p[e - 1]), 1e-12);
  fr.R_o = std::max(extrap2(fr.Ro_p[e], fr.Ro_p[e - 1]), fr.R_i);
  return fr;
}

FlowResult run_domain_flow(const SurfaceMesh& mesh, const PSolveConfig& cfg,
                           double a, const ContinuationSchedule& s) {
  if (!mesh.has_model)
    throw config_error("domain flow: the mesh carries no base model");
  s.validate(MESH_P_FLOOR);
  const int n = mesh.nv();
  std::vector<int> ones, zeros = mesh.outer;
  std::vector<char> inside(n, 0);
  for (int v = 0; v < n; ++v)
    if (mesh.r_field[v] <= a) {
      ones.push_back(v);
      inside[v] = 1;
    }
  if (ones.empty())
    throw config_error("domain flow: source region is empty");
  if (a > mesh.T_out - 5.0 * mesh.h_mesh)
    throw config_error("domain flow: source region reaches the rim");

  FlowResult fr;
  fr.mode = "domain";
  fr.p_list = s.p_list;
  fr.omega_radius = a;

  // boundary ring of the source region
  std::vector<int> ring;
  for (int v : ones) {
    bool edge = false;
    for (int f : mesh.v2t[v])
      for (int k = 0; k < 3; ++k)
        if (!inside[mesh.F(f, k)]) edge = true;
    if (edge) ring.push_back(v);
  }

  Eigen::VectorXd warm_k, warm_u;
  bool have_warm = false;
  for (double p : s.p_list) {
    PSolveConfig c = cfg;
    c.p = p;
    const auto K = green_kernel_model(mesh.mm, p);
    const auto kr = green_kernel_numeric(mesh, c, {}, 5e-2,
                                         have_warm ? &warm_k : nullptr);
    warm_k = kr.last_stage_u;
    fr.total_iterations += kr.iterations;
    auto fd = fake_distance(kr, K);
    double ri = POS_INF, ro = NEG_INF;
    for (int v : ring) {
      ri = std::min(ri, fd.rho[v]);
      ro = std::max(ro, fd.rho[v]);
    }
    fr.Ri_p.push_back(ri);
    fr.Ro_p.push_back(ro);

    auto rep = capacity_potential(mesh, c, ones, zeros,
                                  have_warm ? &warm_u : nullptr);
    warm_u = rep.u;
    have_warm = true;
    fr.total_iterations += rep.iterations;
    fr.iterations_p.push_back(kr.iterations + rep.iterations);
    Eigen::VectorXd wp(n);
    for (int v = 0; v < n; ++v)
      wp[v] = std::isfinite(rep.log_u[v]) ? (1.0 - p) * rep.log_u[v]
                                          : POS_INF;
    if (!fr.w_p.empty())
      fr.cauchy_trace.push_back(sup_gap(wp, fr.w_p.back()));
    fr.rho_p.push_back(std::move(fd.rho));
    fr.w_p.push_back(std::move(wp));
  }
  finish_trace(fr, s.tol_flow);
  const size_t e = (size_t)fr.extrap_stage;
  fr.rho1 = extrap_field(fr.rho_p[e], fr.rho_p[e - 1]);
  for (Eigen::Index i = 0; i < fr.rho1.size(); ++i)
    fr.rho1[i] = std::clamp(fr.rho1[i], 1e-12, mesh.mm.t_max);
  fr.w = extrap_field(fr.w_p[e], fr.w_p[e - 1]);
  fr.R_i = std::max(extrap2(fr.Ri_p[e], fr.Ri_p[e - 1]), 1e-12);
  fr.R_o = std::max(extrap2(fr.Ro_p[e], fr.Ro_p[e - 1]), fr.R_i);
  return fr;
}

EstimateAudit check_mean_curvature_bound(const RadialGrid& g,
                                         const FlowResult& fr, double band,
                                         double tol, bool kappa_form) {
  if (fr.w.size() != g.N() + 1)
    throw config_error("curvature bound: field size mismatch");
  if (kappa_form && !g.mm.profile.is_constant())
    throw config_error("curvature bound: kappa form needs a constant profile");
  const double h = max_dt(g);
  if (tol < 0) tol = 5.0 * h;
  const double wmax = g.mm.log_v(g.mm.t_max);
  double lhs = 0, at = g.t[0];
  for (int i = 0; i < g.N(); ++i) {
    const double mid = 0.5 * (g.t[i] + g.t[i + 1]);
    if (mid < g.eps_pole + band || mid > g.T_out - band) continue;
    if (!std::isfinite(fr.w[i]) || !std::isfinite(fr.w[i + 1])) continue;
    const double wc = 0.5 * (fr.w[i] + fr.w[i + 1]);
    if (wc >= wmax) continue;  // flow level beyond the model table
    const double lw = std::abs(fr.w[i + 1] - fr.w[i]) / g.dt(i);
    const double ratio = lw / mc_rhs(g.mm, wc, kappa_form);
    if (ratio > lhs) {
      lhs = ratio;
      at = mid;
    }
  }
  return EstimateAudit::inequality("flow gradient vs model curvature", lhs,
                                   1.0, tol, "cell at t=" + fmt_g15(at));
}

EstimateAudit check_mean_curvature_bound(const SurfaceMesh& mesh,
                                         const FlowResult& fr, double band,
                                         double tol, bool kappa_form) {
  if (!mesh.has_model)
    throw config_error("curvature bound: the mesh carries no base model");
  if (fr.w.size() != mesh.nv())
    throw config_error("curvature bound: field size mismatch");
  if (kappa_form && !mesh.mm.profile.is_constant())
    throw config_error("curvature bound: kappa form needs a constant profile");
  if (tol < 0) tol = 5.0 * mesh.h_mesh;
  const double lo = mesh.eps_pole + band, hi = mesh.T_out - band;
  const double wmax = mesh.mm.log_v(mesh.mm.t_max);
  double lhs = 0;
  int at = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    bool ok = true;
    double wc = 0;
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.F(f, k);
      ok = ok && !mesh.on_boundary[v] && std::isfinite(fr.w[v]) &&
           mesh.r_field[v] >= lo && mesh.r_field[v] <= hi;
      wc += fr.w[v] / 3.0;
    }
    if (!ok || wc >= wmax) continue;
    const double lw = cell_grad_norm(mesh, fr.w, f);
    const double ratio = lw / mc_rhs(mesh.mm, wc, kappa_form);
    if (ratio > lhs) {
      lhs = ratio;
      at = f;
    }
  }
  return EstimateAudit::inequality("flow gradient vs model curvature", lhs,
                                   1.0, tol, "face " + std::to_string(at));
}

EstimateAudit sandwich_audit(const RadialGrid& g, const FlowResult& fr,
                             double band, double tol) {
  require_domain_mode(fr, "sandwich");
  if (fr.w.size() != g.N() + 1)
    throw config_error("sandwich: field size mismatch");
  if (tol < 0) tol = 0.05;
  const double lvRo = g.mm.log_v(fr.R_o), lvRi = g.mm.log_v(fr.R_i);
  double lhs = NEG_INF;
  std::string at;
  for (int i = 0; i <= g.N(); ++i) {
    if (g.t[i] < fr.omega_radius || g.t[i] < g.eps_pole + band ||
        g.t[i] > g.T_out - band)
      continue;
    if (!std::isfinite(fr.w[i])) continue;
    const double lv = g.mm.log_v(fr.rho1[i]);
    const double lo_viol = (lv - lvRo) - fr.w[i];
    const double hi_viol = fr.w[i] - (lv - lvRi);
    if (std::max(lo_viol, hi_viol) > lhs) {
      lhs = std::max(lo_viol, hi_viol);
      at = "node at t=" + fmt_g15(g.t[i]);
    }
  }
  return EstimateAudit::inequality("domain flow sandwich", lhs, 0.0, tol, at);
}

EstimateAudit sandwich_audit(const SurfaceMesh& mesh, const FlowResult& fr,
                             double band, double tol) {
  require_domain_mode(fr, "sandwich");
  if (!mesh.has_model)
    throw config_error("sandwich: the mesh carries no base model");
  if (fr.w.size() != mesh.nv())
    throw config_error("sandwich: field size mismatch");
  if (tol < 0) tol = 0.05;
  const double lvRo = mesh.mm.log_v(fr.R_o), lvRi = mesh.mm.log_v(fr.R_i);
  const double lo = mesh.eps_pole + band, hi = mesh.T_out - band;
  double lhs = NEG_INF;
  std::string at;
  for (int v = 0; v < mesh.nv(); ++v) {
    if (mesh.r_field[v] < fr.omega_radius || mesh.r_field[v] < lo ||
        mesh.r_field[v] > hi || mesh.on_boundary[v])
      continue;
    if (!std::isfinite(fr.w[v])) continue;
    const double lv = mesh.mm.log_v(fr.rho1[v]);
    const double viol =
        std::max((lv - lvRo) - fr.w[v], fr.w[v] - (lv - lvRi));
    if (viol > lhs) {
      lhs = viol;
      at = "vertex " + std::to_string(v);
    }
  }
  return EstimateAudit::inequality("domain flow sandwich", lhs, 0.0, tol, at);
}

EstimateAudit check_flow_gradient_bound(const RadialGrid& g,
                                        const FlowResult& fr, double H_plus,
                                        double band, double tol) {
  require_domain_mode(fr, "flow gradient bound");
  if (fr.w.size() != g.N() + 1)
    throw config_error("flow gradient bound: field size mismatch");
  const double h = max_dt(g);
  const double H_Ri = std::max(g.mm.profile(fr.R_i), 0.0);
  const double rhs = std::max((g.mm.m - 1) * std::sqrt(H_Ri), H_plus);
  if (tol < 0) tol = 5.0 * h * (1.0 + rhs);
  double lhs = 0, at = g.t[0];
  for (int i = 0; i < g.N(); ++i) {
    const double mid = 0.5 * (g.t[i] + g.t[i + 1]);
    if (mid < fr.omega_radius || mid > g.T_out - band) continue;
    if (!std::isfinite(fr.w[i]) || !std::isfinite(fr.w[i + 1])) continue;
    const double lw = std::abs(fr.w[i + 1] - fr.w[i]) / g.dt(i);
    if (lw > lhs) {
      lhs = lw;
      at = mid;
    }
  }
  return EstimateAudit::inequality("domain flow gradient bound", lhs, rhs,
                                   tol, "cell at t=" + fmt_g15(at));
}

EstimateAudit explicit_quadratic_decay_bound(const RadialGrid& g,
                                             const FlowResult& fr,
                                             double kappa, double H_plus,
                                             double band, double tol) {
  require_domain_mode(fr, "quadratic decay bound");
  if (fr.w.size() != g.N() + 1)
    throw config_error("quadratic decay bound: field size mismatch");
  // the profile must be H(t) = kappa^2 / t^2 on the working range
  for (double t : {g.eps_pole + 0.1 * (g.T_out - g.eps_pole), 0.5 * g.T_out,
                   g.T_out}) {
    if (std::abs(g.mm.profile(t) * t * t - kappa * kappa) >
        1e-6 * (1.0 + kappa * kappa))
      throw config_error(
          "quadratic decay bound: profile is not the quadratic-decay form");
  }
  const double kp = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa));
  const double base =
      std::max(kp * (g.mm.m - 1) / fr.R_i, H_plus);
  const double h = max_dt(g);
  if (tol < 0) tol = 5.0 * h;
  double lhs = 0, at = g.t[0];
  for (int i = 0; i < g.N(); ++i) {
    const double mid = 0.5 * (g.t[i] + g.t[i + 1]);
    if (mid < fr.omega_radius + band || mid > g.T_out - band) continue;
    if (!std::isfinite(fr.w[i]) || !std::isfinite(fr.w[i + 1])) continue;
    const double lw = std::abs(fr.w[i + 1] - fr.w[i]) / g.dt(i);
    const double rho_mid = 0.5 * (fr.rho1[i] + fr.rho1[i + 1]);
    const double ratio = lw * rho_mid / (fr.R_o * base);
    if (ratio > lhs) {
      lhs = ratio;
      at = mid;
    }
  }
  return EstimateAudit::inequality("quadratic-decay gradient bound", lhs, 1.0,
                                   tol, "cell at t=" + fmt_g15(at));
}

namespace {

double lower_bound_radius(const ModelManifold& mm, double r, double S) {
  const int m = mm.m;
  const double denom =
      std::pow(S, m) * std::pow(2.0, double(m) * m - 1.0);
  return mm.inverse_v(std::pow(r, m - 1) / denom);
}

}  // namespace

EstimateAudit lower_bound_rho1(const RadialGrid& g, const FlowResult& fr,
                               double S, double band, double tol) {
  if (fr.rho1.size() != g.N() + 1)
    throw config_error("coordinate sandwich: field size mismatch");
  if (!(S > 0)) throw config_error("coordinate sandwich: S must be positive");
  const double h = max_dt(g);
  if (tol < 0) tol = 5.0 * h;
  double lhs = NEG_INF;
  std::string at;
  for (int i = 0; i <= g.N(); ++i) {
    if (g.t[i] < g.eps_pole + band || g.t[i] > g.T_out - band) continue;
    const double r = g.t[i];
    const double viol = std::max(lower_bound_radius(g.mm, r, S) - fr.rho1[i],
                                 fr.rho1[i] - r);
    if (viol > lhs) {
      lhs = viol;
      at = "node at t=" + fmt_g15(r);
    }
  }
  return EstimateAudit::inequality("limit coordinate sandwich", lhs, 0.0, tol,
                                   at);
}

EstimateAudit lower_bound_rho1(const SurfaceMesh& mesh, const FlowResult& fr,
                               double S, double band, double tol) {
  if (!mesh.has_model)
    throw config_error("coordinate sandwich: the mesh carries no base model");
  if (fr.rho1.size() != mesh.nv())
    throw config_error("coordinate sandwich: field size mismatch");
  if (!(S > 0)) throw config_error("coordinate sandwich: S must be positive");
  if (tol < 0) tol = 5.0 * mesh.h_mesh;
  const double lo = mesh.eps_pole + band, hi = mesh.T_out - band;
  double lhs = NEG_INF;
  std::string at;
  for (int v = 0; v < mesh.nv(); ++v) {
    const double r = mesh.r_field[v];
    if (r < lo || r > hi) continue;
    const double viol =
        std::max(lower_bound_radius(mesh.mm, r, S) - fr.rho1[v],
                 fr.rho1[v] - r);
    if (viol > lhs) {
      lhs = viol;
      at = "vertex " + std::to_string(v);
    }
  }
  return EstimateAudit::inequality("limit coordinate sandwich", lhs, 0.0, tol,
                                   at);
}

namespace {

EstimateAudit limit_product_core(const FlowResult& fr,
                                 const std::function<bool(int)>& in_band,
                                 double tol) {
  if (fr.mode != "point")
    throw config_error("limit product: needs a point-mode flow");
  if (fr.w_p.size() < 2)
    throw config_error("limit product: needs at least two stages");
  // Always extrapolate the log-kernel product from the deepest stage pair:
  // its normalization defect decays like (p-1)*log(p-1) and only the
  // smallest exponents make the limit identity sharp.
  const size_t e = fr.w_p.size() - 1;
  double worst = 1.0, dev = 0;
  std::string at;
  for (Eigen::Index i = 0; i < fr.w.size(); ++i) {
    if (!in_band((int)i)) continue;
    const double z =
        extrap2(fr.w_p[e][i], fr.w_p[e - 1][i]) - fr.w[i];
    if (!std::isfinite(z)) continue;
    const double r = std::exp(z);
    if (std::abs(r - 1.0) > dev) {
      dev = std::abs(r - 1.0);
      worst = r;
      at = "entry " + std::to_string(i);
    }
  }
  return EstimateAudit::identity_check("extrapolated kernel-product limit",
                                       worst, 1.0, tol, at);
}

}  // namespace

EstimateAudit limit_product_audit(const RadialGrid& g, const FlowResult& fr,
                                  double band, double tol) {
  if (fr.w.size() != g.N() + 1)
    throw config_error("limit product: field size mismatch");
  return limit_product_core(fr, [&](int i) {
    return g.t[i] >= g.eps_pole + band && g.t[i] <= g.T_out - band;
  }, tol);
}

EstimateAudit limit_product_audit(const SurfaceMesh& mesh,
                                  const FlowResult& fr, double band,
                                  double tol) {
  if (fr.w.size() != mesh.nv())
    throw config_error("limit product: field size mismatch");
  return limit_product_core(fr, [&](int v) {
    return !mesh.on_boundary[v] && mesh.r_field[v] >= mesh.eps_pole + band &&
           mesh.r_field[v] <= mesh.T_out - band;
  }, tol);
}

double boundary_mean_curvature_plus(const SurfaceMesh& mesh,
                                    const std::vector<int>& region) {
  if (region.empty())
    throw config_error("boundary curvature: empty region");
  std::vector<char> inside(mesh.nv(), 0);
  for (int v : region) inside[v] = 1;

  // faces fully inside the region, their angle sums at each vertex, and the
  // boundary edges of that sub-complex (edges used by exactly one such face)
  Eigen::VectorXd angle_in = Eigen::VectorXd::Zero(mesh.nv());
  std::unordered_map<long long, double> edge_use;  // key -> metric length
  std::unordered_map<long long, int> edge_cnt;
  auto ekey = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return (long long)a * (long long)mesh.nv() + b;
  };
  for (int f = 0; f < mesh.nf(); ++f) {
    bool in = true;
    for (int k = 0; k < 3; ++k) in = in && inside[mesh.F(f, k)];
    if (!in) continue;
    for (int k = 0; k < 3; ++k) {
      angle_in[mesh.F(f, k)] += mesh.metric_angle(f, k);
      const int a = mesh.F(f, (k + 1) % 3), b = mesh.F(f, (k + 2) % 3);
      edge_cnt[ekey(a, b)] += 1;
      edge_use[ekey(a, b)] = mesh.edge_length(f, k);
    }
  }
  // half-lengths of the region-boundary edges at each vertex
  Eigen::VectorXd arc = Eigen::VectorXd::Zero(mesh.nv());
  for (auto& [key, cnt] : edge_cnt) {
    if (cnt != 1) continue;
    const int a = (int)(key / mesh.nv()), b = (int)(key % mesh.nv());
    arc[a] += 0.5 * edge_use[key];
    arc[b] += 0.5 * edge_use[key];
  }
  double hplus = 0;
  bool any = false;
  for (int v = 0; v < mesh.nv(); ++v) {
    if (!inside[v] || arc[v] <= 0 || mesh.on_boundary[v]) continue;
    any = true;
    hplus = std::max(hplus, (M_PI - angle_in[v]) / arc[v]);
  }
  if (!any)
    throw config_error("boundary curvature: region has no interior boundary");
  return hplus;
}

}  // namespace fakedist
