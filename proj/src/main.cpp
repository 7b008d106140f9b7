// Command-line driver: reproducible runs from JSON configs.
//
// Subcommands
//   model   write warping/volume/kernel tables for a model geometry
//   solve   one capacity-potential solve, report + fields on disk
//   flow    small-exponent continuation (point or domain mode) + audits
//   verify  full audit battery on a point flow; JSON report + flux CSV
//   report  pretty-print a previously written JSON report
//
// Exit codes: 0 all audits pass, 1 audit failures (hard failures and
// soft warnings are distinguished in the output), 2 mathematical
// precondition failure, 3 I/O or config failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>

#include "fakedist/fake.hpp"
#include "fakedist/io.hpp"
#include "fakedist/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using njson = nlohmann::json;

using namespace fakedist;

namespace {

// ------------------------------------------------------- config access

// all config lookups carry a JSON-pointer-style path in their diagnostics
const njson& get_req(const njson& j, const std::string& key,
                     const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw config_error("config error at " + where + "/" + key +
                       ": missing required field");
  return *it;
}

double get_num(const njson& j, const std::string& key,
               const std::string& where, double fallback,
               bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required)
      throw config_error("config error at " + where + "/" + key +
                         ": missing required field");
    return fallback;
  }
  if (!it->is_number())
    throw config_error("config error at " + where + "/" + key +
                       ": expected a number");
  return it->get<double>();
}

int get_int(const njson& j, const std::string& key, const std::string& where,
            int fallback, bool required = false) {
  const double x = get_num(j, key, where, fallback, required);
  if (x != std::floor(x))
    throw config_error("config error at " + where + "/" + key +
                       ": expected an integer");
  return (int)x;
}

std::string get_str(const njson& j, const std::string& key,
                    const std::string& where, const std::string& fallback,
                    bool required = false) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required)
      throw config_error("config error at " + where + "/" + key +
                         ": missing required field");
    return fallback;
  }
  if (!it->is_string())
    throw config_error("config error at " + where + "/" + key +
                       ": expected a string");
  return it->get<std::string>();
}

njson load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  njson j;
  try {
    j = njson::parse(in);
  } catch (const njson::parse_error& e) {
    throw config_error("config parse failure in " + path + ": " + e.what());
  }
  const int schema = get_int(j, "schema", "", 0, true);
  if (schema != 1)
    throw config_error("config error at /schema: unsupported version " +
                       std::to_string(schema));
  return j;
}

// ------------------------------------------------------------ builders

CurvatureProfile profile_from(const njson& cfg) {
  const njson& p = get_req(cfg, "profile", "");
  const std::string kind = get_str(p, "kind", "/profile", "", true);
  if (kind == "constant")
    return CurvatureProfile::constant(
        get_num(p, "kappa2", "/profile", 0.0, true));
  if (kind == "table") {
    const njson& jt = get_req(p, "t", "/profile");
    const njson& jh = get_req(p, "H", "/profile");
    if (!jt.is_array() || !jh.is_array() || jt.size() != jh.size() ||
        jt.size() < 2)
      throw config_error(
          "config error at /profile: t and H must be equal-length arrays "
          "with at least two entries");
    return CurvatureProfile::table(jt.get<std::vector<double>>(),
                                   jh.get<std::vector<double>>());
  }
  throw config_error(
      "config error at /profile/kind: must be \"constant\" or \"table\"");
}

struct GeometrySpec {
  std::string kind;  // "radial" or "warped-surface"
  int m = 2;
  double eps_pole = 0.05, T_out = 8.0, t_max = 0.0, grading = 1.0;
  int N = 1000, n_t = 24, n_theta = 72;
  std::string mesh_file;
};

GeometrySpec geometry_from(const njson& cfg, int refine) {
  const njson& g = get_req(cfg, "geometry", "");
  GeometrySpec spec;
  spec.kind = get_str(g, "kind", "/geometry", "", true);
  if (spec.kind != "radial" && spec.kind != "warped-surface")
    throw config_error(
        "config error at /geometry/kind: must be \"radial\" or "
        "\"warped-surface\"");
  spec.m = get_int(g, "m", "/geometry", spec.kind == "radial" ? 3 : 2);
  if (spec.kind == "warped-surface" && spec.m != 2)
    throw config_error(
        "config error at /geometry/m: warped surfaces are two-dimensional");
  spec.eps_pole = get_num(g, "eps_pole", "/geometry", 0.05);
  spec.T_out = get_num(g, "T_out", "/geometry", 8.0);
  spec.t_max = get_num(g, "t_max", "/geometry",
                       std::max(8.0, 1.5 * spec.T_out));
  spec.grading = get_num(g, "grading", "/geometry", 1.0);
  spec.N = get_int(g, "N", "/geometry", 1000);
  spec.n_t = get_int(g, "n_t", "/geometry", 24);
  spec.n_theta = get_int(g, "n_theta", "/geometry", 72);
  spec.mesh_file = get_str(g, "mesh_file", "/geometry", "");
  for (int k = 0; k < refine; ++k) {  // halve the resolution length scale
    spec.N *= 2;
    spec.n_t *= 2;
    spec.n_theta *= 2;
  }
  if (refine > 0 && !spec.mesh_file.empty())
    throw config_error(
        "config error: --refine needs a generated geometry, not mesh_file");
  return spec;
}

// deterministic warp-factor synthesis; every draw comes from the named seed
std::function<double(double, double)> perturbation_from(const njson& cfg,
                                                        std::uint64_t seed) {
  auto it = cfg.find("perturbation");
  if (it == cfg.end()) return [](double, double) { return 1.0; };
  const njson& p = *it;
  const std::string kind = get_str(p, "kind", "/perturbation", "none");
  if (kind == "none") return [](double, double) { return 1.0; };

  const double amp = get_num(p, "amplitude", "/perturbation", 0.1);
  const double center = get_num(p, "center", "/perturbation", 0.7);
  const double width = get_num(p, "width", "/perturbation", 0.08);
  if (!(width > 0))
    throw config_error(
        "config error at /perturbation/width: must be positive");
  auto bump = [center, width](double t) {
    return std::exp(-(t - center) * (t - center) / width);
  };
  if (kind == "sin-theta-bump") {
    const int mode = get_int(p, "mode", "/perturbation", 3);
    return [amp, mode, bump](double t, double th) {
      return 1.0 + amp * std::sin(mode * th) * bump(t);
    };
  }
  if (kind == "random-fourier") {
    const int modes = get_int(p, "modes", "/perturbation", 4);
    if (modes < 1 || modes > 64)
      throw config_error(
          "config error at /perturbation/modes: must be in [1, 64]");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> ca(modes), sa(modes);
    for (int k = 0; k < modes; ++k) {
      ca[k] = gauss(rng) / (k + 1.0);
      sa[k] = gauss(rng) / (k + 1.0);
    }
    return [amp, ca, sa, bump](double t, double th) {
      double s = 0;
      for (size_t k = 0; k < ca.size(); ++k)
        s += ca[k] * std::cos((k + 1.0) * th) + sa[k] * std::sin((k + 1.0) * th);
      return std::max(0.2, 1.0 + amp * s * bump(t));
    };
  }
  throw config_error(
      "config error at /perturbation/kind: must be \"none\", "
      "\"sin-theta-bump\", or \"random-fourier\"");
}

std::uint64_t seed_from(const njson& cfg) {
  return (std::uint64_t)get_num(cfg, "seed", "", 12345.0);
}

SurfaceMesh surface_from(const njson& cfg, const GeometrySpec& spec,
                         const ModelManifold& mm) {
  if (!spec.mesh_file.empty()) {
    SurfaceMesh mesh = read_surface_mesh(spec.mesh_file);
    mesh.mm = mm;  // audits need the base model the config declares
    mesh.has_model = true;
    return mesh;
  }
  return build_warped_surface(mm, perturbation_from(cfg, seed_from(cfg)),
                              spec.n_t, spec.n_theta, spec.eps_pole,
                              spec.T_out);
}

PSolveConfig solver_from(const njson& cfg) {
  PSolveConfig sc;
  auto it = cfg.find("solver");
  if (it == cfg.end()) return sc;
  const njson& s = *it;
  sc.p = get_num(s, "p", "/solver", sc.p);
  sc.tol_energy = get_num(s, "tol_energy", "/solver", sc.tol_energy);
  sc.lin_tol = get_num(s, "lin_tol", "/solver", sc.lin_tol);
  sc.max_iters = get_int(s, "max_iters", "/solver", sc.max_iters);
  sc.iters_per_eps = get_int(s, "iters_per_eps", "/solver", sc.iters_per_eps);
  sc.eps_levels = get_int(s, "eps_levels", "/solver", sc.eps_levels);
  sc.eps_floor_rel = get_num(s, "eps_floor_rel", "/solver", sc.eps_floor_rel);
  return sc;
}

ContinuationSchedule schedule_from(const njson& cfg, bool is_mesh) {
  ContinuationSchedule s = ContinuationSchedule::dyadic(is_mesh ? 3 : 8);
  s.tol_flow = is_mesh ? 0.05 : 1e-3;
  auto it = cfg.find("schedule");
  if (it == cfg.end()) return s;
  const njson& j = *it;
  const std::string kind = get_str(j, "kind", "/schedule", "dyadic");
  if (kind != "dyadic")
    throw config_error(
        "config error at /schedule/kind: only \"dyadic\" is supported");
  const int levels =
      get_int(j, "levels", "/schedule", is_mesh ? 3 : 8);
  const double start = get_num(j, "start", "/schedule", 0.5);
  s = ContinuationSchedule::dyadic(levels, start);
  s.tol_flow = get_num(j, "tol_flow", "/schedule", is_mesh ? 0.05 : 1e-3);
  return s;
}

// ------------------------------------------------------- audit plumbing

bool audit_selected(const njson& cfg, const std::string& group) {
  auto it = cfg.find("audits");
  if (it == cfg.end()) return true;
  if (!it->is_array())
    throw config_error("config error at /audits: expected an array");
  for (const auto& a : *it)
    if (a.is_string() && a.get<std::string>() == group) return true;
  return false;
}

int finish_audits(const std::vector<EstimateAudit>& audits) {
  int hard = 0, soft = 0;
  for (const auto& a : audits) {
    const char* status = a.pass ? "PASS" : (a.hard ? "FAIL" : "WARN");
    std::cout << status << "  " << a.name << "  lhs=" << fmt_g15(a.lhs)
              << " rhs=" << fmt_g15(a.rhs);
    if (!a.location.empty()) std::cout << "  [" << a.location << "]";
    std::cout << "\n";
    if (!a.pass) (a.hard ? hard : soft)++;
  }
  if (hard > 0)
    std::cout << hard << " hard audit failure(s)\n";
  else if (soft > 0)
    std::cout << soft << " soft audit warning(s)\n";
  else if (!audits.empty())
    std::cout << "all " << audits.size() << " audits pass\n";
  return (hard > 0 || soft > 0) ? 1 : 0;
}

// per-stage kernel logs recovered from the flow snapshots w_p = (1-p) log G
Eigen::VectorXd stage_log_kernel(const FlowResult& fr, size_t k) {
  return fr.w_p[k] / (1.0 - fr.p_list[k]);
}

struct VerifyInputs {
  double nu = 0, sobolev = 0, poincare = 1;
};

VerifyInputs verify_inputs(const njson& cfg, const CurvatureProfile& profile,
                           int m, double p0) {
  VerifyInputs vi;
  vi.nu = m;
  vi.sobolev = 0;
  auto it = cfg.find("constants");
  if (it != cfg.end()) {
    vi.nu = get_num(*it, "nu", "/constants", vi.nu);
    vi.sobolev = get_num(*it, "sobolev", "/constants", 0.0);
    vi.poincare = get_num(*it, "poincare", "/constants", 1.0);
  }
  if (vi.sobolev <= 0) {
    // flat geometry has a closed-form constant; curved ones must supply it
    const bool flat = profile.is_constant() && profile(0.0) == 0.0;
    vi.sobolev =
        flat ? sobolev_from_isoperimetric(flat_isoperimetric_constant(m), p0,
                                          vi.nu)
             : 1.0;
  }
  return vi;
}

// ------------------------------------------------------------ commands

int cmd_model(const njson& cfg, const fs::path& out, int refine) {
  const GeometrySpec spec = geometry_from(cfg, refine);
  const auto profile = profile_from(cfg);
  const auto mm = solve_warping(profile, spec.m, spec.t_max);
  const double p = get_num(cfg, "p", "", 2.0);
  const int rows = get_int(cfg, "rows", "", 400);
  write_model_tables(out, mm, p, rows);
  std::cout << "model tables written to " << out.string() << "\n";
  return 0;
}

int cmd_solve(const njson& cfg, const fs::path& out, int refine) {
  const GeometrySpec spec = geometry_from(cfg, refine);
  const auto profile = profile_from(cfg);
  const auto mm = solve_warping(profile, spec.m, spec.t_max);
  PSolveConfig sc = solver_from(cfg);
  sc.p = get_num(cfg, "p", "", sc.p);
  SolveReport rep;
  if (spec.kind == "radial") {
    const auto g = build_radial_grid(mm, spec.eps_pole, spec.T_out, spec.N,
                                     spec.grading);
    rep = capacity_potential(g, sc.p);
  } else {
    const auto mesh = surface_from(cfg, spec, mm);
    rep = capacity_potential(mesh, sc);
  }
  write_solve_artifacts(out, rep);
  std::cout << "p=" << fmt_g15(rep.p) << " capacity=" << fmt_g15(rep.capacity)
            << " iterations=" << rep.iterations
            << " residual=" << fmt_g15(rep.residual_weak) << "\n"
            << "solve artifacts written to " << out.string() << "\n";
  return 0;
}

int cmd_flow(const njson& cfg, const fs::path& out, int refine) {
  const GeometrySpec spec = geometry_from(cfg, refine);
  const auto profile = profile_from(cfg);
  const auto mm = solve_warping(profile, spec.m, spec.t_max);
  const bool is_mesh = spec.kind == "warped-surface";
  const auto sched = schedule_from(cfg, is_mesh);
  const std::string mode = get_str(cfg, "mode", "", "point");
  if (mode != "point" && mode != "domain")
    throw config_error(
        "config error at /mode: must be \"point\" or \"domain\"");
  const double a = get_num(cfg, "a", "", 0.0, mode == "domain");
  const double band =
      get_num(cfg, "audit_band", "", is_mesh ? 0.3 : 0.0);
  const double limit_tol =
      get_num(cfg, "limit_tol", "", is_mesh ? 0.2 : 0.02);

  FlowResult fr;
  std::vector<EstimateAudit> audits;
  if (!is_mesh) {
    const auto g = build_radial_grid(mm, spec.eps_pole, spec.T_out, spec.N,
                                     spec.grading);
    fr = (mode == "point") ? run_point_flow(g, sched)
                           : run_domain_flow(g, a, sched);
    audits.push_back(check_mean_curvature_bound(g, fr, band, -1.0,
                                                profile.is_constant()));
    audits.push_back(limit_product_audit(g, fr, band, limit_tol));
    if (mode == "domain") {
      audits.push_back(sandwich_audit(g, fr, band));
      const double H_plus = (mm.m - 1) * mm.hp_at(a) / mm.h_at(a);
      audits.push_back(check_flow_gradient_bound(g, fr, H_plus, band));
    }
    auto iso = check_isoperimetric(g, fr);
    audits.insert(audits.end(), iso.begin(), iso.end());
    write_flow_archive(out, fr, audits);
  } else {
    const auto mesh = surface_from(cfg, spec, mm);
    const PSolveConfig sc = solver_from(cfg);
    fr = (mode == "point") ? run_point_flow(mesh, sc, sched)
                           : run_domain_flow(mesh, sc, a, sched);
    audits.push_back(check_mean_curvature_bound(mesh, fr, band, -1.0,
                                                profile.is_constant()));
    audits.push_back(limit_product_audit(mesh, fr, band, limit_tol));
    if (mode == "domain") audits.push_back(sandwich_audit(mesh, fr, band));
    auto iso = check_isoperimetric(mesh, fr);
    audits.insert(audits.end(), iso.begin(), iso.end());
    write_flow_archive(out, fr, audits);
  }
  std::cout << "flow mode=" << fr.mode
            << " stages=" << fr.p_list.size()
            << " converged=" << (fr.converged ? "yes" : "no") << "\n";
  const int rc = finish_audits(audits);
  std::cout << "flow archive written to " << out.string() << "\n";
  return rc;
}

int cmd_verify(const njson& cfg, const fs::path& out, int refine) {
  const GeometrySpec spec = geometry_from(cfg, refine);
  const auto profile = profile_from(cfg);
  const auto mm = solve_warping(profile, spec.m, spec.t_max);
  const bool is_mesh = spec.kind == "warped-surface";
  const auto sched = schedule_from(cfg, is_mesh);
  const double band = get_num(cfg, "audit_band", "", is_mesh ? 0.3 : 0.0);
  const double limit_tol =
      get_num(cfg, "limit_tol", "", is_mesh ? 0.2 : 0.02);
  const double p0 = sched.p_list.front();
  const VerifyInputs vi = verify_inputs(cfg, profile, spec.m, p0);
  const auto constants = make_constants(p0, vi.nu, vi.sobolev, 0.0,
                                        vi.poincare);

  std::vector<EstimateAudit> audits;
  if (audit_selected(cfg, "constants"))
    audits.push_back(EstimateAudit::inequality(
        "explicit constants are finite and positive",
        constants.finite_positive() ? 0.0 : 1.0, 0.0, 0.0));

  // geometry + point flow
  RadialGrid g;
  SurfaceMesh mesh;
  FlowResult fr;
  double r_lo = 0, r_hi = 0;  // mid-chart band shared by several audits
  if (!is_mesh) {
    g = build_radial_grid(mm, spec.eps_pole, spec.T_out, spec.N,
                          spec.grading);
    fr = run_point_flow(g, sched);
  } else {
    mesh = surface_from(cfg, spec, mm);
    fr = run_point_flow(mesh, solver_from(cfg), sched);
  }
  const double span = spec.T_out - spec.eps_pole;
  r_lo = spec.eps_pole + 0.45 * span;
  r_hi = spec.eps_pole + 0.55 * span;

  // kernel decay at the first stage, with the measured volume weight
  const Eigen::VectorXd log_G0 = stage_log_kernel(fr, 0);
  if (audit_selected(cfg, "decay")) {
    auto eta = is_mesh ? volume_ratio_weight(mesh, vi.nu)
                       : volume_ratio_weight(mm, vi.nu);
    audits.push_back(is_mesh
                         ? check_decay(mesh, log_G0, constants, eta)
                         : check_decay(g, log_G0, constants, eta));
  }

  // one-sided sup/inf bounds on a mid-chart annulus (mesh fields only)
  if (is_mesh && audit_selected(cfg, "one-sided")) {
    const AnnulusSpec ann{r_lo, r_hi, 0.2 * span};
    const Eigen::VectorXd u0 = log_G0.array().exp();
    audits.push_back(check_half_harnack(mesh, u0, p0, ann, constants));
    audits.push_back(check_half_harnack(mesh, u0, -1.0, ann, constants));
  }

  // oscillation exponent along the continuation
  if (audit_selected(cfg, "harnack-form") && fr.p_list.size() >= 3) {
    std::vector<HarnackSample> hs;
    for (size_t k = 0; k < fr.p_list.size(); ++k) {
      const Eigen::VectorXd lg = stage_log_kernel(fr, k);
      HarnackSample s{fr.p_list[k], NEG_INF, POS_INF};
      for (Eigen::Index i = 0; i < lg.size(); ++i) {
        const double r = is_mesh ? mesh.r_field[i] : g.t[i];
        if (r < r_lo || r > r_hi || !std::isfinite(lg[i])) continue;
        s.sup = std::max(s.sup, std::exp(lg[i]));
        s.inf = std::min(s.inf, std::exp(lg[i]));
      }
      hs.push_back(s);
    }
    audits.push_back(check_harnack_form(hs));
  }

  // gradient / limit-product / isoperimetric audits of the flow
  if (audit_selected(cfg, "gradient"))
    audits.push_back(
        is_mesh ? check_mean_curvature_bound(mesh, fr, band, -1.0,
                                             profile.is_constant())
                : check_mean_curvature_bound(g, fr, band, -1.0,
                                             profile.is_constant()));
  if (audit_selected(cfg, "limit-product"))
    audits.push_back(is_mesh ? limit_product_audit(mesh, fr, band, limit_tol)
                             : limit_product_audit(g, fr, band, limit_tol));
  if (audit_selected(cfg, "isoperimetric")) {
    auto iso = is_mesh ? check_isoperimetric(mesh, fr)
                       : check_isoperimetric(g, fr);
    audits.insert(audits.end(), iso.begin(), iso.end());
  }

  // flux table + derivative identity at the mid level
  std::vector<FluxTableRow> rows;
  if (audit_selected(cfg, "flux")) {
    const double flux_p = get_num(cfg, "flux_p", "", 2.0);
    std::vector<double> levels;
    for (int j = 0; j < 10; ++j)
      levels.push_back(spec.eps_pole + span * (0.15 + 0.6 * j / 9.0));
    rows = is_mesh ? flux_table(mesh, fr.rho1, flux_p, levels)
                   : flux_table(g, fr.rho1, flux_p, levels);
    const double t_mid = spec.eps_pole + 0.5 * span;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(fr.rho1.size());
    audits.push_back(
        is_mesh
            ? check_flux_derivative(mesh, fr.rho1, ones, flux_p, t_mid)
            : check_flux_derivative(g, fr.rho1, ones, flux_p, t_mid));
  }

  ordered_json meta;
  meta["geometry"] = spec.kind;
  meta["dimension"] = spec.m;
  meta["p0"] = fmt_g15(p0);
  meta["stages"] = fr.p_list.size();
  meta["converged"] = fr.converged;
  meta["seed"] = seed_from(cfg);
  meta["nu"] = fmt_g15(vi.nu);
  meta["sobolev"] = fmt_g15(vi.sobolev);
  meta["decay_constant"] = fmt_g15(constants.decay);
  meta["half_sup_small_q"] = fmt_g15(constants.half_sup_small_q);
  meta["half_sup_large_q"] = fmt_g15(constants.half_sup_large_q);
  meta["half_inf"] = fmt_g15(constants.half_inf);
  write_audit_report(out / "report.json", audits, meta);
  if (!rows.empty()) write_flux_csv(out / "flux.csv", rows);

  const int rc = finish_audits(audits);
  std::cout << "verification report written to " << out.string() << "\n";
  return rc;
}

int cmd_report(const fs::path& out) {
  // find whichever report the directory holds and replay its audits
  for (const char* name : {"report.json", "summary.json", "flow/summary.json",
                           "model.json"}) {
    const fs::path f = out / name;
    if (!fs::exists(f)) continue;
    std::ifstream in(f);
    njson j;
    try {
      j = njson::parse(in);
    } catch (const njson::parse_error& e) {
      throw config_error("unreadable report " + f.string() + ": " + e.what());
    }
    std::cout << f.string() << ":\n";
    int hard = 0, soft = 0;
    if (j.contains("audits")) {
      for (const auto& a : j["audits"]) {
        const bool pass = a.value("pass", false);
        const bool is_hard = a.value("hard", true);
        std::cout << (pass ? "PASS" : (is_hard ? "FAIL" : "WARN")) << "  "
                  << a.value("name", "?") << "  lhs=" << a.value("lhs", "?")
                  << " rhs=" << a.value("rhs", "?") << "\n";
        if (!pass) (is_hard ? hard : soft)++;
      }
      std::cout << j["audits"].size() << " audits, " << hard
                << " hard failure(s), " << soft << " warning(s)\n";
    } else {
      std::cout << j.dump(2) << "\n";
    }
    return (hard > 0 || soft > 0) ? 1 : 0;
  }
  throw config_error("no report found under " + out.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "p-harmonic kernels, distance reparametrizations, and "
      "inverse-curvature flows on model geometries and discretized "
      "surfaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0, refine = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path,
                              "JSON run configuration");
    if (needs_config) c->required();
    sub->add_option("--out", out_dir,
                    "output directory (default: config \"out\", else ./out)");
    sub->add_option("--threads", threads,
                    "worker threads (0: FAKEDIST_THREADS or single)");
    sub->add_option("--refine", refine, "halve the resolution k times");
  };

  auto* s_model = app.add_subcommand("model", "write model geometry tables");
  auto* s_solve = app.add_subcommand("solve", "one capacity-potential solve");
  auto* s_flow = app.add_subcommand("flow", "small-exponent continuation");
  auto* s_verify = app.add_subcommand("verify", "full audit battery");
  auto* s_report = app.add_subcommand("report", "print a stored report");
  for (auto* s : {s_model, s_solve, s_flow, s_verify})
    add_common(s, true);
  add_common(s_report, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0)
      setenv("FAKEDIST_THREADS", std::to_string(threads).c_str(), 1);

    njson cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    fs::path out = !out_dir.empty()
                       ? fs::path(out_dir)
                       : fs::path(cfg.value("out", std::string("out")));

    if (s_model->parsed()) return cmd_model(cfg, out, refine);
    if (s_solve->parsed()) return cmd_solve(cfg, out, refine);
    if (s_flow->parsed()) return cmd_flow(cfg, out, refine);
    if (s_verify->parsed()) return cmd_verify(cfg, out, refine);
    if (s_report->parsed()) return cmd_report(out);
  } catch (const math_error& e) {
    std::cerr << "mathematical precondition failure: " << e.what() << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "config/build failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "I/O failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
