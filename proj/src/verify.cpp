#include "fakedist/verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "fakedist/common.hpp"

namespace fakedist {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw config_error(msg);
}

std::string level_tag(double t) {
  return "level t=" + std::to_string(t);
}

}  // namespace

// ------------------------------------------------------------ constants

double decay_constant(double p, double nu, double S) {
  require(p > 1.0 && p < nu, "decay constant: requires 1 < p < nu");
  require(S > 0, "decay constant: Sobolev constant must be positive");
  const double bracket = nu * std::log(2.0) + std::log(p) +
                         p * std::log1p(p) +
                         (p - 1.0) * std::log(p / (p - 1.0));
  return std::exp(nu / p * std::log(S) + (nu - p) / p * bracket);
}

double decay_constant_p1_limit(double S, int m) {
  require(m >= 2, "decay constant limit: dimension must be >= 2");
  require(S > 0, "decay constant limit: Sobolev constant must be positive");
  return std::exp(m * std::log(S) +
                  (double(m) * m - 1.0) * std::log(2.0));
}

double half_harnack_constant(double p, double nu, double q) {
  require(p > 1.0 && p < nu, "half-Harnack constant: requires 1 < p < nu");
  require(q != 0.0, "half-Harnack constant: q = 0 has no branch");
  if (q < 0) return std::exp((p + nu) * std::log(2.0));
  if (q >= p) return std::exp(nu * std::log(2.0) + p * std::log1p(p));
  return std::exp(nu * std::log(2.0) + p * std::log(3.0) +
                  nu * std::log(nu) - p * std::log(p) -
                  (nu - p) * std::log(nu - p));
}

double moser_q0(double p, double nu, double q) {
  require(p > 1.0 && p < nu, "Moser exponent: requires 1 < p < nu");
  require(q != 0.0, "Moser exponent: q = 0 has no branch");
  if (q < 0 || q >= p) return q;
  const double k = nu / (nu - p);
  const double a = q / k;
  double q0 = q;
  if (p - 1.0 > a) {
    // p-1 sits inside some ladder interval (k^{j-1} a, k^j a]; shift the
    // starting exponent so the nearest ladder point lands half an interval
    // away from p-1.
    int j = 1;
    double lo = a, hi = k * a;
    while (hi < (p - 1.0) * (1.0 - 1e-15) && j < 400) {
      lo = hi;
      hi *= k;
      ++j;
    }
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    const double ladder_j1 = (p - 1.0 > mid) ? (p - 1.0) - half
                                             : (p - 1.0) + half;
    q0 = ladder_j1 / lo * a;  // ladder_j1 = q0 k^{j-1} and lo = k^{j-1} a
  }
  // sanity: the whole ladder stays (k-1) q / (2k) away from p-1
  const double gap = (k - 1.0) * q / (2.0 * k);
  for (double qi = q0; qi < p + gap + 1.0; qi *= k)
    if (std::abs(qi - (p - 1.0)) < gap * (1.0 - 1e-9))
      throw math_error("Moser exponent: ladder separation failed");
  return q0;
}

double flat_isoperimetric_constant(int m) {
  require(m >= 2, "flat Sobolev constant: dimension must be >= 2");
  const double omega = unit_sphere_volume(m);
  return std::exp(-(m - 1.0) / m * std::log((double)m) -
                  std::log(omega) / m);
}

double sobolev_from_isoperimetric(double S1, double p, double nu) {
  require(S1 > 0, "Sobolev from isoperimetric: constant must be positive");
  require(p >= 1.0 && p < nu,
          "Sobolev from isoperimetric: requires 1 <= p < nu");
  return std::pow(S1 * p * (nu - 1.0) / (nu - p), p);
}

bool ConstantsRecord::finite_positive() const {
  auto ok = [](double x) { return std::isfinite(x) && x > 0; };
  if (!(ok(p) && ok(nu) && ok(sobolev) && p > 1.0 && p < nu)) return false;
  if (!(ok(decay) && ok(half_sup_small_q) && ok(half_sup_large_q) &&
        ok(half_inf)))
    return false;
  return decay_p1 == 0.0 || ok(decay_p1);
}

ConstantsRecord make_constants(double p, double nu, double S, double p0,
                               double poincare, double radius) {
  ConstantsRecord c;
  c.p = p;
  c.nu = nu;
  c.p0 = p0;
  c.sobolev = S;
  c.poincare = poincare;
  c.radius = radius;
  c.decay = decay_constant(p, nu, S);
  const double m_round = std::round(nu);
  c.decay_p1 = (std::abs(nu - m_round) < 1e-9 && m_round >= 2)
                   ? decay_constant_p1_limit(S, (int)m_round)
                   : 0.0;
  c.half_sup_small_q = half_harnack_constant(p, nu, 0.5 * p);
  c.half_sup_large_q = half_harnack_constant(p, nu, p);
  c.half_inf = half_harnack_constant(p, nu, -1.0);
  return c;
}

// ----------------------------------------------------------- decay audit

LevelWeight unit_weight() {
  return [](double) { return 1.0; };
}

LevelWeight volume_ratio_weight(const ModelManifold& mm, double nu) {
  require(nu >= mm.m - 1e-12,
          "volume weight: nu must be at least the model dimension");
  const ModelManifold m2 = mm;  // own a copy; weights outlive callers
  return [m2, nu](double t) {
    const double hi = std::min(t, m2.t_max);
    if (!(hi > 0)) return 0.0;
    // sup over a geometric grid; the s -> 0 end tends to m/omega_{m-1}
    // when nu equals the dimension and to 0 when nu exceeds it
    double sup = (nu - m2.m < 1e-12) ? m2.m / m2.omega : 0.0;
    for (double s = hi; s > 1e-12 * hi; s *= 0.5)
      sup = std::max(sup, std::exp(nu * std::log(s) - std::log(m2.V(s))));
    return sup;
  };
}

LevelWeight volume_ratio_weight(const SurfaceMesh& mesh, double nu) {
  require(mesh.has_model, "volume weight: the mesh carries no base model");
  const int M = 256;
  const double lo = mesh.eps_pole;
  double hi = lo;
  for (int v = 0; v < mesh.nv(); ++v) hi = std::max(hi, mesh.r_field[v]);
  // prefix maxima of s^nu / |B_s| at sampled levels; |B_s| = chart sublevel
  // area of the distance field plus the model pole cap
  auto table = std::make_shared<std::vector<double>>(M);
  const double cap = ball_volume(mesh.mm, lo);
  const ModelManifold mm = mesh.mm;
  double run = (nu - mm.m < 1e-12) ? mm.m / mm.omega : 0.0;
  // below the collar the ball is the model's
  for (double s = lo; s > 1e-12 * lo; s *= 0.5)
    run = std::max(run, std::exp(nu * std::log(s) - std::log(mm.V(s))));
  for (int j = 0; j < M; ++j) {
    const double s = lo + (hi - lo) * (j + 1) / M;
    const double vol = cap + level_set_measure(mesh, mesh.r_field, s).volume;
    run = std::max(run, std::exp(nu * std::log(s) - std::log(vol)));
    (*table)[j] = run;
  }
  return [table, lo, hi, M](double t) {
    if (t <= lo) return (*table)[0];
    const int j = std::min(M - 1, (int)std::floor((t - lo) / (hi - lo) * M));
    return (*table)[j];
  };
}

namespace {

EstimateAudit decay_core(const ConstantsRecord& c, const LevelWeight& eta,
                         double r_min, double tol,
                         const std::function<int()>& count,
                         const std::function<double(int)>& radius,
                         const std::function<double(int)>& log_kernel,
                         const std::function<std::string(int)>& tag) {
  require(c.finite_positive(), "decay audit: constants are not usable");
  const LevelWeight w = eta ? eta : unit_weight();
  const double p = c.p, nu = c.nu, logC = std::log(c.decay);
  double lhs = NEG_INF;
  std::string at;
  const int n = count();
  for (int i = 0; i < n; ++i) {
    const double r = radius(i);
    if (!(r > r_min) || !(r > 0)) continue;
    const double lg = log_kernel(i);
    if (!std::isfinite(lg)) continue;  // zero kernel satisfies any bound
    const double le = std::log(w(2.0 * r));
    const double v = (p - 1.0) * lg + (nu - p) * std::log(r) - logC - le;
    if (v > lhs) {
      lhs = v;
      at = tag(i);
    }
  }
  return EstimateAudit::inequality("kernel decay bound", lhs, 0.0, tol, at);
}

}  // namespace

EstimateAudit check_decay(const RadialGrid& g, const Eigen::VectorXd& log_G,
                          const ConstantsRecord& c, const LevelWeight& eta,
                          double r_min, double tol) {
  require(log_G.size() == g.N() + 1, "decay audit: field size mismatch");
  return decay_core(
      c, eta, r_min, tol, [&] { return g.N() + 1; },
      [&](int i) { return g.t[i]; }, [&](int i) { return log_G[i]; },
      [&](int i) { return "node at t=" + std::to_string(g.t[i]); });
}

EstimateAudit check_decay(const SurfaceMesh& mesh,
                          const Eigen::VectorXd& log_G,
                          const ConstantsRecord& c, const LevelWeight& eta,
                          double r_min, double tol) {
  require(log_G.size() == mesh.nv(), "decay audit: field size mismatch");
  return decay_core(
      c, eta, r_min, tol, [&] { return mesh.nv(); },
      [&](int i) { return mesh.r_field[i]; },
      [&](int i) { return log_G[i]; },
      [&](int i) { return "vertex " + std::to_string(i); });
}

// ----------------------------------------------- one-sided Moser bounds

EstimateAudit check_half_harnack(const SurfaceMesh& mesh,
                                 const Eigen::VectorXd& u, double q,
                                 const AnnulusSpec& a,
                                 const ConstantsRecord& c, double tol) {
  require(u.size() == mesh.nv(), "one-sided bound: field size mismatch");
  require(q != 0.0, "one-sided bound: q = 0 has no branch");
  require(a.T > 0 && a.r_lo < a.r_hi, "one-sided bound: bad annulus");
  require(a.r_lo - a.T >= mesh.eps_pole - 1e-12 &&
              a.r_hi + a.T <= mesh.T_out + 1e-12,
          "one-sided bound: the inflated band leaves the chart");

  // inflated band A0, classified by face barycenter
  double area = 0;
  std::vector<int> faces;
  for (int f = 0; f < mesh.nf(); ++f) {
    const double rb = (mesh.r_field[mesh.F(f, 0)] +
                       mesh.r_field[mesh.F(f, 1)] +
                       mesh.r_field[mesh.F(f, 2)]) /
                      3.0;
    if (rb >= a.r_lo - a.T && rb <= a.r_hi + a.T) {
      faces.push_back(f);
      area += mesh.tri_area(f);
    }
  }
  require(!faces.empty(), "one-sided bound: the band contains no faces");

  // normalize the field on A0; both sides of the bound are 1-homogeneous
  double umax = 0;
  for (int f : faces)
    for (int k = 0; k < 3; ++k)
      umax = std::max(umax, std::abs(u[mesh.F(f, k)]));
  require(umax > 0, "one-sided bound: field vanishes on the band");

  double mean_q = 0;
  for (int f : faces) {
    const double uf = (u[mesh.F(f, 0)] + u[mesh.F(f, 1)] + u[mesh.F(f, 2)]) /
                      (3.0 * umax);
    if (uf <= 0) {
      require(q > 0, "one-sided bound: field must be positive when q < 0");
      continue;  // u^q -> 0 for q > 0
    }
    mean_q += mesh.tri_area(f) * std::exp(q * std::log(uf));
  }
  mean_q /= area;

  double sup = NEG_INF, inf = POS_INF;
  for (int v = 0; v < mesh.nv(); ++v)
    if (mesh.r_field[v] >= a.r_lo && mesh.r_field[v] <= a.r_hi) {
      sup = std::max(sup, u[v] / umax);
      inf = std::min(inf, u[v] / umax);
    }
  require(std::isfinite(sup), "one-sided bound: the core band is empty");

  const double q0 = moser_q0(c.p, c.nu, q);
  const double C = half_harnack_constant(c.p, c.nu, q);
  const double log_rhs = c.nu / (c.p * q0) * std::log(c.sobolev * C) -
                         c.nu / q0 * std::log(a.T) +
                         std::log(area) / q0 + std::log(mean_q) / q;
  if (q > 0) {
    const double ratio = sup <= 0 ? 0.0 : std::exp(std::log(sup) - log_rhs);
    return EstimateAudit::inequality("one-sided sup bound", ratio, 1.0, tol);
  }
  require(inf > 0, "one-sided bound: field must be positive when q < 0");
  const double ratio = std::exp(log_rhs - std::log(inf));
  return EstimateAudit::inequality("one-sided inf bound", ratio, 1.0, tol);
}

// --------------------------------------------- Harnack form continuation

double harnack_exponent_fit(const std::vector<HarnackSample>& samples) {
  require(!samples.empty(), "oscillation fit: no samples");
  double c = 0;
  for (const auto& s : samples) {
    require(s.p > 1.0 && std::isfinite(s.sup) && std::isfinite(s.inf) &&
                s.inf > 0 && s.sup >= s.inf,
            "oscillation fit: bad sample");
    c += (s.p - 1.0) * std::log(s.sup / s.inf);
  }
  return c / (double)samples.size();
}

EstimateAudit check_harnack_form(const std::vector<HarnackSample>& samples,
                                 double slack) {
  require(samples.size() >= 3, "oscillation form: needs >= 3 samples");
  const double c = harnack_exponent_fit(samples);
  double zmax = 0, at_p = samples.front().p;
  for (const auto& s : samples) {
    const double z = (s.p - 1.0) * std::log(s.sup / s.inf);
    if (z > zmax) {
      zmax = z;
      at_p = s.p;
    }
  }
  return EstimateAudit::inequality("scaled oscillation stays bounded", zmax,
                                   (1.0 + slack) * c, 1e-12,
                                   "p=" + std::to_string(at_p));
}

// --------------------------------------------------- flux functionals

namespace {

// nudge a level off exact node values so contours are unambiguous
double nudge_level(const Eigen::VectorXd& field, double t) {
  double lo = POS_INF, hi = NEG_INF;
  bool tie = false;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    if (!std::isfinite(field[i])) continue;
    lo = std::min(lo, field[i]);
    hi = std::max(hi, field[i]);
    if (field[i] == t) tie = true;
  }
  return tie ? t + 1e-9 * std::max(hi - lo, 1e-30) : t;
}

// integral of (P1 field a) * face_w over the chart sublevel {lf <= level},
// exact per face for the linear interpolants
double sublevel_integral(const SurfaceMesh& mesh, const Eigen::VectorXd& a,
                         const std::vector<double>& face_w,
                         const Eigen::VectorXd& lf, double level) {
  double total = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    double px[3], py[3], lv[3], av[3];
    for (int k = 0; k < 3; ++k) {
      px[k] = mesh.P(f, 2 * k);
      py[k] = mesh.P(f, 2 * k + 1);
      lv[k] = lf[mesh.F(f, k)];
      av[k] = a[mesh.F(f, k)];
    }
    // clip to the half-plane {lv <= level}
    double qx[7], qy[7], qa[7];
    int nq = 0;
    for (int k = 0; k < 3; ++k) {
      const int k2 = (k + 1) % 3;
      const bool in1 = lv[k] <= level, in2 = lv[k2] <= level;
      if (in1) {
        qx[nq] = px[k];
        qy[nq] = py[k];
        qa[nq] = av[k];
        ++nq;
      }
      if (in1 != in2) {
        const double s = (level - lv[k]) / (lv[k2] - lv[k]);
        qx[nq] = px[k] + s * (px[k2] - px[k]);
        qy[nq] = py[k] + s * (py[k2] - py[k]);
        qa[nq] = av[k] + s * (av[k2] - av[k]);
        ++nq;
      }
    }
    if (nq < 3) continue;
    double area2 = 0, int2 = 0;  // doubled signed area and integral
    for (int i = 1; i + 1 < nq; ++i) {
      const double cr = (qx[i] - qx[0]) * (qy[i + 1] - qy[0]) -
                        (qx[i + 1] - qx[0]) * (qy[i] - qy[0]);
      area2 += cr;
      int2 += cr * (qa[0] + qa[i] + qa[i + 1]) / 3.0;
    }
    const double tri2 = (px[1] - px[0]) * (py[2] - py[0]) -
                        (px[2] - px[0]) * (py[1] - py[0]);
    if (tri2 == 0) continue;
    // rescale chart measure to the metric measure of the whole face
    total += face_w[f] * mesh.tri_area(f) * (0.5 * int2) / (0.5 * tri2);
  }
  return total;
}

double collar_mean(const SurfaceMesh& mesh, const Eigen::VectorXd& a) {
  double s = 0;
  for (int v : mesh.collar) s += a[v];
  return s / (double)mesh.collar.size();
}

}  // namespace

FluxFunctionals flux_functionals(const RadialGrid& g,
                                 const Eigen::VectorXd& rho,
                                 const Eigen::VectorXd& u, double p,
                                 double t) {
  require(rho.size() == g.N() + 1 && u.size() == g.N() + 1,
          "flux functionals: field size mismatch");
  require(t > 0 && t <= g.mm.t_max, "flux functionals: level out of range");
  const double tl = nudge_level(rho, t);
  Eigen::VectorXd w(g.N());
  for (int i = 0; i < g.N(); ++i) {
    const double d = std::abs(cell_derivative(g, rho, i));
    w[i] = std::pow(d, p - 1.0);
  }
  FluxFunctionals out;
  out.A_u = surface_integral_on_level(g, u, w, rho, tl) / g.mm.v(t);

  // bulk integral over {rho <= t}, cell fractions from the linear field,
  // plus the pole cap continued with the innermost integrand
  double bulk = 0;
  for (int i = 0; i < g.N(); ++i) {
    const double r0 = rho[i], r1 = rho[i + 1];
    if (!std::isfinite(r0) || !std::isfinite(r1)) continue;
    double lo = g.t[i], hi = g.t[i + 1];
    if (std::min(r0, r1) > tl) continue;
    if (std::max(r0, r1) > tl) {  // partial cell
      const double s = (tl - r0) / (r1 - r0);
      if (r0 <= tl)
        hi = g.t[i] + s * g.dt(i);
      else
        lo = g.t[i] + s * g.dt(i);
    }
    const double um = 0.5 * (u[i] + u[i + 1]);
    const double d = std::abs(cell_derivative(g, rho, i));
    bulk += g.mm.mean_v(lo, hi) * (hi - lo) * um * std::pow(d, p);
  }
  const double d0 = std::abs(cell_derivative(g, rho, 0));
  bulk += ball_volume(g.mm, g.eps_pole) * u[0] * std::pow(d0, p);
  out.V_u = bulk / ball_volume(g.mm, t);
  return out;
}

FluxFunctionals flux_functionals(const SurfaceMesh& mesh,
                                 const Eigen::VectorXd& rho,
                                 const Eigen::VectorXd& u, double p,
                                 double t) {
  require(mesh.has_model, "flux functionals: the mesh carries no base model");
  require(rho.size() == mesh.nv() && u.size() == mesh.nv(),
          "flux functionals: field size mismatch");
  require(t > 0 && t <= mesh.mm.t_max,
          "flux functionals: level out of range");
  const double tl = nudge_level(rho, t);
  std::vector<double> wA(mesh.nf()), wV(mesh.nf());
  double coll_g = 0;
  int coll_n = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    const double d = cell_grad_norm(mesh, rho, f);
    wA[f] = std::pow(d, p - 1.0);
    wV[f] = std::pow(d, p);
    for (int k = 0; k < 3; ++k)
      if (mesh.on_boundary[mesh.F(f, k)] &&
          mesh.r_field[mesh.F(f, k)] < 0.5 * (mesh.eps_pole + mesh.T_out)) {
        coll_g += wV[f];
        ++coll_n;
        break;
      }
  }
  Eigen::VectorXd wAv = Eigen::Map<Eigen::VectorXd>(wA.data(), mesh.nf());
  FluxFunctionals out;
  out.A_u = surface_integral_on_level(mesh, u, wAv, rho, tl) / mesh.mm.v(t);

  // chart bulk integral plus the pole cap continued with collar averages
  const double cap = ball_volume(mesh.mm, mesh.eps_pole) *
                     collar_mean(mesh, u) *
                     (coll_n > 0 ? coll_g / coll_n : 1.0);
  out.V_u = (sublevel_integral(mesh, u, wV, rho, tl) + cap) /
            ball_volume(mesh.mm, t);
  return out;
}

namespace {

template <class Domain>
EstimateAudit flux_derivative_core(const Domain& dom,
                                   const Eigen::VectorXd& rho,
                                   const Eigen::VectorXd& u, double p,
                                   double t, double delta_rel, double tol,
                                   const ModelManifold& mm) {
  require(delta_rel > 0 && delta_rel < 0.5,
          "flux derivative: bad differencing width");
  const double dt = delta_rel * t;
  const auto lo = flux_functionals(dom, rho, u, p, t - dt);
  const auto hi = flux_functionals(dom, rho, u, p, t + dt);
  const auto mid = flux_functionals(dom, rho, u, p, t);
  const double fd = (hi.V_u - lo.V_u) / (2.0 * dt);
  const double model = sphere_volume(mm, t) / ball_volume(mm, t) *
                       (mid.A_u - mid.V_u);
  const double scale =
      std::max({std::abs(mid.A_u), std::abs(mid.V_u), 0.1});
  return EstimateAudit::identity_check("bulk flux derivative identity",
                                       fd / scale, model / scale, tol,
                                       level_tag(t));
}

}  // namespace

EstimateAudit check_flux_derivative(const SurfaceMesh& mesh,
                                    const Eigen::VectorXd& rho,
                                    const Eigen::VectorXd& u, double p,
                                    double t, double delta_rel, double tol) {
  return flux_derivative_core(mesh, rho, u, p, t, delta_rel, tol, mesh.mm);
}

EstimateAudit check_flux_derivative(const RadialGrid& g,
                                    const Eigen::VectorXd& rho,
                                    const Eigen::VectorXd& u, double p,
                                    double t, double delta_rel, double tol) {
  return flux_derivative_core(g, rho, u, p, t, delta_rel, tol, g.mm);
}

namespace {

template <class Domain>
std::vector<FluxTableRow> flux_table_core(const Domain& dom,
                                          const Eigen::VectorXd& rho,
                                          double p,
                                          const std::vector<double>& levels,
                                          const ModelManifold& mm,
                                          double cap_volume) {
  std::vector<FluxTableRow> rows;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(rho.size());
  for (double t : levels) {
    FluxTableRow r;
    r.t = t;
    const auto ff = flux_functionals(dom, rho, ones, p, t);
    r.A1 = ff.A_u;
    r.V1 = ff.V_u;
    const auto ls = level_set_measure(dom, rho, t);
    r.perimeter = ls.perimeter;
    r.volume = ls.volume + cap_volume;
    r.v_h = sphere_volume(mm, t);
    r.V_h = ball_volume(mm, t);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::vector<FluxTableRow> flux_table(const RadialGrid& g,
                                     const Eigen::VectorXd& rho, double p,
                                     const std::vector<double>& levels) {
  return flux_table_core(g, rho, p, levels, g.mm, 0.0);
}

std::vector<FluxTableRow> flux_table(const SurfaceMesh& mesh,
                                     const Eigen::VectorXd& rho, double p,
                                     const std::vector<double>& levels) {
  require(mesh.has_model, "flux table: the mesh carries no base model");
  return flux_table_core(mesh, rho, p, levels, mesh.mm,
                         ball_volume(mesh.mm, mesh.eps_pole));
}

// ------------------------------------------------ isoperimetric audits

namespace {

std::vector<double> default_levels(double lo, double hi) {
  std::vector<double> out;
  for (int j = 0; j < 8; ++j)
    out.push_back(lo + (hi - lo) * (0.15 + 0.55 * j / 7.0));
  return out;
}

template <class Domain>
std::vector<EstimateAudit> isoperimetric_core(
    const Domain& dom, const FlowResult& fr, std::vector<double> levels,
    double rel_tol, double vol_slack, const ModelManifold& mm,
    double cap_volume, double lo, double hi, bool trend_hard) {
  if ((int)fr.rho1.size() == 0)
    throw config_error("isoperimetric audit: flow has no limit field");
  if (levels.empty()) levels = default_levels(lo, hi);
  std::vector<EstimateAudit> audits;
  for (double t : levels) {
    const auto ls = level_set_measure(dom, fr.rho1, t);
    const double vh = sphere_volume(mm, t), Vh = ball_volume(mm, t);
    audits.push_back(EstimateAudit::identity_check(
        "limit-level perimeter matches the model area", ls.perimeter / vh,
        1.0, rel_tol, level_tag(t)));
    audits.push_back(EstimateAudit::inequality(
        "limit-level volume dominates the model ball",
        vol_slack * Vh, ls.volume + cap_volume, 1e-12 * Vh, level_tag(t)));
  }
  // near-pole trend: the perimeter ratio tightens toward 1
  const double ta = lo + 0.08 * (hi - lo), tb = lo + 0.32 * (hi - lo);
  const double ra =
      level_set_measure(dom, fr.rho1, ta).perimeter / sphere_volume(mm, ta);
  const double rb =
      level_set_measure(dom, fr.rho1, tb).perimeter / sphere_volume(mm, tb);
  EstimateAudit trend = EstimateAudit::inequality(
      "perimeter ratio tightens toward the pole", std::abs(ra - 1.0),
      std::abs(rb - 1.0) + 0.01, 0.0, level_tag(ta));
  trend.hard = trend_hard;
  audits.push_back(trend);
  return audits;
}

}  // namespace

std::vector<EstimateAudit> check_isoperimetric(
    const RadialGrid& g, const FlowResult& fr,
    const std::vector<double>& levels, double rel_tol, double vol_slack) {
  require(fr.rho1.size() == g.N() + 1,
          "isoperimetric audit: field size mismatch");
  return isoperimetric_core(g, fr, levels, rel_tol, vol_slack, g.mm, 0.0,
                            g.eps_pole, g.T_out, true);
}

std::vector<EstimateAudit> check_isoperimetric(
    const SurfaceMesh& mesh, const FlowResult& fr,
    const std::vector<double>& levels, double rel_tol, double vol_slack) {
  require(mesh.has_model,
          "isoperimetric audit: the mesh carries no base model");
  require(fr.rho1.size() == mesh.nv(),
          "isoperimetric audit: field size mismatch");
  return isoperimetric_core(mesh, fr, levels, rel_tol, vol_slack, mesh.mm,
                            ball_volume(mesh.mm, mesh.eps_pole),
                            mesh.eps_pole, mesh.T_out, false);
}

}  // namespace fakedist
