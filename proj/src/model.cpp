#include "fakedist/model.hpp"

#include <algorithm>
#include <cmath>

#include "fakedist/quadrature.hpp"

namespace fakedist {

// ---------------------------------------------------------------- profiles

CurvatureProfile CurvatureProfile::constant(double k2) {
  CurvatureProfile p;
  p.kind = Kind::Constant;
  p.kappa2 = k2;
  return p;
}

CurvatureProfile CurvatureProfile::table(std::vector<double> t,
                                         std::vector<double> H) {
  CurvatureProfile p;
  p.kind = Kind::Table;
  p.t = std::move(t);
  p.H = std::move(H);
  return p;
}

CurvatureProfile CurvatureProfile::callable(std::function<double(double)> f) {
  CurvatureProfile p;
  p.kind = Kind::Callable;
  p.fn = std::move(f);
  return p;
}

double CurvatureProfile::operator()(double s) const {
  switch (kind) {
    case Kind::Constant:
      return kappa2;
    case Kind::Callable:
      return fn(s);
    case Kind::Table: {
      if (s <= t.front()) return H.front();
      if (s >= t.back()) return H.back();
      auto it = std::upper_bound(t.begin(), t.end(), s);
      std::size_t i = (it - t.begin()) - 1;
      double x = (s - t[i]) / (t[i + 1] - t[i]);
      return H[i] + x * (H[i + 1] - H[i]);
    }
  }
  return 0;
}

void CurvatureProfile::validate(double t_max) const {
  if (kind == Kind::Constant) return;  // negative allowed: comparison model
  if (kind == Kind::Table) {
    if (t.size() != H.size() || t.size() < 2)
      throw config_error("curvature table needs matching t/H, length >= 2");
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      if (!(t[i + 1] > t[i]))
        throw config_error("curvature table abscissae must increase");
      if (H[i + 1] > H[i] + 1e-12 * (1.0 + std::fabs(H[i])))
        throw config_error("curvature profile must be non-increasing");
    }
    for (double v : H)
      if (v < 0) throw config_error("curvature profile must be >= 0");
    return;
  }
  // callable: sample
  const int ns = 512;
  double prev = POS_INF;
  for (int i = 0; i <= ns; ++i) {
    double s = t_max * i / ns;
    double v = fn(s);
    if (v < -1e-12) throw config_error("curvature profile must be >= 0");
    if (v > prev + 1e-9 * (1.0 + std::fabs(prev)))
      throw config_error("curvature profile must be non-increasing");
    prev = v;
  }
}

// ----------------------------------------------------------------- volumes

double unit_sphere_volume(int m) {
  // omega_{m-1} = 2 pi^{m/2} / Gamma(m/2)
  return 2.0 * std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m);
}

// ------------------------------------------------------------ interpolation

namespace {

struct HermitePiece {
  double h0, h1, d0, d1, dt, t0;
  double value(double s) const {
    double x = (s - t0) / dt;
    double x2 = x * x, x3 = x2 * x;
    return h0 * (2 * x3 - 3 * x2 + 1) + dt * d0 * (x3 - 2 * x2 + x) +
           h1 * (-2 * x3 + 3 * x2) + dt * d1 * (x3 - x2);
  }
  double deriv(double s) const {
    double x = (s - t0) / dt;
    double x2 = x * x;
    return (h0 * (6 * x2 - 6 * x) + dt * d0 * (3 * x2 - 4 * x + 1) +
            h1 * (-6 * x2 + 6 * x) + dt * d1 * (3 * x2 - 2 * x)) /
           dt;
  }
};

}  // namespace

void ModelManifold::check_range(double s) const {
  if (!(s >= 0.0) || s > t_max * (1 + 1e-12))
    throw math_error("radius outside model table range");
  if (s > R_inf * (1 + 1e-12))
    throw math_error("radius beyond the model's conjugate radius");
}

static HermitePiece piece_at(const ModelManifold& mm, double s) {
  double dt = mm.dt();
  std::size_t n = mm.t.size() - 1;
  std::size_t i = std::min<std::size_t>(
      n - 1, (std::size_t)std::max(0.0, std::floor(s / dt)));
  return {mm.h[i], mm.h[i + 1], mm.hp[i], mm.hp[i + 1], dt, mm.t[i]};
}

double ModelManifold::h_at(double s) const {
  check_range(s);
  if (power_law) return std::pow(s, kprime);
  if (s == 0.0) return 0.0;
  return piece_at(*this, s).value(s);
}

double ModelManifold::hp_at(double s) const {
  check_range(s);
  if (power_law)
    return kprime == 1.0 ? 1.0 : kprime * std::pow(s, kprime - 1.0);
  if (s == 0.0) return 1.0;
  return piece_at(*this, s).deriv(s);
}

double ModelManifold::log_h_at(double s) const {
  if (power_law) return kprime * std::log(s);
  double v = h_at(s);
  if (!(v > 0)) throw math_error("warping factor not positive");
  return std::log(v);
}

double ModelManifold::v_ratio(double s) const {
  return (m - 1) * hp_at(s) / h_at(s);
}

double ModelManifold::V(double s) const {
  check_range(s);
  if (power_law) {
    double q = (m - 1) * kprime;
    return omega * std::pow(s, q + 1) / (q + 1);
  }
  double dtv = dt();
  std::size_t n = t.size() - 1;
  std::size_t i = std::min<std::size_t>(
      n - 1, (std::size_t)std::max(0.0, std::floor(s / dtv)));
  auto vh = [&](double x) { return omega * std::pow(h_at(x), m - 1); };
  return Vtab[i] + gauss5(vh, t[i], s);
}

double ModelManifold::mean_v(double a, double b) const {
  if (!(b > a)) throw math_error("mean_v needs a < b");
  auto vh = [&](double x) { return omega * std::pow(h_at(x), m - 1); };
  if (b - a < 2.0 * dt()) {
    // short interval: integrate directly to avoid cancellation
    return gauss5(vh, a, b) / (b - a);
  }
  return (V(b) - V(a)) / (b - a);
}

double ModelManifold::inverse_v(double val) const {
  if (!(val > 0)) throw math_error("inverse_v needs a positive value");
  double lo = 1e-9 * t_max;
  double flat = std::pow(val / omega, 1.0 / (m - 1));
  if (flat < lo) return flat;  // v ~ omega t^{m-1} near the pole
  if (val >= v(t_max)) {
    if (val <= v(t_max) * (1 + 1e-9)) return t_max;
    throw math_error("inverse_v above table range");
  }
  double hi = t_max;
  if (v(lo) > val) return flat;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (v(mid) < val ? lo : hi) = mid;
    if (hi - lo < 1e-15 * t_max) break;
  }
  return 0.5 * (lo + hi);
}

// ------------------------------------------------------------------ warping

static void fit_tail(ModelManifold& mm) {
  // least squares on log v_h over the last decade of the table
  std::vector<double> ts, ys;
  double lo = 0.8 * mm.t_max;
  for (std::size_t i = 0; i < mm.t.size(); ++i) {
    if (mm.t[i] >= lo && mm.h[i] > 0) {
      ts.push_back(mm.t[i]);
      ys.push_back(std::log(mm.omega) + (mm.m - 1) * std::log(mm.h[i]));
    }
  }
  auto lsq = [&](bool in_log_t, double& a, double& b) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = ts.size();
    for (std::size_t i = 0; i < n; ++i) {
      double x = in_log_t ? std::log(ts[i]) : ts[i];
      sx += x;
      sy += ys[i];
      sxx += x * x;
      sxy += x * ys[i];
    }
    b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    a = (sy - b * sx) / n;
    double r2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double x = in_log_t ? std::log(ts[i]) : ts[i];
      double e = ys[i] - (a + b * x);
      r2 += e * e;
    }
    return std::sqrt(r2 / n);
  };
  if (ts.size() < 8) {
    mm.tail = {false, 0, 0, POS_INF};
    return;
  }
  double ae, be, ap, bp;
  double re = lsq(false, ae, be);
  double rp = lsq(true, ap, bp);
  if (re <= rp)
    mm.tail = {true, ae, be, re};
  else
    mm.tail = {false, ap, bp, rp};
}

ModelManifold solve_warping(const CurvatureProfile& profile, int m,
                            double t_max, int n) {
  if (m < 2 || m > 16) throw config_error("dimension m must be in [2,16]");
  if (!(t_max > 0)) throw config_error("t_max must be positive");
  if (n < 64) throw config_error("warping table needs n >= 64");
  profile.validate(t_max);

  ModelManifold mm;
  mm.m = m;
  mm.profile = profile;
  mm.t_max = t_max;
  mm.omega = unit_sphere_volume(m);
  mm.t.resize(n + 1);
  mm.h.resize(n + 1);
  mm.hp.resize(n + 1);
  double dt = t_max / n;
  double h = 0.0, hp = 1.0;
  mm.t[0] = 0;
  mm.h[0] = h;
  mm.hp[0] = hp;
  for (int i = 0; i < n; ++i) {
    double s = i * dt;
    auto f = [&](double tt, double hh) { return profile(tt) * hh; };
    // classic RK4 on (h, h')
    double k1h = hp, k1p = f(s, h);
    double k2h = hp + 0.5 * dt * k1p, k2p = f(s + 0.5 * dt, h + 0.5 * dt * k1h);
    double k3h = hp + 0.5 * dt * k2p, k3p = f(s + 0.5 * dt, h + 0.5 * dt * k2h);
    double k4h = hp + dt * k3p, k4p = f(s + dt, h + dt * k3h);
    h += dt / 6.0 * (k1h + 2 * k2h + 2 * k3h + k4h);
    hp += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    mm.t[i + 1] = (i + 1) * dt;
    mm.h[i + 1] = h;
    mm.hp[i + 1] = hp;
  }
  // conjugate radius: first zero of h past 0
  mm.R_inf = POS_INF;
  for (int i = 1; i <= n; ++i) {
    if (mm.h[i] <= 0.0) {
      double h0 = mm.h[i - 1], h1 = mm.h[i];
      mm.R_inf = mm.t[i - 1] + dt * h0 / (h0 - h1);
      break;
    }
  }
  if (mm.R_inf < POS_INF) {
    bool nonneg = true;
    const int ns = 256;
    for (int i = 0; i <= ns; ++i)
      if (profile(t_max * i / ns) < 0) nonneg = false;
    if (nonneg)
      throw math_error("warping factor vanished under a nonnegative profile");
  }
  // cumulative ball volume (gauss5 is exact for the per-piece cubic^ (m-1)
  // up to m=4 and ~1e-14 beyond)
  mm.Vtab.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    if (mm.t[i] >= mm.R_inf) {
      mm.Vtab[i + 1] = mm.Vtab[i];
      continue;
    }
    HermitePiece pc{mm.h[i], mm.h[i + 1], mm.hp[i], mm.hp[i + 1], dt, mm.t[i]};
    auto vh = [&](double x) {
      return mm.omega * std::pow(std::max(0.0, pc.value(x)), m - 1);
    };
    double b = std::min(mm.t[i + 1], mm.R_inf);
    mm.Vtab[i + 1] = mm.Vtab[i] + gauss5(vh, mm.t[i], b);
  }
  fit_tail(mm);
  return mm;
}

ModelManifold power_law_model(int m, double kprime, double t_max, int n) {
  if (kprime < 1.0) throw config_error("power-law exponent must be >= 1");
  if (m < 2 || m > 16) throw config_error("dimension m must be in [2,16]");
  ModelManifold mm;
  mm.m = m;
  // h = t^kprime has h''/h = kprime (kprime - 1) / t^2
  const double c2 = kprime * (kprime - 1.0);
  mm.profile = CurvatureProfile::callable([c2](double s) {
    return s > 0 ? c2 / (s * s) : (c2 > 0 ? POS_INF : 0.0);
  });
  mm.t_max = t_max;
  mm.omega = unit_sphere_volume(m);
  mm.power_law = true;
  mm.kprime = kprime;
  mm.t.resize(n + 1);
  mm.h.resize(n + 1);
  mm.hp.resize(n + 1);
  mm.Vtab.resize(n + 1);
  double q = (m - 1) * kprime;
  for (int i = 0; i <= n; ++i) {
    double s = t_max * i / n;
    mm.t[i] = s;
    mm.h[i] = std::pow(s, kprime);
    mm.hp[i] = s > 0 ? kprime * std::pow(s, kprime - 1) : (kprime == 1 ? 1 : 0);
    mm.Vtab[i] = mm.omega * std::pow(s, q + 1) / (q + 1);
  }
  mm.R_inf = POS_INF;
  mm.tail = {false, std::log(mm.omega), q, 0.0};
  return mm;
}

double sphere_volume(const ModelManifold& mm, double t) { return mm.v(t); }
double ball_volume(const ModelManifold& mm, double t) { return mm.V(t); }

// ---------------------------------------------------------------- mu kernel

double mu_euclidean(int m, double p, double r) {
  if (!(r > 0)) throw math_error("mu needs r > 0");
  if (!(p > 1) || p > m) throw config_error("mu needs p in (1, m]");
  double om = unit_sphere_volume(m);
  if (p == m) return std::pow(om, -1.0 / (m - 1)) * (-std::log(r));
  double lam = 1.0 / (p - 1);
  return std::pow(om, -lam) * ((p - 1) / (m - p)) *
         std::pow(r, -(m - p) / (p - 1));
}

double log_mu_euclidean(int m, double p, double r) {
  if (p == (double)m) {
    double v = mu_euclidean(m, p, r);
    if (!(v > 0)) throw math_error("log_mu: nonpositive value");
    return std::log(v);
  }
  double lam = 1.0 / (p - 1);
  double om = unit_sphere_volume(m);
  return -lam * std::log(om) + std::log((p - 1) / (m - p)) -
         (m - p) / (p - 1) * std::log(r);
}

// ------------------------------------------------------------ parabolicity

bool nonparabolic(const ModelManifold& mm, double p) {
  if (!(p > 1)) throw config_error("p must exceed 1");
  double lam = 1.0 / (p - 1);
  if (mm.power_law) {
    double b = (mm.m - 1) * mm.kprime;
    if (std::fabs(b - (p - 1)) <= 1e-6)
      throw math_error("indeterminate tail: borderline exponent");
    return b > p - 1;
  }
  if (mm.profile.is_constant()) {
    double k2 = mm.profile.kappa2;
    if (k2 > 0) return true;         // exponential volume growth
    if (k2 == 0) return p < mm.m;    // flat: power m-1 vs p-1
    return false;                    // closed comparison geometry
  }
  const TailFit& tf = mm.tail;
  if (tf.exponential) {
    if (tf.b > 1e-6) return true;
    if (tf.b < -1e-6) return false;
    throw math_error("indeterminate tail: flat exponential fit");
  }
  if (std::fabs(tf.b - (p - 1)) <= 1e-6)
    throw math_error("indeterminate tail: borderline exponent");
  (void)lam;
  return tf.b > p - 1;
}

// ------------------------------------------------------------------ kernels

double ModelKernel::log_interval(double a, double b) const {
  const ModelManifold& g = mm;
  double lam = lambda;
  auto lv = [&](double s) { return -lam * g.log_v(s); };
  return log_integrate(lv, a, b, 1e-11);
}

static double log_tail_mass(const ModelManifold& mm, double lam, double T) {
  const TailFit& tf = mm.tail;
  if (tf.exponential) {
    if (!(tf.b > 0)) throw math_error("divergent kernel tail");
    return -lam * (tf.a + tf.b * T) - std::log(lam * tf.b);
  }
  double d = lam * tf.b - 1.0;
  if (!(d > 0)) throw math_error("divergent kernel tail");
  return -lam * tf.a + (1.0 - lam * tf.b) * std::log(T) - std::log(d);
}

ModelKernel green_kernel_model(const ModelManifold& mm, double p, double R) {
  if (!(p > 1.0) || p > mm.m + 1e-12)
    throw config_error("kernel needs p in (1, m]");
  ModelKernel k;
  k.mm = mm;
  k.p = p;
  k.R = R;
  k.lambda = 1.0 / (p - 1.0);
  k.t_split = 1e-3 * mm.t_max;
  double t_hi;
  if (R == POS_INF) {
    if (!nonparabolic(mm, p))
      throw math_error("parabolic model: kernel diverges");
    if (mm.R_inf < POS_INF)
      throw math_error("parabolic model: kernel diverges");
    t_hi = mm.t_max;
    k.log_tail_at_tmax = log_tail_mass(mm, k.lambda, mm.t_max);
  } else {
    if (!(R > 4.0 * k.t_split))
      throw config_error("kernel radius too close to the pole");
    if (R > mm.t_max * (1 + 1e-12))
      throw config_error("finite kernel radius beyond the model table");
    if (R >= mm.R_inf)
      throw math_error("kernel radius beyond the conjugate radius");
    t_hi = R;
  }
  // nodes: model samples within (t_split, t_hi), exact ends appended
  k.tk.push_back(k.t_split);
  for (double s : mm.t)
    if (s > k.t_split * (1 + 1e-12) && s < t_hi * (1 - 1e-12)) k.tk.push_back(s);
  k.tk.push_back(t_hi);
  std::size_t n = k.tk.size();
  k.logG.assign(n, NEG_INF);
  k.logG[n - 1] = (R == POS_INF) ? k.log_tail_at_tmax : NEG_INF;
  for (std::size_t i = n - 1; i-- > 0;)
    k.logG[i] = logaddexp(k.logG[i + 1], k.log_interval(k.tk[i], k.tk[i + 1]));
  // slope-matched pole continuation below t_split:
  //   G(t) ≈ G(ts) + c · (mu(t) - mu(ts)),  c = (h(ts)/ts)^{-(m-1)/(p-1)}
  k.log_c_split =
      -(mm.m - 1) * k.lambda * (mm.log_h_at(k.t_split) - std::log(k.t_split));
  return k;
}

// log of mu_p(t) - mu_p(ts) for t < ts (flat-kernel increment), stable
static double log_mu_increment(const ModelKernel& k, double t, double ts) {
  int m = k.mm.m;
  double p = k.p, lam = k.lambda;
  double om = k.mm.omega;
  if (std::fabs(p - m) < 1e-14)
    return -1.0 / (m - 1) * std::log(om) + std::log(std::log(ts / t));
  double beta = (m - p) / (p - 1);
  // A (t^-b - ts^-b) = A t^-b (1 - (t/ts)^b)
  double logA = -lam * std::log(om) + std::log((p - 1) / (m - p));
  return logA - beta * std::log(t) + std::log1p(-std::pow(t / ts, beta));
}

double ModelKernel::log_value(double s) const {
  if (!(s > 0)) throw math_error("kernel evaluated at nonpositive radius");
  double t_hi = tk.back();
  if (s >= t_hi) {
    if (R < POS_INF) {
      if (s > t_hi * (1 + 1e-12))
        throw math_error("kernel evaluated beyond its radius");
      return NEG_INF;
    }
    return log_tail_mass(mm, lambda, s);
  }
  if (s < t_split) {
    double inc = log_c_split + log_mu_increment(*this, s, t_split);
    return logaddexp(logG.front(), inc);
  }
  auto it = std::upper_bound(tk.begin(), tk.end(), s);
  std::size_t i = (it - tk.begin());
  if (i == 0) i = 1;
  --i;  // tk[i] <= s < tk[i+1]
  if (s == tk[i]) return logG[i];
  return logaddexp(logG[i + 1], log_interval(s, tk[i + 1]));
}

double ModelKernel::chi(double s) const {
  return std::exp(-lambda * mm.log_v(s) - log_value(s));
}

double log_kernel_derivative(const ModelKernel& k, double t) {
  return k.chi(t);
}

InvertResult invert_kernel_log(const ModelKernel& k, double log_g) {
  InvertResult res;
  double t_hi = k.tk.back();
  if (log_g == NEG_INF) {
    res.t = t_hi;
    return res;
  }
  // below the table range: analytic tail inversion
  if (k.R == POS_INF && log_g <= k.logG.back()) {
    const TailFit& tf = k.mm.tail;
    double lam = k.lambda;
    if (tf.exponential) {
      res.t = (-log_g - lam * tf.a - std::log(lam * tf.b)) / (lam * tf.b);
    } else {
      double e = 1.0 - lam * tf.b;
      res.t = std::exp((log_g + lam * tf.a + std::log(lam * tf.b - 1.0)) / e);
    }
    res.extrapolated = res.t > t_hi * (1 + 1e-12);
    if (!res.extrapolated) res.t = t_hi;
    return res;
  }
  // above the split value: closed-form pole-asymptote inversion
  if (log_g >= k.logG.front()) {
    double ts = k.t_split;
    int m = k.mm.m;
    double p = k.p;
    double D = logsubexp(log_g, k.logG.front());  // c * (mu(t)-mu(ts))
    double logInc = D - k.log_c_split;
    if (std::fabs(p - m) < 1e-14) {
      double lr = std::exp(logInc + std::log(std::pow(k.mm.omega, 1.0 / (m - 1))));
      res.t = ts * std::exp(-lr);
      return res;
    }
    double beta = (m - p) / (p - 1);
    double logA = -k.lambda * std::log(k.mm.omega) + std::log((p - 1) / (m - p));
    // t^-beta = ts^-beta + inc/A
    double lt = -(1.0 / beta) *
                logaddexp(-beta * std::log(ts), logInc - logA);
    res.t = std::exp(lt);
    return res;
  }
  // bracket on the monotone table, then safeguarded Newton
  std::size_t lo = 0, hi = k.logG.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    (k.logG[mid] >= log_g ? lo : hi) = mid;
  }
  double a = k.tk[lo], b = k.tk[hi];
  double x = 0.5 * (a + b);
  for (int it = 0; it < 100; ++it) {
    double F = k.log_value(x) - log_g;
    if (std::fabs(F) < 1e-12) break;
    (F > 0 ? a : b) = x;  // kernel decreasing: F>0 puts the root right of x
    double xn = x + F / k.chi(x);
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    x = xn;
    if (b - a < 1e-16 * k.mm.t_max) break;
  }
  res.t = x;
  return res;
}

double invert_kernel(const ModelKernel& k, double g) {
  if (!(g > 0)) throw math_error("invert_kernel needs g > 0");
  return invert_kernel_log(k, std::log(g)).t;
}

}  // namespace fakedist
