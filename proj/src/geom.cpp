#include "fakedist/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "fakedist/common.hpp"

namespace fakedist {

// ----------------------------------------------------------------- radial

RadialGrid build_radial_grid(const ModelManifold& mm, double eps_pole,
                             double T_out, int N, double grading) {
  if (!(eps_pole > 0))
    throw config_error("radial grid: the pole collar radius must be positive");
  if (!(T_out > eps_pole))
    throw config_error("radial grid: outer radius must exceed the collar");
  if (N < 32) throw config_error("radial grid: need at least 32 intervals");
  if (!(grading >= 1.0) || grading > 1.5)
    throw config_error("radial grid: grading factor must lie in [1, 1.5]");
  mm.check_range(T_out);

  RadialGrid g;
  g.mm = mm;
  g.eps_pole = eps_pole;
  g.T_out = T_out;
  g.grading = grading;
  g.t.resize(N + 1);
  g.t.front() = eps_pole;
  const double L = T_out - eps_pole;
  if (grading == 1.0) {
    for (int i = 1; i < N; ++i) g.t[i] = eps_pole + L * i / N;
  } else {
    // spacing grows outward by the constant factor `grading`
    const double d0 = L * (grading - 1.0) / (std::pow(grading, N) - 1.0);
    double acc = 0, step = d0;
    for (int i = 1; i < N; ++i, step *= grading) {
      acc += step;
      g.t[i] = eps_pole + acc;
    }
  }
  g.t.back() = T_out;
  return g;
}

double cell_derivative(const RadialGrid& g, const Eigen::VectorXd& u, int i) {
  return (u[i + 1] - u[i]) / g.dt(i);
}

// ------------------------------------------------------------------ meshes

Eigen::Matrix2d SurfaceMesh::metric(int f) const {
  Eigen::Matrix2d G;
  G << Gm(f, 0), Gm(f, 1), Gm(f, 1), Gm(f, 2);
  return G;
}

static double wrap_to_pi(double a) {
  return a - 2.0 * M_PI * std::round(a / (2.0 * M_PI));
}

void SurfaceMesh::finalize() {
  const int n = nv(), m = nf();
  P.resize(m, 6);
  for (int f = 0; f < m; ++f) {
    const double t0 = Vx(F(f, 0), 0), th0 = Vx(F(f, 0), 1);
    P(f, 0) = t0;
    P(f, 1) = th0;
    for (int k = 1; k < 3; ++k) {
      P(f, 2 * k) = Vx(F(f, k), 0);
      P(f, 2 * k + 1) = th0 + wrap_to_pi(Vx(F(f, k), 1) - th0);
    }
  }

  v2t.assign(n, {});
  for (int f = 0; f < m; ++f)
    for (int k = 0; k < 3; ++k) v2t[F(f, k)].push_back(f);

  // a boundary edge belongs to exactly one triangle
  std::unordered_map<long long, int> edge_count;
  edge_count.reserve(3 * m);
  auto key = [n](int a, int b) {
    if (a > b) std::swap(a, b);
    return (long long)a * n + b;
  };
  for (int f = 0; f < m; ++f)
    for (int k = 0; k < 3; ++k) ++edge_count[key(F(f, k), F(f, (k + 1) % 3))];
  on_boundary.assign(n, false);
  for (int f = 0; f < m; ++f)
    for (int k = 0; k < 3; ++k) {
      int a = F(f, k), b = F(f, (k + 1) % 3);
      if (edge_count[key(a, b)] == 1) on_boundary[a] = on_boundary[b] = true;
    }

  // hand-built meshes: fall back to per-triangle metric edge lengths (a
  // builder that knows the smooth metric sets consistent midpoint values)
  if (Elen.rows() != m) {
    Elen.resize(m, 3);
    for (int f = 0; f < m; ++f)
      for (int k = 0; k < 3; ++k) {
        const int a = (k + 1) % 3, b = (k + 2) % 3;
        const double dx = P(f, 2 * b) - P(f, 2 * a);
        const double dy = P(f, 2 * b + 1) - P(f, 2 * a + 1);
        const double q = Gm(f, 0) * dx * dx + 2.0 * Gm(f, 1) * dx * dy +
                         Gm(f, 2) * dy * dy;
        Elen(f, k) = std::sqrt(std::max(q, 0.0));
      }
  }

  double len_sum = 0;
  for (int f = 0; f < m; ++f)
    for (int k = 0; k < 3; ++k) len_sum += Elen(f, k);
  h_mesh = m > 0 ? len_sum / (3.0 * m) : 0.0;
}

double SurfaceMesh::tri_area(int f) const {
  const double e1x = P(f, 2) - P(f, 0), e1y = P(f, 3) - P(f, 1);
  const double e2x = P(f, 4) - P(f, 0), e2y = P(f, 5) - P(f, 1);
  const double chart = 0.5 * std::abs(e1x * e2y - e1y * e2x);
  const double det = Gm(f, 0) * Gm(f, 2) - Gm(f, 1) * Gm(f, 1);
  return chart * std::sqrt(std::max(det, 0.0));
}

double SurfaceMesh::metric_angle(int f, int corner) const {
  // law of cosines on the consistent polyhedral edge lengths
  const double a = Elen(f, corner);             // opposite edge
  const double b = Elen(f, (corner + 1) % 3);   // adjacent
  const double c = Elen(f, (corner + 2) % 3);   // adjacent
  const double cosv = (b * b + c * c - a * a) / std::max(2.0 * b * c, 1e-300);
  return std::acos(std::clamp(cosv, -1.0, 1.0));
}

SurfaceMesh build_warped_surface(const ModelManifold& mm,
                                 const std::function<double(double, double)>& f,
                                 int n_t, int n_theta, double eps_pole,
                                 double T_out) {
  if (mm.m != 2)
    throw config_error("warped surface: the base model must be 2-dimensional");
  if (!(eps_pole > 0))
    throw config_error("warped surface: the pole collar radius must be positive");
  if (!(T_out > eps_pole))
    throw config_error("warped surface: outer radius must exceed the collar");
  if (n_t < 2 || n_theta < 8)
    throw config_error("warped surface: resolution too low (need n_t>=2, n_theta>=8)");
  mm.check_range(T_out);

  SurfaceMesh mesh;
  mesh.mm = mm;
  mesh.has_model = true;
  mesh.eps_pole = eps_pole;
  mesh.T_out = T_out;
  const int rows = n_t + 1;
  mesh.Vx.resize(rows * n_theta, 2);
  const double dtheta = 2.0 * M_PI / n_theta;
  for (int i = 0; i < rows; ++i) {
    const double t = eps_pole + (T_out - eps_pole) * i / n_t;
    for (int j = 0; j < n_theta; ++j) {
      mesh.Vx(i * n_theta + j, 0) = t;
      mesh.Vx(i * n_theta + j, 1) = j * dtheta;
    }
  }

  mesh.F.resize(2 * n_t * n_theta, 3);
  mesh.Gm.resize(2 * n_t * n_theta, 3);
  mesh.Elen.resize(2 * n_t * n_theta, 3);
  int fi = 0;
  auto warp = [&](double t, double th) {
    const double w = mm.h_at(t) * f(t, std::fmod(th, 2.0 * M_PI));
    if (!(w > 0) || !std::isfinite(w))
      throw config_error("warped surface: warp factor must be positive and finite");
    return w;
  };
  auto metric_row = [&](double tb, double thb, int row) {
    const double w = warp(tb, thb);
    mesh.Gm(row, 0) = 1.0;
    mesh.Gm(row, 1) = 0.0;
    mesh.Gm(row, 2) = w * w;
  };
  for (int i = 0; i < n_t; ++i) {
    const double t0 = mesh.Vx(i * n_theta, 0), t1 = mesh.Vx((i + 1) * n_theta, 0);
    const double alpha = t1 - t0, tm = 0.5 * (t0 + t1);
    for (int j = 0; j < n_theta; ++j) {
      const int jn = (j + 1) % n_theta;
      const int v00 = i * n_theta + j, v10 = (i + 1) * n_theta + j;
      const int v01 = i * n_theta + jn, v11 = (i + 1) * n_theta + jn;
      const double th0 = j * dtheta, th1 = (j + 1) * dtheta;  // unwrapped
      const double thm = 0.5 * (th0 + th1);
      // midpoint-metric edge lengths, identical for both incident triangles
      const double len_bot = warp(t0, thm) * dtheta;
      const double len_top = warp(t1, thm) * dtheta;
      const double wd = warp(tm, thm) * dtheta;
      const double len_diag = std::sqrt(alpha * alpha + wd * wd);
      mesh.F.row(fi) << v00, v10, v11;
      metric_row((t0 + 2 * t1) / 3.0, (2 * th0 + th1) / 3.0, fi);
      mesh.Elen.row(fi) << len_top, len_diag, alpha;
      ++fi;
      mesh.F.row(fi) << v00, v11, v01;
      metric_row((2 * t0 + t1) / 3.0, (th0 + 2 * th1) / 3.0, fi);
      mesh.Elen.row(fi) << alpha, len_bot, len_diag;
      ++fi;
    }
  }

  mesh.collar.resize(n_theta);
  mesh.outer.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    mesh.collar[j] = j;
    mesh.outer[j] = n_t * n_theta + j;
  }
  mesh.origin = mesh.collar.front();
  mesh.finalize();
  mesh.r_field =
      (geodesic_distance(mesh, mesh.collar, {}).array() + eps_pole).matrix();
  return mesh;
}

// --------------------------------------------------------------- gradients

Eigen::Vector2d cell_gradient(const SurfaceMesh& mesh, const Eigen::VectorXd& u,
                              int f) {
  Eigen::Matrix2d A;
  A << mesh.P(f, 2) - mesh.P(f, 0), mesh.P(f, 3) - mesh.P(f, 1),
      mesh.P(f, 4) - mesh.P(f, 0), mesh.P(f, 5) - mesh.P(f, 1);
  Eigen::Vector2d du(u[mesh.F(f, 1)] - u[mesh.F(f, 0)],
                     u[mesh.F(f, 2)] - u[mesh.F(f, 0)]);
  return A.inverse() * du;
}

double grad_norm(const SurfaceMesh& mesh, int f, const Eigen::Vector2d& gc) {
  const double q = gc.transpose() * mesh.metric(f).inverse() * gc;
  return std::sqrt(std::max(q, 0.0));
}

double cell_grad_norm(const SurfaceMesh& mesh, const Eigen::VectorXd& u,
                      int f) {
  return grad_norm(mesh, f, cell_gradient(mesh, u, f));
}

// --------------------------------------------------------------- distances

namespace {

// Shortest d(C) given d(A), d(B) across a triangle with metric side lengths
// lab, lac, lbc: unfold to the plane and minimize over entry points on AB.
double unfold_update(double lab, double lac, double lbc, double dA,
                     double dB) {
  double best = std::min(dA + lac, dB + lbc);
  const double u = dB - dA, l = lab;
  if (std::abs(u) < l && l > 0) {
    const double x = (l * l + lac * lac - lbc * lbc) / (2.0 * l);
    const double y2 = lac * lac - x * x;
    if (y2 > 0) {
      const double y = std::sqrt(y2);
      const double w = u * y / std::sqrt(l * l - u * u);
      const double s = (x - w) / l;
      if (s > 0 && s < 1)
        best = std::min(best, dA + s * u + std::hypot(x - s * l, y));
    }
  }
  return best;
}

}  // namespace

Eigen::VectorXd geodesic_distance(const SurfaceMesh& mesh,
                                  const std::vector<int>& sources,
                                  const std::vector<double>& source_values) {
  if (sources.empty())
    throw config_error("geodesic distance: no source vertices given");
  if (!source_values.empty() && source_values.size() != sources.size())
    throw config_error("geodesic distance: source value count mismatch");

  const int n = mesh.nv();
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, POS_INF);
  using Node = std::pair<double, int>;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;
  for (size_t s = 0; s < sources.size(); ++s) {
    const int v = sources[s];
    if (v < 0 || v >= n)
      throw config_error("geodesic distance: source vertex out of range");
    const double val = source_values.empty() ? 0.0 : source_values[s];
    if (val < d[v]) {
      d[v] = val;
      heap.emplace(val, v);
    }
  }

  while (!heap.empty()) {
    auto [du, v] = heap.top();
    heap.pop();
    if (du > d[v]) continue;  // stale entry
    for (int f : mesh.v2t[v]) {
      int kv = 0;
      while (mesh.F(f, kv) != v) ++kv;
      const int kb = (kv + 1) % 3, kc = (kv + 2) % 3;
      const int vb = mesh.F(f, kb), vc = mesh.F(f, kc);
      const double l_vb = mesh.edge_length(f, kc);  // edge v-b opposite c
      const double l_vc = mesh.edge_length(f, kb);
      const double l_bc = mesh.edge_length(f, kv);
      // try improving both far corners through this triangle
      const double cand_c = std::isfinite(d[vb])
                                ? unfold_update(l_vb, l_vc, l_bc, d[v], d[vb])
                                : d[v] + l_vc;
      const double cand_b = std::isfinite(d[vc])
                                ? unfold_update(l_vc, l_vb, l_bc, d[v], d[vc])
                                : d[v] + l_vb;
      if (cand_c < d[vc] - 1e-14 * (1.0 + std::abs(cand_c))) {
        d[vc] = cand_c;
        heap.emplace(cand_c, vc);
      }
      if (cand_b < d[vb] - 1e-14 * (1.0 + std::abs(cand_b))) {
        d[vb] = cand_b;
        heap.emplace(cand_b, vb);
      }
    }
  }
  return d;
}

// --------------------------------------------------------------- curvature

Eigen::VectorXd gauss_curvature(const SurfaceMesh& mesh,
                                std::vector<std::string>* warnings) {
  const int n = mesh.nv();
  Eigen::VectorXd K =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (int v = 0; v < n; ++v) {
    if (mesh.on_boundary[v]) continue;
    double angle_sum = 0, area = 0;
    for (int f : mesh.v2t[v]) {
      int kv = 0;
      while (mesh.F(f, kv) != v) ++kv;
      const double a = mesh.metric_angle(f, kv);
      if (warnings && (a < 1e-3 || a > M_PI - 1e-3))
        warnings->push_back("near-degenerate angle in triangle " +
                            std::to_string(f) + " at vertex " +
                            std::to_string(v));
      angle_sum += a;
      area += mesh.tri_area(f) / 3.0;
    }
    K[v] = (2.0 * M_PI - angle_sum) / std::max(area, 1e-300);
  }
  return K;
}

// -------------------------------------------------------------- level sets

namespace {

inline double chart_area2(double ax, double ay, double bx, double by,
                          double cx, double cy) {
  return 0.5 * std::abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
}

}  // namespace

LevelSetMeasurement level_set_measure(const SurfaceMesh& mesh,
                                      const Eigen::VectorXd& field,
                                      double level) {
  if (field.size() != mesh.nv())
    throw config_error("level set: field size does not match the mesh");
  LevelSetMeasurement out;
  const double range = field.maxCoeff() - field.minCoeff();
  const double pert = range > 0 ? 1e-12 * range : 1e-300;

  auto signed_val = [&](int v) {
    const double s = field[v] - level;
    return s == 0.0 ? pert : s;  // break exact ties consistently upward
  };

  for (int f = 0; f < mesh.nf(); ++f) {
    double s[3], px[3], py[3];
    int below = 0;
    for (int k = 0; k < 3; ++k) {
      s[k] = signed_val(mesh.F(f, k));
      px[k] = mesh.P(f, 2 * k);
      py[k] = mesh.P(f, 2 * k + 1);
      if (s[k] < 0) ++below;
    }
    const double area = mesh.tri_area(f);
    if (below == 0) continue;
    if (below == 3) {
      out.volume += area;
      continue;
    }
    // isolate the odd corner: the single one below, or the single one above
    int lone = 0;
    const bool lone_below = (below == 1);
    for (int k = 0; k < 3; ++k)
      if ((s[k] < 0) == lone_below) lone = k;
    const int j = (lone + 1) % 3, k2 = (lone + 2) % 3;
    const double lj = s[lone] / (s[lone] - s[j]);
    const double lk = s[lone] / (s[lone] - s[k2]);
    const double qjx = px[lone] + lj * (px[j] - px[lone]);
    const double qjy = py[lone] + lj * (py[j] - py[lone]);
    const double qkx = px[lone] + lk * (px[k2] - px[lone]);
    const double qky = py[lone] + lk * (py[k2] - py[lone]);
    const double dx = qkx - qjx, dy = qky - qjy;
    const double q = mesh.Gm(f, 0) * dx * dx + 2.0 * mesh.Gm(f, 1) * dx * dy +
                     mesh.Gm(f, 2) * dy * dy;
    out.perimeter += std::sqrt(std::max(q, 0.0));
    ++out.crossings;
    const double det = mesh.Gm(f, 0) * mesh.Gm(f, 2) - mesh.Gm(f, 1) * mesh.Gm(f, 1);
    const double corner = chart_area2(px[lone], py[lone], qjx, qjy, qkx, qky) *
                          std::sqrt(std::max(det, 0.0));
    out.volume += lone_below ? corner : area - corner;
  }
  return out;
}

LevelSetMeasurement level_set_measure(const RadialGrid& g,
                                      const Eigen::VectorXd& field,
                                      double level) {
  const int N = g.N();
  if (field.size() != N + 1)
    throw config_error("level set: field size does not match the grid");
  LevelSetMeasurement out;
  const double range = field.maxCoeff() - field.minCoeff();
  const double pert = range > 0 ? 1e-12 * range : 1e-300;
  auto sv = [&](int i) {
    const double s = field[i] - level;
    return s == 0.0 ? pert : s;
  };

  bool below = sv(0) < 0;
  double prev = g.t.front();
  if (below) out.volume += g.mm.V(g.t.front());  // continue into the pole cap
  for (int i = 0; i < N; ++i) {
    const double s0 = sv(i), s1 = sv(i + 1);
    if ((s1 < 0) != below) {
      const double ts = g.t[i] + s0 / (s0 - s1) * g.dt(i);
      out.perimeter += g.mm.v(ts);
      ++out.crossings;
      if (below) out.volume += g.mm.V(ts) - g.mm.V(prev);
      prev = ts;
      below = !below;
    }
  }
  if (below) out.volume += g.mm.V(g.t.back()) - g.mm.V(prev);
  return out;
}

double surface_integral_on_level(const SurfaceMesh& mesh,
                                 const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& cell_weight,
                                 const Eigen::VectorXd& level_field,
                                 double level) {
  if (u.size() != mesh.nv() || level_field.size() != mesh.nv() ||
      cell_weight.size() != mesh.nf())
    throw config_error("level integral: field sizes do not match the mesh");
  const double range = level_field.maxCoeff() - level_field.minCoeff();
  const double pert = range > 0 ? 1e-12 * range : 1e-300;
  double total = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    double s[3], uv[3], px[3], py[3];
    int below = 0;
    for (int k = 0; k < 3; ++k) {
      const double raw = level_field[mesh.F(f, k)] - level;
      s[k] = raw == 0.0 ? pert : raw;
      uv[k] = u[mesh.F(f, k)];
      px[k] = mesh.P(f, 2 * k);
      py[k] = mesh.P(f, 2 * k + 1);
      if (s[k] < 0) ++below;
    }
    if (below == 0 || below == 3) continue;
    int lone = 0;
    const bool lone_below = (below == 1);
    for (int k = 0; k < 3; ++k)
      if ((s[k] < 0) == lone_below) lone = k;
    const int j = (lone + 1) % 3, k2 = (lone + 2) % 3;
    const double lj = s[lone] / (s[lone] - s[j]);
    const double lk = s[lone] / (s[lone] - s[k2]);
    const double dx = (px[lone] + lk * (px[k2] - px[lone])) -
                      (px[lone] + lj * (px[j] - px[lone]));
    const double dy = (py[lone] + lk * (py[k2] - py[lone])) -
                      (py[lone] + lj * (py[j] - py[lone]));
    const double q = mesh.Gm(f, 0) * dx * dx + 2.0 * mesh.Gm(f, 1) * dx * dy +
                     mesh.Gm(f, 2) * dy * dy;
    const double len = std::sqrt(std::max(q, 0.0));
    const double uj = uv[lone] + lj * (uv[j] - uv[lone]);
    const double uk = uv[lone] + lk * (uv[k2] - uv[lone]);
    total += len * cell_weight[f] * 0.5 * (uj + uk);
  }
  return total;
}

double surface_integral_on_level(const RadialGrid& g, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& cell_weight,
                                 const Eigen::VectorXd& level_field,
                                 double level) {
  const int N = g.N();
  if (u.size() != N + 1 || level_field.size() != N + 1 ||
      cell_weight.size() != N)
    throw config_error("level integral: field sizes do not match the grid");
  const double range = level_field.maxCoeff() - level_field.minCoeff();
  const double pert = range > 0 ? 1e-12 * range : 1e-300;
  double total = 0;
  for (int i = 0; i < N; ++i) {
    double s0 = level_field[i] - level, s1 = level_field[i + 1] - level;
    if (s0 == 0) s0 = pert;
    if (s1 == 0) s1 = pert;
    if ((s0 < 0) == (s1 < 0)) continue;
    const double lam = s0 / (s0 - s1);
    const double ts = g.t[i] + lam * g.dt(i);
    const double us = u[i] + lam * (u[i + 1] - u[i]);
    total += g.mm.v(ts) * cell_weight[i] * us;
  }
  return total;
}

}  // namespace fakedist
