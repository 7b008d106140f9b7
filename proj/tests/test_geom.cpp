#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fakedist/common.hpp"
#include "fakedist/geom.hpp"
#include "fakedist/model.hpp"
#include "reference_constants.hpp"

using namespace fakedist;

namespace {

ModelManifold flat2() {
  return solve_warping(CurvatureProfile::constant(0.0), 2, 6.0);
}
ModelManifold hyp2() {
  return solve_warping(CurvatureProfile::constant(1.0), 2, 6.0);
}
ModelManifold sphere2() {
  return solve_warping(CurvatureProfile::constant(-1.0), 2, 3.0);
}

double total_area(const SurfaceMesh& mesh) {
  double a = 0;
  for (int f = 0; f < mesh.nf(); ++f) a += mesh.tri_area(f);
  return a;
}

const auto unit_warp = [](double, double) { return 1.0; };

}  // namespace

TEST_CASE("radial grid: uniform and graded node placement") {
  auto mm = solve_warping(CurvatureProfile::constant(0.0), 3, 10.0);
  auto g = build_radial_grid(mm, 0.05, 5.0, 100);
  CHECK(g.N() == 100);
  CHECK(g.t.front() == 0.05);
  CHECK(g.t.back() == 5.0);
  for (int i = 0; i < g.N(); ++i) CHECK(g.dt(i) > 0);
  CHECK(g.dt(50) == doctest::Approx(4.95 / 100).epsilon(1e-12));

  auto gg = build_radial_grid(mm, 0.05, 5.0, 100, 1.03);
  CHECK(gg.t.front() == 0.05);
  CHECK(gg.t.back() == doctest::Approx(5.0).epsilon(1e-12));
  // constant spacing growth, clustering at the inner collar
  for (int i = 0; i + 1 < gg.N() - 1; ++i)
    CHECK(gg.dt(i + 1) / gg.dt(i) == doctest::Approx(1.03).epsilon(1e-9));
  CHECK(gg.dt(0) < g.dt(0));

  CHECK_THROWS_AS(build_radial_grid(mm, 0.0, 5.0, 100), config_error);
  CHECK_THROWS_AS(build_radial_grid(mm, 0.05, 5.0, 16), config_error);
  CHECK_THROWS_AS(build_radial_grid(mm, 0.05, 0.01, 100), config_error);
  CHECK_THROWS_AS(build_radial_grid(mm, 0.05, 5.0, 100, 0.9), config_error);
}

TEST_CASE("warped surface: structure, boundary rings, areas") {
  auto mm = flat2();
  auto mesh = build_warped_surface(mm, unit_warp, 40, 96, 0.1, 2.0);
  CHECK(mesh.nv() == 41 * 96);
  CHECK(mesh.nf() == 2 * 40 * 96);
  CHECK((int)mesh.collar.size() == 96);
  CHECK((int)mesh.outer.size() == 96);
  CHECK(mesh.h_mesh > 0);
  for (int v : mesh.collar) CHECK(mesh.on_boundary[v]);
  for (int v : mesh.outer) CHECK(mesh.on_boundary[v]);
  int n_bd = 0;
  for (bool b : mesh.on_boundary) n_bd += b;
  CHECK(n_bd == 2 * 96);

  // flat annulus: area pi (T^2 - eps^2)
  const double exact = M_PI * (4.0 - 0.01);
  CHECK(total_area(mesh) == doctest::Approx(exact).epsilon(5e-3));

  auto mh = build_warped_surface(hyp2(), unit_warp, 48, 128, 0.1, 2.0);
  CHECK(total_area(mh) ==
        doctest::Approx(ref::AREA_HYP_ANNULUS_01_2).epsilon(5e-3));

  CHECK_THROWS_AS(build_warped_surface(mm, unit_warp, 40, 96, 0.0, 2.0),
                  config_error);
  CHECK_THROWS_AS(build_warped_surface(mm, unit_warp, 40, 4, 0.1, 2.0),
                  config_error);
  CHECK_THROWS_AS(build_warped_surface(
                      mm, [](double, double) { return -1.0; }, 40, 96, 0.1, 2.0),
                  config_error);
  auto mm3 = solve_warping(CurvatureProfile::constant(0.0), 3, 6.0);
  CHECK_THROWS_AS(build_warped_surface(mm3, unit_warp, 40, 96, 0.1, 2.0),
                  config_error);
}

TEST_CASE("warped surface: angular perturbation shifts the metric, not the area") {
  auto mm = flat2();
  auto f = [](double, double th) { return 1.0 + 0.1 * std::sin(3.0 * th); };
  auto mesh = build_warped_surface(mm, f, 40, 96, 0.1, 2.0);
  for (int k = 0; k < mesh.nf(); ++k) {
    CHECK(mesh.Gm(k, 0) == 1.0);
    CHECK(mesh.Gm(k, 1) == 0.0);
    // g22 = (h f)^2 within the perturbation amplitude of h^2
    const double tb = (mesh.P(k, 0) + mesh.P(k, 2) + mesh.P(k, 4)) / 3.0;
    const double ratio = std::sqrt(mesh.Gm(k, 2)) / mm.h_at(tb);
    CHECK(ratio > 0.89);
    CHECK(ratio < 1.11);
  }
  // the sin(3 theta) modulation integrates away
  CHECK(total_area(mesh) == doctest::Approx(M_PI * 3.99).epsilon(1e-2));
}

TEST_CASE("P1 gradients are exact for affine fields") {
  // unit-strip warp makes the chart metric the identity
  auto mm = flat2();
  auto flat_chart = [&](double t, double) { return 1.0 / mm.h_at(t); };
  auto mesh = build_warped_surface(mm, flat_chart, 24, 64, 0.5, 2.5);
  Eigen::VectorXd u(mesh.nv());
  for (int v = 0; v < mesh.nv(); ++v)
    u[v] = 2.0 + 3.0 * mesh.Vx(v, 0) - 0.7 * mesh.Vx(v, 1);
  const double exact_norm = std::sqrt(9.0 + 0.49);
  for (int f = 0; f < mesh.nf(); ++f) {
    // skip seam triangles: the theta coordinate of u jumps there
    const double span = std::max({mesh.P(f, 1), mesh.P(f, 3), mesh.P(f, 5)}) -
                        std::min({mesh.P(f, 1), mesh.P(f, 3), mesh.P(f, 5)});
    bool seam = false;
    for (int k = 0; k < 3; ++k)
      if (std::abs(mesh.P(f, 2 * k + 1) - mesh.Vx(mesh.F(f, k), 1)) > 1e-9)
        seam = true;
    if (seam || span > M_PI) continue;
    auto gc = cell_gradient(mesh, u, f);
    CHECK(gc[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(gc[1] == doctest::Approx(-0.7).epsilon(1e-10));
    CHECK(grad_norm(mesh, f, gc) ==
          doctest::Approx(exact_norm).epsilon(1e-10));
  }
  // a purely radial affine field needs no seam exclusion
  for (int v = 0; v < mesh.nv(); ++v) u[v] = 1.0 + 4.0 * mesh.Vx(v, 0);
  for (int f = 0; f < mesh.nf(); ++f)
    CHECK(cell_grad_norm(mesh, u, f) == doctest::Approx(4.0).epsilon(1e-10));

  auto g = build_radial_grid(mm, 0.5, 2.5, 64);
  Eigen::VectorXd ur(g.N() + 1);
  for (int i = 0; i <= g.N(); ++i) ur[i] = 7.0 - 2.0 * g.t[i];
  for (int i = 0; i < g.N(); ++i)
    CHECK(cell_derivative(g, ur, i) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("geodesic distance: radial wavefronts are reproduced exactly") {
  for (auto* maker : {&flat2, &hyp2}) {
    auto mesh = build_warped_surface((*maker)(), unit_warp, 48, 128, 0.1, 2.0);
    for (int v = 0; v < mesh.nv(); ++v)
      CHECK(mesh.r_field[v] ==
            doctest::Approx(mesh.Vx(v, 0)).epsilon(1e-12));
    // From the outer ring inward the polyhedral metric genuinely undercuts
    // T - t by O(dtheta^2) per row (arc-length angular edges make a slightly
    // different surface); the discrete distance must never exceed T - t.
    auto dout = geodesic_distance(mesh, mesh.outer, {});
    for (int v = 0; v < mesh.nv(); ++v) {
      const double exact = 2.0 - mesh.Vx(v, 0);
      CHECK(dout[v] <= exact + 1e-12);
      CHECK(dout[v] >= exact * (1.0 - 5e-3) - 1e-12);
    }
  }
}

TEST_CASE("geodesic distance: point source on a flat annulus matches the plane") {
  auto mesh = build_warped_surface(flat2(), unit_warp, 64, 256, 0.5, 3.0);
  // source at (t=1, theta=0): vertex row 16 (0.5 + 16*2.5/64 = 1.125)? pick exact node
  // t nodes: 0.5 + i * 2.5/64 ; i=0 gives 0.5... choose source on the collar? no:
  // use the vertex at t = 0.5 + 16*(2.5/64) = 1.125 and compare against plane geometry
  const int n_theta = 256;
  const int src_row = 16;
  const double ts = 0.5 + src_row * 2.5 / 64.0;
  const int src = src_row * n_theta + 0;
  auto d = geodesic_distance(mesh, {src}, {});
  CHECK(d[src] == 0.0);
  auto plane_dist = [&](double t, double th) {
    return std::sqrt(ts * ts + t * t - 2.0 * ts * t * std::cos(th));
  };
  // targets whose straight segment stays inside the annulus
  struct Probe { int row, col; };
  for (auto pr : {Probe{40, 42}, Probe{40, 214}, Probe{32, 0}, Probe{8, 20}}) {
    const int v = pr.row * n_theta + pr.col;
    const double t = mesh.Vx(v, 0), th = mesh.Vx(v, 1);
    const double exact = plane_dist(t, th);
    CHECK(d[v] == doctest::Approx(exact).epsilon(0.03));
    // discrete paths can undercut the smooth metric only by the O(h^2)
    // edge-length discretization, never more
    CHECK(d[v] >= exact * (1.0 - 2e-3));
  }
  // seam symmetry: columns j and n-j are mirror images; the diagonal split
  // is chiral, so the first-order scheme matches them only to O(h) absolute
  for (int row : {8, 24, 40, 56})
    for (int col : {5, 60, 100}) {
      const int a = row * n_theta + col, b = row * n_theta + (n_theta - col);
      CHECK(std::abs(d[a] - d[b]) <= 0.025);
    }

  CHECK_THROWS_AS(geodesic_distance(mesh, {}, {}), config_error);
  CHECK_THROWS_AS(geodesic_distance(mesh, {mesh.nv()}, {}), config_error);
  CHECK_THROWS_AS(geodesic_distance(mesh, {0, 1}, {0.0}), config_error);
}

TEST_CASE("geodesic distance honors nonzero source offsets") {
  auto mesh = build_warped_surface(flat2(), unit_warp, 32, 96, 0.5, 2.0);
  std::vector<double> vals(mesh.collar.size(), 0.25);
  auto d = geodesic_distance(mesh, mesh.collar, vals);
  for (int v = 0; v < mesh.nv(); ++v)
    CHECK(d[v] == doctest::Approx(mesh.Vx(v, 0) - 0.5 + 0.25).epsilon(1e-11));
}

TEST_CASE("angle-defect curvature recovers the model curvature") {
  struct Case {
    ModelManifold mm;
    double K;
  };
  for (auto& c : {Case{flat2(), 0.0}, Case{hyp2(), -1.0}, Case{sphere2(), 1.0}}) {
    auto mesh = build_warped_surface(c.mm, unit_warp, 48, 160, 0.2, 2.0);
    auto K = gauss_curvature(mesh);
    for (int v = 0; v < mesh.nv(); ++v) {
      if (mesh.on_boundary[v]) {
        CHECK(std::isnan(K[v]));
        continue;
      }
      // stay away from the collar where the defect stencil is one-sided-ish
      if (mesh.Vx(v, 0) < 0.4 || mesh.Vx(v, 0) > 1.8) continue;
      if (c.K == 0.0) {
        CHECK(std::abs(K[v]) <= 0.05);
      } else {
        CHECK(K[v] == doctest::Approx(c.K).epsilon(0.05));
      }
    }
  }
}

TEST_CASE("angle-defect curvature flags near-degenerate fans") {
  // hand-built closed fan around one interior vertex with a sliver wedge
  SurfaceMesh mesh;
  const int nr = 5;
  mesh.Vx.resize(nr + 1, 2);
  mesh.Vx.row(0) << 0.0, 0.0;
  const double angles[nr] = {0.0, 1e-4, 1.8, 3.1, 4.9};
  for (int i = 0; i < nr; ++i)
    mesh.Vx.row(i + 1) << 0.3 * std::cos(angles[i]), 0.3 * std::sin(angles[i]);
  mesh.F.resize(nr, 3);
  mesh.Gm.resize(nr, 3);
  for (int i = 0; i < nr; ++i) {
    mesh.F.row(i) << 0, i + 1, 1 + (i + 1) % nr;
    mesh.Gm.row(i) << 1.0, 0.0, 1.0;
  }
  mesh.finalize();
  std::vector<std::string> warnings;
  auto K = gauss_curvature(mesh, &warnings);
  CHECK(!warnings.empty());
  CHECK(std::isfinite(K[0]));  // flat fan: defect ~ 0
  CHECK(std::abs(K[0]) < 1e-6);
  for (int i = 1; i <= nr; ++i) CHECK(std::isnan(K[i]));
}

TEST_CASE("level sets on a mesh: circle length and enclosed chart area") {
  auto mesh = build_warped_surface(flat2(), unit_warp, 64, 192, 0.1, 2.0);
  auto ls = level_set_measure(mesh, mesh.r_field, 1.0);
  CHECK(ls.perimeter == doctest::Approx(2.0 * M_PI).epsilon(5e-3));
  // chart-only area: the pole cap is not part of the mesh
  CHECK(ls.volume == doctest::Approx(M_PI * (1.0 - 0.01)).epsilon(5e-3));
  CHECK(ls.crossings > 0);

  // level below/above the range
  auto lo = level_set_measure(mesh, mesh.r_field, 0.05);
  CHECK(lo.perimeter == 0.0);
  CHECK(lo.volume == 0.0);
  auto hi = level_set_measure(mesh, mesh.r_field, 5.0);
  CHECK(hi.perimeter == 0.0);
  CHECK(hi.volume == doctest::Approx(total_area(mesh)).epsilon(1e-12));

  // exact tie at a node ring must not double-count or crash
  auto tie = level_set_measure(mesh, mesh.r_field, mesh.Vx(32 * 192, 0));
  CHECK(tie.perimeter ==
        doctest::Approx(2.0 * M_PI * mesh.Vx(32 * 192, 0)).epsilon(1e-2));

  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(level_set_measure(mesh, bad, 1.0), config_error);
}

TEST_CASE("level sets on a radial grid include the pole cap") {
  auto mm = solve_warping(CurvatureProfile::constant(0.0), 3, 6.0);
  auto g = build_radial_grid(mm, 0.05, 5.0, 200);
  Eigen::VectorXd r(g.N() + 1);
  for (int i = 0; i <= g.N(); ++i) r[i] = g.t[i];
  auto ls = level_set_measure(g, r, 2.0);
  // sphere area 4 pi 2^2, ball volume (4 pi/3) 2^3 — cap included
  CHECK(ls.crossings == 1);
  CHECK(ls.perimeter == doctest::Approx(16.0 * M_PI).epsilon(1e-8));
  CHECK(ls.volume == doctest::Approx(32.0 * M_PI / 3.0).epsilon(1e-8));

  // two-component sublevel set of a non-monotone field
  auto g2 = build_radial_grid(mm, 1.0, 3.0, 200);
  Eigen::VectorXd w(g2.N() + 1);
  for (int i = 0; i <= g2.N(); ++i) w[i] = (g2.t[i] - 2.0) * (g2.t[i] - 2.0);
  auto ls2 = level_set_measure(g2, w, 0.25);
  CHECK(ls2.crossings == 2);
  CHECK(ls2.perimeter ==
        doctest::Approx(mm.v(1.5) + mm.v(2.5)).epsilon(1e-3));
  CHECK(ls2.volume == doctest::Approx(mm.V(2.5) - mm.V(1.5)).epsilon(1e-3));
}

TEST_CASE("contour integrals weight P1 traces by per-cell factors") {
  auto mm = solve_warping(CurvatureProfile::constant(0.0), 3, 6.0);
  auto g = build_radial_grid(mm, 0.05, 5.0, 256);
  Eigen::VectorXd r(g.N() + 1), u(g.N() + 1);
  for (int i = 0; i <= g.N(); ++i) {
    r[i] = g.t[i];
    u[i] = g.t[i] * g.t[i];
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(g.N(), 1.0);
  // field u interpolates t^2 piecewise-linearly: at the crossing it carries
  // the P1 value, not the exact square — keep a matching tolerance
  CHECK(surface_integral_on_level(g, u, w, r, 2.0) ==
        doctest::Approx(16.0 * M_PI * 4.0).epsilon(1e-4));
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.N() + 1);
  CHECK(surface_integral_on_level(g, ones, w, r, 2.0) ==
        doctest::Approx(16.0 * M_PI).epsilon(1e-10));

  auto mesh = build_warped_surface(flat2(), unit_warp, 64, 192, 0.1, 2.0);
  Eigen::VectorXd um = Eigen::VectorXd::Ones(mesh.nv());
  Eigen::VectorXd wm = Eigen::VectorXd::Constant(mesh.nf(), 1.0);
  CHECK(surface_integral_on_level(mesh, um, wm, mesh.r_field, 1.0) ==
        doctest::Approx(2.0 * M_PI).epsilon(5e-3));
  // doubling the cell weight doubles the integral
  CHECK(surface_integral_on_level(mesh, um, 2.0 * wm, mesh.r_field, 1.0) ==
        doctest::Approx(4.0 * M_PI).epsilon(5e-3));
}
