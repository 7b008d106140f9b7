#pragma once
// Discretized domains: 1D radial grids bound to a model geometry, and
// triangle surface meshes in a (t, theta) chart with a per-triangle constant
// SPD metric. Geodesic distance, angle-defect curvature, marching-triangle
// level sets, and contour integrals.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "fakedist/model.hpp"

namespace fakedist {

// ----------------------------------------------------------------- radial

struct RadialGrid {
  ModelManifold mm;            // grids own their geometry
  std::vector<double> t;       // strictly increasing nodes, t.front()=eps_pole
  double eps_pole = 0, T_out = 0, grading = 1.0;
  int N() const { return (int)t.size() - 1; }
  double dt(int i) const { return t[i + 1] - t[i]; }
};

// Geometrically graded nodes clustered at the pole collar: spacing grows by
// the constant factor `grading` (1 = uniform).
RadialGrid build_radial_grid(const ModelManifold& mm, double eps_pole,
                             double T_out, int N, double grading = 1.0);

// ------------------------------------------------------------------ meshes

struct SurfaceMesh {
  ModelManifold mm;        // base model of the warp (set by the builder)
  bool has_model = false;  // hand-built meshes leave this unset
  Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor> Vx;  // (t, theta)
  Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> F;
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> Gm;  // g11,g12,g22
  // metric edge lengths, Elen(f,k) opposite corner k; the builder evaluates
  // the metric at each edge midpoint so both triangles sharing an edge agree
  // (a consistent polyhedral metric — required for angle-defect curvature)
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> Elen;
  // per-triangle vertex coordinates in a seam-unwrapped local chart
  Eigen::Matrix<double, Eigen::Dynamic, 6, Eigen::RowMajor> P;
  std::vector<int> collar, outer;  // ordered boundary rings
  Eigen::VectorXd r_field;         // geodesic distance from the collar + eps
  int origin = -1;
  double eps_pole = 0, T_out = 0;
  double h_mesh = 0;               // mean metric edge length

  std::vector<std::vector<int>> v2t;  // vertex -> incident triangles
  std::vector<bool> on_boundary;

  int nv() const { return (int)Vx.rows(); }
  int nf() const { return (int)F.rows(); }
  // build P (theta-unwrap), adjacency, boundary flags, h_mesh; fills Elen
  // from the per-triangle metric when the builder has not set it
  void finalize();
  double tri_area(int f) const;                    // metric area
  double edge_length(int f, int k) const { return Elen(f, k); }
  double metric_angle(int f, int corner) const;
  Eigen::Matrix2d metric(int f) const;
};

// Rotationally warped surface dt^2 + (h(t) f(t,theta))^2 dtheta^2 on the
// annulus chart [eps_pole, T_out] x S^1; mm must be 2-dimensional, f > 0,
// and f is always sampled with theta reduced to [0, 2*pi).
SurfaceMesh build_warped_surface(const ModelManifold& mm,
                                 const std::function<double(double, double)>& f,
                                 int n_t, int n_theta, double eps_pole,
                                 double T_out);

// Chart gradient of a P1 field on one triangle, and its metric norm.
Eigen::Vector2d cell_gradient(const SurfaceMesh& mesh,
                              const Eigen::VectorXd& u, int f);
double grad_norm(const SurfaceMesh& mesh, int f, const Eigen::Vector2d& gc);
double cell_grad_norm(const SurfaceMesh& mesh, const Eigen::VectorXd& u, int f);
// P1 cell derivative on a radial grid interval.
double cell_derivative(const RadialGrid& g, const Eigen::VectorXd& u, int i);

// Multi-source geodesic distance (label-correcting fast marching with
// re-insertion; first-order, exact for straight wavefronts through right
// triangles).
Eigen::VectorXd geodesic_distance(const SurfaceMesh& mesh,
                                  const std::vector<int>& sources,
                                  const std::vector<double>& source_values);

// Angle-defect Gauss curvature at interior vertices (NaN on the boundary);
// thin triangles are reported through `warnings` when given.
Eigen::VectorXd gauss_curvature(const SurfaceMesh& mesh,
                                std::vector<std::string>* warnings = nullptr);

struct LevelSetMeasurement {
  double perimeter = 0;  // metric length of {field = level}
  double volume = 0;     // metric area of {field < level}
  int crossings = 0;
};

// Marching triangles; exact ties are perturbed by 1e-12 * field range.
// Mesh volume counts the chart only (no pole cap).
LevelSetMeasurement level_set_measure(const SurfaceMesh& mesh,
                                      const Eigen::VectorXd& field,
                                      double level);
// Radial version: perimeter is the v_h-weighted crossing measure; volume is
// v_h-weighted and includes the model pole cap when the innermost node lies
// below the level.
LevelSetMeasurement level_set_measure(const RadialGrid& g,
                                      const Eigen::VectorXd& field,
                                      double level);

// ∫_{level_field = level} u * w ds with w constant per cell (e.g. a gradient
// power). u is P1-interpolated along the contour.
double surface_integral_on_level(const SurfaceMesh& mesh,
                                 const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& cell_weight,
                                 const Eigen::VectorXd& level_field,
                                 double level);
double surface_integral_on_level(const RadialGrid& g, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& cell_weight,
                                 const Eigen::VectorXd& level_field,
                                 double level);

}  // namespace fakedist
