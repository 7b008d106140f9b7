#include "fakedist/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fakedist {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// JSON carries the same fixed-width decimal rendering as the CSV files:
// numbers go in as strings so serialization is locale- and library-stable
ordered_json jnum(double x) { return fmt_g15(x); }

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out)
    throw config_error("cannot open for writing: " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw config_error("cannot open for reading: " + file.string());
  return in;
}

void write_json_file(const fs::path& file, const ordered_json& doc) {
  auto out = open_out(file);
  out << doc.dump(2) << "\n";
}

}  // namespace

ordered_json audit_to_json(const EstimateAudit& a) {
  ordered_json j;
  j["name"] = a.name;
  j["lhs"] = jnum(a.lhs);
  j["rhs"] = jnum(a.rhs);
  j["tol"] = jnum(a.tol);
  j["pass"] = a.pass;
  j["hard"] = a.hard;
  j["identity"] = a.identity;
  j["location_of_max"] = a.location;
  return j;
}

ordered_json report_to_json(const SolveReport& rep) {
  ordered_json j;
  j["p"] = jnum(rep.p);
  j["energy"] = jnum(rep.energy);
  j["capacity"] = jnum(rep.capacity);
  j["collar_flux"] = jnum(rep.collar_flux);
  j["residual_weak"] = jnum(rep.residual_weak);
  j["eps_final"] = jnum(rep.eps_final);
  j["iterations"] = rep.iterations;
  ordered_json trace = ordered_json::array();
  for (double e : rep.energy_trace) trace.push_back(jnum(e));
  j["energy_trace"] = std::move(trace);
  return j;
}

// ----------------------------------------------------------------- tables

void write_model_tables(const fs::path& dir, const ModelManifold& mm,
                        double p, int N) {
  if (N < 2) throw config_error("model tables: need at least two rows");
  const auto K = green_kernel_model(mm, p);  // throws when parabolic
  fs::create_directories(dir);
  auto csv = open_out(dir / "model.csv");
  csv << "t,h,v_h,V_h,G\n";
  for (int j = 1; j <= N; ++j) {
    const double t = mm.t_max * j / N;
    csv << fmt_g15(t) << ',' << fmt_g15(mm.h_at(t)) << ','
        << fmt_g15(mm.v(t)) << ',' << fmt_g15(mm.V(t)) << ','
        << fmt_g15(K.value(t)) << "\n";
  }
  ordered_json meta;
  meta["schema"] = 1;
  meta["kind"] = "model-tables";
  meta["dimension"] = mm.m;
  meta["p"] = jnum(p);
  meta["t_max"] = jnum(mm.t_max);
  meta["sphere_area_unit"] = jnum(mm.omega);
  meta["nonparabolic"] = nonparabolic(mm, p);
  meta["rows"] = N;
  write_json_file(dir / "model.json", meta);
}

void write_field_csv(const fs::path& file, const Eigen::VectorXd& field) {
  auto out = open_out(file);
  out << "vertex_id,value\n";
  for (Eigen::Index i = 0; i < field.size(); ++i)
    out << i << ',' << fmt_g15(field[i]) << "\n";
}

Eigen::VectorXd read_field_csv(const fs::path& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line) || line.rfind("vertex_id", 0) != 0)
    throw config_error("field file lacks the vertex_id,value header: " +
                       file.string());
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw config_error("malformed field row in " + file.string());
    vals.push_back(std::stod(line.substr(comma + 1)));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), (Eigen::Index)vals.size());
}

void write_solve_artifacts(const fs::path& dir, const SolveReport& rep) {
  fs::create_directories(dir);
  write_json_file(dir / "report.json", report_to_json(rep));
  write_field_csv(dir / "u.csv", rep.u);
  write_field_csv(dir / "log_u.csv", rep.log_u);
}

void write_flow_archive(const fs::path& dir, const FlowResult& fr,
                        const std::vector<EstimateAudit>& audits) {
  fs::create_directories(dir);
  for (size_t k = 0; k < fr.p_list.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "stage_%02zu.csv", k);
    auto out = open_out(dir / name);
    out << "vertex_id,rho,w\n";
    for (Eigen::Index i = 0; i < fr.rho_p[k].size(); ++i)
      out << i << ',' << fmt_g15(fr.rho_p[k][i]) << ','
          << fmt_g15(fr.w_p[k][i]) << "\n";
  }
  {
    auto out = open_out(dir / "limit.csv");
    out << "vertex_id,rho1,w\n";
    for (Eigen::Index i = 0; i < fr.rho1.size(); ++i)
      out << i << ',' << fmt_g15(fr.rho1[i]) << ',' << fmt_g15(fr.w[i])
          << "\n";
  }
  ordered_json j;
  j["schema"] = 1;
  j["kind"] = "flow-archive";
  j["mode"] = fr.mode;
  ordered_json pl = ordered_json::array();
  for (double p : fr.p_list) pl.push_back(jnum(p));
  j["p_list"] = std::move(pl);
  ordered_json ct = ordered_json::array();
  for (double c : fr.cauchy_trace) ct.push_back(jnum(c));
  j["cauchy_trace"] = std::move(ct);
  j["converged"] = fr.converged;
  j["extrap_stage"] = fr.extrap_stage;
  if (fr.mode == "domain") {
    j["omega_radius"] = jnum(fr.omega_radius);
    j["R_i"] = jnum(fr.R_i);
    j["R_o"] = jnum(fr.R_o);
  }
  if (fr.total_iterations > 0) {
    j["total_iterations"] = fr.total_iterations;
    j["iterations_p"] = fr.iterations_p;
  }
  ordered_json ja = ordered_json::array();
  for (const auto& a : audits) ja.push_back(audit_to_json(a));
  j["audits"] = std::move(ja);
  write_json_file(dir / "summary.json", j);
}

void write_audit_report(const fs::path& file,
                        const std::vector<EstimateAudit>& audits,
                        const ordered_json& meta) {
  ordered_json j;
  j["schema"] = 1;
  j["kind"] = "audit-report";
  for (auto it = meta.begin(); it != meta.end(); ++it) j[it.key()] = *it;
  int hard_failures = 0, soft_failures = 0;
  ordered_json ja = ordered_json::array();
  for (const auto& a : audits) {
    ja.push_back(audit_to_json(a));
    if (!a.pass) (a.hard ? hard_failures : soft_failures)++;
  }
  j["hard_failures"] = hard_failures;
  j["soft_failures"] = soft_failures;
  j["audits"] = std::move(ja);
  write_json_file(file, j);
}

void write_flux_csv(const fs::path& file,
                    const std::vector<FluxTableRow>& rows) {
  auto out = open_out(file);
  out << "t,A1,V1,perimeter,v_h,volume,V_h\n";
  for (const auto& r : rows)
    out << fmt_g15(r.t) << ',' << fmt_g15(r.A1) << ',' << fmt_g15(r.V1)
        << ',' << fmt_g15(r.perimeter) << ',' << fmt_g15(r.v_h) << ','
        << fmt_g15(r.volume) << ',' << fmt_g15(r.V_h) << "\n";
}

// ----------------------------------------------------------------- meshes

void write_surface_mesh(const fs::path& file, const SurfaceMesh& mesh) {
  auto out = open_out(file);
  out << "METRIC_OFF\n";
  out << mesh.nv() << ' ' << mesh.nf() << ' ' << fmt_g15(mesh.eps_pole)
      << ' ' << fmt_g15(mesh.T_out) << "\n";
  for (int v = 0; v < mesh.nv(); ++v)
    out << fmt_g15(mesh.Vx(v, 0)) << ' ' << fmt_g15(mesh.Vx(v, 1)) << "\n";
  for (int f = 0; f < mesh.nf(); ++f)
    out << "3 " << mesh.F(f, 0) << ' ' << mesh.F(f, 1) << ' ' << mesh.F(f, 2)
        << ' ' << fmt_g15(mesh.Gm(f, 0)) << ' ' << fmt_g15(mesh.Gm(f, 1))
        << ' ' << fmt_g15(mesh.Gm(f, 2)) << "\n";
}

SurfaceMesh read_surface_mesh(const fs::path& file) {
  auto in = open_in(file);
  std::string magic;
  in >> magic;
  if (magic != "METRIC_OFF")
    throw config_error("not a metric mesh file: " + file.string());
  int nv = 0, nf = 0;
  SurfaceMesh mesh;
  in >> nv >> nf >> mesh.eps_pole >> mesh.T_out;
  if (!in || nv < 3 || nf < 1)
    throw config_error("malformed mesh header in " + file.string());
  mesh.Vx.resize(nv, 2);
  for (int v = 0; v < nv; ++v) in >> mesh.Vx(v, 0) >> mesh.Vx(v, 1);
  mesh.F.resize(nf, 3);
  mesh.Gm.resize(nf, 3);
  for (int f = 0; f < nf; ++f) {
    int three = 0;
    in >> three >> mesh.F(f, 0) >> mesh.F(f, 1) >> mesh.F(f, 2) >>
        mesh.Gm(f, 0) >> mesh.Gm(f, 1) >> mesh.Gm(f, 2);
    if (three != 3)
      throw config_error("non-triangle face in " + file.string());
    for (int k = 0; k < 3; ++k)
      if (mesh.F(f, k) < 0 || mesh.F(f, k) >= nv)
        throw config_error("face index out of range in " + file.string());
  }
  if (!in) throw config_error("truncated mesh file: " + file.string());
  mesh.finalize();

  // split the boundary into the two rings by the median chart radius and
  // order each by angle; the distance field restarts from the inner ring
  std::vector<int> ring;
  for (int v = 0; v < nv; ++v)
    if (mesh.on_boundary[v]) ring.push_back(v);
  if (ring.size() < 6)
    throw config_error("mesh boundary too small in " + file.string());
  const double t_mid = 0.5 * (mesh.eps_pole + mesh.T_out);
  for (int v : ring)
    (mesh.Vx(v, 0) < t_mid ? mesh.collar : mesh.outer).push_back(v);
  if (mesh.collar.empty() || mesh.outer.empty())
    throw config_error("mesh lacks one of its boundary rings: " +
                       file.string());
  auto by_angle = [&](int a, int b) { return mesh.Vx(a, 1) < mesh.Vx(b, 1); };
  std::sort(mesh.collar.begin(), mesh.collar.end(), by_angle);
  std::sort(mesh.outer.begin(), mesh.outer.end(), by_angle);
  mesh.origin = mesh.collar.front();
  mesh.r_field =
      (geodesic_distance(mesh, mesh.collar, {}).array() + mesh.eps_pole)
          .matrix();
  return mesh;
}

}  // namespace fakedist
