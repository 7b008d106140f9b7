#pragma once
// Disk artifacts: CSV tables, JSON reports, and a metric-annotated mesh
// format. Every floating-point value is printed with fixed 15-significant-
// digit formatting so reruns of a deterministic pipeline are byte-identical.

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "fakedist/geom.hpp"
#include "fakedist/imcf.hpp"
#include "fakedist/model.hpp"
#include "fakedist/psolve.hpp"
#include "fakedist/verify.hpp"

namespace fakedist {

nlohmann::ordered_json audit_to_json(const EstimateAudit& a);
nlohmann::ordered_json report_to_json(const SolveReport& rep);

// --------------------------------------------------------------- tables

// model.csv with columns t,h,v_h,V_h,G on N levels spanning the horizon,
// plus model.json metadata; requires a kernel-admissible exponent
void write_model_tables(const std::filesystem::path& dir,
                        const ModelManifold& mm, double p, int N = 400);

// one value per line, "vertex_id,value" with a header row
void write_field_csv(const std::filesystem::path& file,
                     const Eigen::VectorXd& field);
Eigen::VectorXd read_field_csv(const std::filesystem::path& file);

// report.json + u.csv + log_u.csv in `dir`
void write_solve_artifacts(const std::filesystem::path& dir,
                           const SolveReport& rep);

// stage_k.csv (vertex_id,rho,w per stage) + limit.csv + summary.json
// {mode, p_list, cauchy_trace, R_i, R_o, audits[] ...}
void write_flow_archive(const std::filesystem::path& dir,
                        const FlowResult& fr,
                        const std::vector<EstimateAudit>& audits);

// single JSON report of all audits with pass/failure counts; meta is
// spliced into the header of the document
void write_audit_report(const std::filesystem::path& file,
                        const std::vector<EstimateAudit>& audits,
                        const nlohmann::ordered_json& meta);

// flux.csv with columns t,A1,V1,perimeter,v_h,volume,V_h
void write_flux_csv(const std::filesystem::path& file,
                    const std::vector<FluxTableRow>& rows);

// --------------------------------------------------------------- meshes

// Text format: a "METRIC_OFF" header, "nv nf eps_pole T_out", nv rows of
// vertex chart coordinates "t theta", then nf rows "3 a b c g11 g12 g22"
// carrying the constant per-triangle metric.
void write_surface_mesh(const std::filesystem::path& file,
                        const SurfaceMesh& mesh);

// Rebuilds chart frames, boundary rings (split by the median coordinate
// radius, ordered by angle), and the distance field. The result carries no
// base model; audits that need one must attach it.
SurfaceMesh read_surface_mesh(const std::filesystem::path& file);

}  // namespace fakedist
