#pragma once

// Serialization of results: JSON reports, CSV tables and field dumps, written
// atomically (temporary file + rename).

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "vxq/asymptotics.hpp"
#include "vxq/config.hpp"
#include "vxq/distance_ridge.hpp"
#include "vxq/infinity_operator.hpp"
#include "vxq/rayleigh_solver.hpp"

namespace vxq {

using Json = nlohmann::ordered_json;

/// Shortest round-trip text for a double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string grid_csv(const TriGrid& g) {
  std::ostringstream s;
  s << "node_id,x,y,interior\n";
  for (std::size_t k = 0; k < g.node_count(); ++k)
    s << k << ',' << format_double(g.nodes()[k].x) << ',' << format_double(g.nodes()[k].y) << ','
      << (g.is_interior(k) ? 1 : 0) << '\n';
  return s.str();
}

inline std::string field_csv(const ScalarField& f) {
  std::ostringstream s;
  s << "node_id,value\n";
  for (std::size_t k = 0; k < f.size(); ++k) s << k << ',' << format_double(f.values[k]) << '\n';
  return s.str();
}

inline Json point_json(Vec2 p) { return Json{{"x", p.x}, {"y", p.y}}; }

/// Resolution and tolerances carried by every report.
inline Json meta_json(const ExperimentConfig& c, const TriGrid& g) {
  return Json{{"shape", shape_name(c.domain.shape)},
              {"n", c.domain.resolution},
              {"h", g.spacing()},
              {"nodes", g.node_count()},
              {"interior_nodes", g.interior_count()},
              {"tol", c.solver.tol},
              {"max_iter", c.solver.max_iter},
              {"el_tol", MinimizeOptions{}.el_tol},
              {"tie_tol", kDefaultTieTol},
              {"seed", c.solver.seed}};
}

inline Json minimize_json(const MinimizeResult& r, const ExperimentConfig& c, const TriGrid& g) {
  Json j;
  j["meta"] = meta_json(c, g);
  j["p_expr"] = c.p_expr;
  j["q_expr"] = c.q_expr;
  j["lambda"] = r.lambda;
  j["iterations"] = r.iterations;
  j["el_residual"] = r.el_residual;
  j["argmax"] = point_json(r.argmax_point);
  j["converged"] = r.converged;
  j["restart_lambdas"] = r.restart_lambdas;
  j["trace"] = r.trace;
  return j;
}

inline Json sweep_rows_json(const SweepReport& rep, bool j_sweep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json row{{"index", r.index},
             {"eigenvalue_estimate", r.eigenvalue},
             {"sup_norm_of_extremal", r.sup_norm},
             {"argmax", point_json(r.argmax)},
             {"gap_to_limit", r.gap},
             {"el_residual", r.el_residual},
             {"converged", r.converged},
             {"iterations", r.iterations}};
    if (j_sweep) {
      row["lower_bound"] = r.lower_bound;
      row["upper_bound"] = r.upper_bound;
    } else {
      row["dist_to_d"] = r.dist_to_d;
      row["bound_violation"] = r.bound_violation;
      row["d_bound"] = r.d_bound;
      row["singleton"] = r.singleton;
      row["min_value"] = r.min_value;
    }
    rows.push_back(row);
  }
  return rows;
}

inline Json sweep_j_json(const SweepReport& rep, const ExperimentConfig& c, const TriGrid& g) {
  Json j;
  j["meta"] = meta_json(c, g);
  j["p_expr"] = c.p_expr;
  j["q_expr"] = c.q_expr;
  j["l"] = rep.l;
  j["limit_kind"] = limit_kind_name(rep.limit_kind);
  j["limit_value"] = rep.limit_value;
  if (rep.mu) {
    j["direct_mu"] = Json{{"mu", rep.mu->mu},
                          {"x0", point_json(rep.mu->x0_point)},
                          {"dirac_residual", rep.mu->dirac_residual},
                          {"converged", rep.mu->converged}};
    if (!rep.rows.empty()) j["discrepancy"] = rep.rows.back().gap / rep.mu->mu;
  }
  j["rows"] = sweep_rows_json(rep, true);
  return j;
}

inline Json sweep_l_json(const LSweep& s, const ExperimentConfig& c, const TriGrid& g) {
  Json j;
  j["meta"] = meta_json(c, g);
  j["p_expr"] = c.p_expr;
  j["limit_kind"] = limit_kind_name(s.report.limit_kind);
  j["limit_value"] = s.report.limit_value;
  j["rows"] = sweep_rows_json(s.report, false);
  Json extra = Json::array();
  for (const auto& m : s.results)
    extra.push_back(Json{{"mu", m.mu}, {"K", m.K}, {"S", m.S}, {"identity_mu", m.identity_mu}, {"solves", m.solves}});
  j["extremals"] = extra;
  return j;
}

inline std::string sweep_csv(const SweepReport& rep, bool j_sweep) {
  std::ostringstream s;
  s << "index,eigenvalue_estimate,sup_norm_of_extremal,argmax_x,argmax_y,gap_to_limit,el_residual,converged";
  s << (j_sweep ? ",lower_bound,upper_bound\n" : ",dist_to_d,bound_violation,d_bound,singleton\n");
  for (const auto& r : rep.rows) {
    s << r.index << ',' << format_double(r.eigenvalue) << ',' << format_double(r.sup_norm) << ','
      << format_double(r.argmax.x) << ',' << format_double(r.argmax.y) << ',' << format_double(r.gap) << ','
      << format_double(r.el_residual) << ',' << (r.converged ? 1 : 0);
    if (j_sweep) s << ',' << format_double(r.lower_bound) << ',' << format_double(r.upper_bound) << '\n';
    else
      s << ',' << format_double(r.dist_to_d) << ',' << format_double(r.bound_violation) << ','
        << format_double(r.d_bound) << ',' << (r.singleton ? 1 : 0) << '\n';
  }
  return s.str();
}

inline Json distance_json(const DistanceResult& d, double eikonal, const ExperimentConfig& c, const TriGrid& g) {
  Json j;
  j["meta"] = meta_json(c, g);
  j["d_max"] = d.d_max;
  j["lambda_inf"] = d.lambda_inf;
  j["ridge_singleton"] = d.ridge_is_singleton;
  j["ridge_nodes"] = d.ridge_nodes.size();
  j["argmax"] = point_json(g.nodes()[d.argmax.front()]);
  j["eikonal_deviation"] = eikonal;
  j["angle_tol"] = c.angle_tol;
  j["dist_tol"] = c.dist_tol;
  return j;
}

inline Json limit_json(const LimitResidual& r) {
  return Json{{"median", r.median},
              {"max", r.max},
              {"samples", r.samples},
              {"degenerate", r.degenerate},
              {"t", r.t},
              {"smoothing_width", r.smoothing_width},
              {"exclusion_radius", r.exclusion_radius}};
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace vxq
