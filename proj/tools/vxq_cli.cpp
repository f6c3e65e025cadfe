// vxq: command-line front end.
//
//   vxq <subcommand> [--config file.json] [--dotted.key value ...]
//
// Exit codes: 0 ok, 1 runtime failure, 2 invalid input, 3 a run did not converge.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vxq/asymptotics.hpp"
#include "vxq/config.hpp"
#include "vxq/distance_ridge.hpp"
#include "vxq/infinity_operator.hpp"
#include "vxq/modular_norms.hpp"
#include "vxq/rayleigh_solver.hpp"
#include "vxq/reports.hpp"

namespace fs = std::filesystem;
using namespace vxq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNotConverged = 3;

// short flag -> config path
const std::map<std::string, std::string> kAliases = {
    {"shape", "domain.shape"}, {"n", "domain.n"},         {"w", "domain.w"},
    {"h", "domain.h"},         {"r", "domain.r"},         {"a", "domain.a"},
    {"b", "domain.b"},         {"r_in", "domain.r_in"},   {"r_out", "domain.r_out"},
    {"notch_w", "domain.notch_w"}, {"notch_h", "domain.notch_h"},
    {"p", "p_expr"},           {"q", "q_expr"},           {"seed", "solver.seed"},
    {"max_iter", "solver.max_iter"}, {"tol", "solver.tol"}, {"restarts", "solver.restarts"},
    {"init", "solver.init"},   {"out", "output_dir"},
};

std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw InvalidArgument("unexpected argument '" + tok + "'");
    std::string key = tok.substr(2), value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw InvalidArgument("missing value for '--" + key + "'");
      value = extras[++i];
    }
    std::replace(key.begin(), key.end(), '-', '_');
    if (auto it = kAliases.find(key); it != kAliases.end()) key = it->second;
    out.emplace_back(key, value);
  }
  return out;
}

struct Context {
  ExperimentConfig cfg;
  fs::path out_dir;
  GridPtr grid;
};

Context prepare(const std::string& config_path, const std::vector<std::string>& extras) {
  nlohmann::json doc;
  const nlohmann::json* docp = nullptr;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw InvalidArgument("cannot read config file '" + config_path + "'");
    doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw InvalidArgument("config file '" + config_path + "' is not valid JSON");
    docp = &doc;
  }
  auto overrides = parse_overrides(extras);
  if (const char* env = std::getenv("VXQ_OUTPUT_DIR"); env && *env) {
    // Environment default sits below the file and the flags.
    bool explicit_dir = docp && docp->is_object() && docp->contains("output_dir");
    for (const auto& o : overrides) explicit_dir |= o.first == "output_dir";
    if (!explicit_dir) overrides.insert(overrides.begin(), {"output_dir", env});
  }
  Context ctx;
  ctx.cfg = load_config(docp, overrides);
  ctx.out_dir = ctx.cfg.output_dir;
  ctx.grid = build_grid(ctx.cfg.domain);
  return ctx;
}

MinimizeOptions minimize_options(const ExperimentConfig& c) {
  MinimizeOptions o;
  o.max_iter = c.solver.max_iter;
  o.tol = c.solver.tol;
  o.restarts = c.solver.restarts;
  o.seed = c.solver.seed;
  o.init = c.solver.init;
  return o;
}

int run_norm(const Context& ctx) {
  const auto& c = ctx.cfg;
  const TriGrid& g = *ctx.grid;
  const ExponentField p = sample_exponent(c.p_expr, g, c.scale);
  ScalarField u;
  if (c.u_expr == "distance") {
    u = distance_values(ctx.grid);
  } else {
    const ExprPtr e = parse_expression(c.u_expr);
    u = sample_field(ctx.grid, [&](Vec2 x) { return e->eval(x); }, true);
  }
  const double nw = luxemburg_norm(u, p, NormVariant::Weighted);
  const double nc = luxemburg_norm(u, p, NormVariant::Classical);
  const double chosen = c.norm_variant == NormVariant::Weighted ? nw : nc;
  Json j;
  j["meta"] = meta_json(c, g);
  j["p_expr"] = c.p_expr;
  j["u_expr"] = c.u_expr;
  j["scale"] = c.scale;
  j["norm_variant"] = c.norm_variant == NormVariant::Weighted ? "weighted" : "classical";
  j["norm"] = chosen;
  j["norm_weighted"] = nw;
  j["norm_classical"] = nc;
  j["sup_norm"] = sup_norm_and_argmax(u).value;
  j["gradient_norm"] = gradient_norm(u, p, c.norm_variant);
  j["p_minus"] = p.p_minus();
  j["p_plus"] = p.p_plus();
  j["alpha"] = p.alpha();
  if (chosen > 0.0) j["modular_at_norm"] = modular(u, p, chosen, c.norm_variant).value();
  write_atomic(ctx.out_dir / "norm.json", dump(j));
  std::cout << dump(j);
  return kExitOk;
}

int run_minimize(const Context& ctx) {
  const auto& c = ctx.cfg;
  const TriGrid& g = *ctx.grid;
  const ExponentField p = sample_exponent(c.p_expr, g);
  const ExponentField q = sample_exponent(c.q_expr, g);
  if (!subcritical_violations(p, q).empty())
    std::cerr << "warning: q is not below the critical exponent of p at some centroids\n";
  const MinimizeResult r = minimize_quotient(ctx.grid, p, q, minimize_options(c));
  const Json j = minimize_json(r, c, g);
  write_atomic(ctx.out_dir / "grid.csv", grid_csv(g));
  write_atomic(ctx.out_dir / "minimizer.csv", field_csv(r.minimizer));
  write_atomic(ctx.out_dir / "minimize.json", dump(j));
  std::cout << "lambda " << format_double(r.lambda) << "  iterations " << r.iterations << "  el_residual "
            << format_double(r.el_residual) << (r.converged ? "" : "  NOT CONVERGED") << "\n";
  return r.converged ? kExitOk : kExitNotConverged;
}

int run_sweep_j(const Context& ctx) {
  const auto& c = ctx.cfg;
  const TriGrid& g = *ctx.grid;
  const ExponentField p = sample_exponent(c.p_expr, g);
  const ExponentField q = sample_exponent(c.q_expr, g);
  const SweepReport rep = sweep_j(ctx.grid, c.l, p, q, c.j_list, minimize_options(c));
  write_atomic(ctx.out_dir / "sweep_j.csv", sweep_csv(rep, true));
  write_atomic(ctx.out_dir / "sweep_j.json", dump(sweep_j_json(rep, c, g)));
  bool ok = rep.mu && rep.mu->converged;
  for (const auto& row : rep.rows) {
    std::cout << "j " << row.index << "  Lambda " << format_double(row.eigenvalue) << "  gap "
              << format_double(row.gap) << (row.converged ? "" : "  NOT CONVERGED") << "\n";
    ok = ok && row.converged;
  }
  std::cout << "mu_l " << format_double(rep.limit_value) << "\n";
  return ok ? kExitOk : kExitNotConverged;
}

int run_sweep_l(const Context& ctx) {
  const auto& c = ctx.cfg;
  const TriGrid& g = *ctx.grid;
  const ExponentField p = sample_exponent(c.p_expr, g);
  const LSweep s = sweep_l(ctx.grid, p, c.l_list);
  write_atomic(ctx.out_dir / "sweep_l.csv", sweep_csv(s.report, false));
  write_atomic(ctx.out_dir / "sweep_l.json", dump(sweep_l_json(s, c, g)));
  if (s.report.extremal) write_atomic(ctx.out_dir / "w_l.csv", field_csv(*s.report.extremal));
  bool ok = true;
  for (const auto& row : s.report.rows) {
    std::cout << "l " << row.index << "  mu " << format_double(row.eigenvalue) << "  gap "
              << format_double(row.gap) << "  |w-d/|d||_inf " << format_double(row.dist_to_d)
              << (row.converged ? "" : "  NOT CONVERGED") << "\n";
    ok = ok && row.converged;
  }
  std::cout << "Lambda_inf " << format_double(s.report.limit_value) << "\n";
  return ok ? kExitOk : kExitNotConverged;
}

int run_distance(const Context& ctx) {
  const auto& c = ctx.cfg;
  const TriGrid& g = *ctx.grid;
  const DistanceResult d = distance_field(ctx.grid, c.angle_tol, c.dist_tol);
  const double eik = eikonal_check(d.d, d.ridge_nodes);
  const Json j = distance_json(d, eik, c, g);
  write_atomic(ctx.out_dir / "grid.csv", grid_csv(g));
  write_atomic(ctx.out_dir / "distance.csv", field_csv(d.d));
  write_atomic(ctx.out_dir / "distance.json", dump(j));
  std::cout << dump(j);
  return kExitOk;
}

int run_check_limit(const Context& ctx) {
  const auto& c = ctx.cfg;
  const TriGrid& g = *ctx.grid;
  const ExponentField p = sample_exponent(c.p_expr, g);
  const LSweep s = sweep_l(ctx.grid, p, c.l_list);
  const MuResult& last = s.results.back();
  const DistanceResult d = distance_field(ctx.grid);
  std::vector<double> base = d.d.values;
  for (double& v : base) v /= d.d_max;
  const LimitResidual rw = limit_residual(last.w, p, last.x0, c.exclusion_radius, c.smoothing_width);
  const LimitResidual rb =
      limit_residual(ScalarField{ctx.grid, base, true}, p, d.argmax.front(), c.exclusion_radius, c.smoothing_width);
  Json j;
  j["meta"] = meta_json(c, g);
  j["p_expr"] = c.p_expr;
  j["l"] = s.report.rows.back().index;
  j["extremal"] = limit_json(rw);
  j["baseline"] = limit_json(rb);
  j["ratio_median"] = rw.median / rb.median;
  write_atomic(ctx.out_dir / "limit.json", dump(j));
  std::cout << dump(j);
  return last.converged ? kExitOk : kExitNotConverged;
}

int run_report(const Context& ctx) {
  Json j;
  j["output_dir"] = ctx.out_dir.string();
  Json runs = Json::object();
  for (const char* name : {"norm", "minimize", "sweep_j", "sweep_l", "distance", "limit"}) {
    const fs::path f = ctx.out_dir / (std::string(name) + ".json");
    if (!fs::exists(f)) continue;
    std::ifstream in(f);
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error("cannot parse " + f.string());
    runs[name] = doc;
  }
  if (runs.empty()) throw InvalidArgument("no prior run outputs in '" + ctx.out_dir.string() + "'");
  j["runs"] = runs;
  write_atomic(ctx.out_dir / "report.json", dump(j));
  std::cout << "aggregated " << runs.size() << " run(s) into " << (ctx.out_dir / "report.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variable-exponent norms, Rayleigh quotients and their limits"};
  app.require_subcommand(1);
  std::string config_path;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Context&);
  };
  const Sub subs[] = {
      {"norm", "Luxemburg norms of a field", run_norm},
      {"minimize", "first eigenvalue of the Rayleigh quotient", run_minimize},
      {"sweep-j", "Lambda_{l,j} against mu_l", run_sweep_j},
      {"sweep-l", "mu_l against 1/||d||_inf", run_sweep_l},
      {"distance", "distance function, ridge and eikonal check", run_distance},
      {"check-limit", "limit-equation residual of w_l", run_check_limit},
      {"report", "aggregate prior outputs into report.json", run_report},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config,-c", config_path, "JSON configuration file");
    sub->allow_extras();
    apps.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  for (std::size_t i = 0; i < apps.size(); ++i) {
    if (!apps[i]->parsed()) continue;
    Context ctx;
    try {
      ctx = prepare(config_path, apps[i]->remaining());
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInvalid;
    }
    try {
      return subs[i].run(ctx);
    } catch (const InvalidArgument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInvalid;
    } catch (const NonAdmissibleExponent& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInvalid;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitFailure;
    }
  }
  return kExitFailure;
}
