// Command-line front end: config parsing, experiment orchestration, and
// deterministic report/CSV emission for the Monge-Ampere toolkit.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cma/calculus.hpp"
#include "cma/expr.hpp"
#include "cma/geometry.hpp"
#include "cma/grid.hpp"
#include "cma/pluripotential.hpp"
#include "cma/singular.hpp"
#include "cma/solver.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  check_keys(cfg, "config",
             {"seed", "output", "domain", "forms", "density", "boundary", "solver", "poles",
              "capacity", "levels", "degiorgi", "compare", "stats", "c0cert", "asymptotics"});
  return cfg;
}

cma::GridSpec parse_domain_spec(const json& cfg, double& a_out, double& collar_out) {
  if (!cfg.contains("domain")) throw ConfigError("config: missing 'domain'");
  const json& d = cfg["domain"];
  check_keys(d, "domain", {"n", "N", "L", "a", "collar"});
  cma::GridSpec spec(d.value("n", 1), d.value("N", 33), d.value("L", 1.5));
  a_out = d.value("a", 0.5);
  collar_out = d.value("collar", 0.2);
  return spec;
}

cma::DomainMask parse_domain(const json& cfg) {
  double a = 0, collar = 0;
  cma::GridSpec spec = parse_domain_spec(cfg, a, collar);
  return cma::build_domain(spec, cma::fubini_study_rho, a);
}

cma::SolveConfig parse_solver(const json& cfg) {
  cma::SolveConfig sc;
  if (!cfg.contains("solver")) return sc;
  const json& s = cfg["solver"];
  check_keys(s, "solver",
             {"tau_res", "max_newton", "backtrack", "min_step", "eps_psh", "lin_tol", "lin_maxit"});
  sc.tau_res = s.value("tau_res", sc.tau_res);
  sc.max_newton = s.value("max_newton", sc.max_newton);
  sc.backtrack = s.value("backtrack", sc.backtrack);
  sc.min_step = s.value("min_step", sc.min_step);
  sc.eps_psh = s.value("eps_psh", sc.eps_psh);
  sc.lin_tol = s.value("lin_tol", sc.lin_tol);
  sc.lin_maxit = s.value("lin_maxit", sc.lin_maxit);
  return sc;
}

cma::GridFunction sample_expr(const std::string& src, const cma::DomainMask& mask,
                              bool interior_only = false, double fill = 0.0) {
  cma::Expr e = cma::Expr::parse(src);
  cma::GridFunction g(mask.spec, fill);
  for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id) {
    if (!mask.active(id)) continue;
    if (interior_only && !mask.is_interior(id)) continue;
    g[id] = e.eval_real(mask.spec.point(id));
  }
  return g;
}

std::vector<double> parse_schedule(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(where + ": expected a nonempty array");
  std::vector<double> out;
  for (const auto& v : arr) out.push_back(v.get<double>());
  return out;
}

fs::path out_dir(const json& cfg) {
  fs::path dir = cfg.value("output", std::string("out"));
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  f << j.dump(2) << "\n";
}

void write_csv(const fs::path& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(p);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << fmt17(row[i]);
    f << "\n";
  }
}

struct ProblemSetup {
  cma::DomainMask mask;
  cma::ReferenceForms forms;
  cma::Rhs rhs;
  std::vector<double> t_schedule{0.0, 0.25, 0.5, 0.75, 1.0};
  double collar = 0.2;
};

// Assembles the normalized problem: boundary data folded into psi1, zero
// Dirichlet data on the reduced potential.
ProblemSetup build_problem(const json& cfg) {
  ProblemSetup ps;
  ps.mask = parse_domain(cfg);
  double a_unused = 0;
  parse_domain_spec(cfg, a_unused, ps.collar);

  double A = 2.0, s = 0.0;
  if (cfg.contains("forms")) {
    const json& f = cfg["forms"];
    check_keys(f, "forms", {"A", "s", "s_schedule", "t_schedule"});
    A = f.value("A", A);
    s = f.value("s", s);
    if (f.contains("t_schedule")) ps.t_schedule = parse_schedule(f["t_schedule"], "t_schedule");
  }

  cma::GridFunction psi1(ps.mask.spec);
  if (cfg.contains("boundary")) {
    const json& b = cfg["boundary"];
    check_keys(b, "boundary", {"psi"});
    if (b.contains("psi")) {
      cma::Expr pe = cma::Expr::parse(b["psi"].get<std::string>());
      auto psi_ambient = [&](const std::array<cma::cplx, 2>& z, int) { return pe.eval_real(z); };
      cma::BoundaryData bd = cma::sample_boundary(ps.mask, psi_ambient);
      psi1 = cma::extend_boundary_data(bd, ps.mask, cma::fubini_study_rho, psi_ambient, ps.collar);
    }
  }
  ps.forms = cma::build_reference_forms(ps.mask, A, psi1, s);

  if (!cfg.contains("density")) throw ConfigError("config: missing 'density'");
  const json& d = cfg["density"];
  check_keys(d, "density", {"g", "f", "lambda", "omega_Y", "w_E", "w_F", "p", "Q", "volume"});
  if (!d.contains("g")) throw ConfigError("density: missing 'g'");
  cma::GridFunction g = sample_expr(d["g"].get<std::string>(), ps.mask, true);
  double lambda = d.value("lambda", 0.0);
  cma::GridFunction f_log(ps.mask.spec);
  if (d.contains("f")) f_log = sample_expr(d["f"].get<std::string>(), ps.mask, true);
  for (std::uint32_t id : ps.mask.interior) {
    g[id] *= std::exp(f_log[id]);
    if (g[id] <= 0.0) throw ConfigError("density: nonpositive value on interior");
  }
  ps.rhs = lambda == 0.0 ? cma::Rhs::fixed(g) : cma::Rhs::exponential(g, lambda);
  return ps;
}

void emit_history_csv(const fs::path& p, const std::vector<cma::PathRecord>& hist) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : hist)
    rows.push_back({r.s, r.t, r.sup_phi, r.inf_phi, r.residual, double(r.iterations)});
  write_csv(p, {"s", "t", "sup_phi", "inf_phi", "residual", "iters"}, rows);
}

int cmd_solve(const json& cfg, bool with_history) {
  ProblemSetup ps = build_problem(cfg);
  cma::SolveConfig sc = parse_solver(cfg);
  cma::ContinuationState st = cma::continuity_path(ps.forms, ps.rhs, ps.mask, ps.t_schedule, sc);
  fs::path dir = out_dir(cfg);
  json rep{{"ok", st.ok},
           {"message", st.message},
           {"t", st.t},
           {"steps", st.history.size()},
           {"seed", cfg.value("seed", 1234)}};
  if (st.ok) cma::save_field((dir / "phi.field").string(), st.phi, &ps.mask);
  if (with_history) emit_history_csv(dir / "history.csv", st.history);
  write_json(dir / "solve.json", rep);
  if (!st.ok) {
    std::cerr << json{{"error", st.message}}.dump() << "\n";
    return 2;
  }
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_sfamily(const json& cfg) {
  ProblemSetup ps = build_problem(cfg);
  cma::SolveConfig sc = parse_solver(cfg);
  if (!cfg.contains("forms") || !cfg["forms"].contains("s_schedule"))
    throw ConfigError("sfamily: missing forms.s_schedule");
  std::vector<double> ss = parse_schedule(cfg["forms"]["s_schedule"], "s_schedule");

  const json& d = cfg["density"];
  cma::DensitySpec dens;
  dens.omega_Y = d.contains("omega_Y")
                     ? sample_expr(d["omega_Y"].get<std::string>(), ps.mask, true)
                     : cma::GridFunction(ps.mask.spec, 1.0);
  dens.w_E = d.contains("w_E") ? sample_expr(d["w_E"].get<std::string>(), ps.mask, true)
                               : cma::GridFunction(ps.mask.spec, 1.0);
  dens.w_F = d.contains("w_F") ? sample_expr(d["w_F"].get<std::string>(), ps.mask, true)
                               : cma::GridFunction(ps.mask.spec, 1.0);
  dens.f = d.contains("f") ? sample_expr(d["f"].get<std::string>(), ps.mask, true)
                           : cma::GridFunction(ps.mask.spec);
  dens.lambda = d.value("lambda", 0.0);
  dens.p = d.value("p", 2.0);
  dens.Q = d.value("Q", 0.0);
  dens.volume = cma::GridFunction(ps.mask.spec, 1.0);

  cma::ContinuationState st = cma::s_family_limit(ps.mask, ps.forms.psi1, ps.forms.A, dens, ss,
                                                  ps.t_schedule, sc);
  fs::path dir = out_dir(cfg);
  emit_history_csv(dir / "history.csv", st.history);
  json rep{{"ok", st.ok},
           {"message", st.message},
           {"sup_phi_per_s", st.sup_phi_per_s},
           {"cauchy_sup_diffs", st.cauchy_sup_diffs},
           {"uniformity_flag", st.uniformity_flag},
           {"seed", cfg.value("seed", 1234)}};
  write_json(dir / "sfamily.json", rep);
  if (st.ok) cma::save_field((dir / "phi.field").string(), st.phi, &ps.mask);
  std::cout << rep.dump(2) << "\n";
  return st.ok ? 0 : 2;
}

cma::HermitianField parse_theta(const json& cfg, const cma::DomainMask& mask) {
  std::string kind = "fs";
  if (cfg.contains("capacity")) kind = cfg["capacity"].value("theta", kind);
  if (kind == "zero") return cma::HermitianField(mask.spec);
  if (kind != "fs") throw ConfigError("capacity.theta: expected 'fs' or 'zero'");
  cma::GridFunction rho(mask.spec);
  for (std::uint32_t id = 0; id < mask.spec.node_count(); ++id)
    if (mask.active(id)) rho[id] = cma::fubini_study_rho(mask.spec.point(id), mask.spec.n);
  return cma::complex_hessian(rho, mask);
}

std::vector<std::uint32_t> parse_K(const json& cfg, const cma::DomainMask& mask) {
  if (!cfg.contains("capacity") || !cfg["capacity"].contains("K"))
    throw ConfigError("config: missing capacity.K");
  cma::Expr e = cma::Expr::parse(cfg["capacity"]["K"].get<std::string>());
  std::vector<std::uint32_t> K;
  for (std::uint32_t id : mask.interior)
    if (e.eval_real(mask.spec.point(id)) <= 0.0) K.push_back(id);
  return K;
}

int cmd_capacity(const json& cfg, bool extremal) {
  cma::DomainMask mask = parse_domain(cfg);
  const json& c = cfg["capacity"];
  check_keys(c, "capacity", {"K", "theta", "method"});
  cma::HermitianField theta = parse_theta(cfg, mask);
  std::vector<std::uint32_t> K = parse_K(cfg, mask);
  fs::path dir = out_dir(cfg);
  std::uint64_t seed = cfg.value("seed", 1234);

  if (extremal) {
    cma::ExtremalResult res = cma::extremal_function(K, theta, mask);
    cma::save_field((dir / "ustar.field").string(), res.ustar, &mask);
    json rep{{"capacity", res.capacity},
             {"support_defect", res.support_defect},
             {"sweeps", res.sweeps},
             {"K_size", K.size()},
             {"seed", seed}};
    write_json(dir / "extremal.json", rep);
    std::cout << rep.dump(2) << "\n";
    return 0;
  }
  std::string method = c.value("method", std::string("envelope"));
  cma::CapacityMethod m = method == "bruteforce" ? cma::CapacityMethod::bruteforce
                                                 : cma::CapacityMethod::envelope;
  if (method != "envelope" && method != "bruteforce")
    throw ConfigError("capacity.method: expected 'envelope' or 'bruteforce'");
  double cap = cma::capacity(K, theta, mask, m, seed);
  json rep{{"capacity", cap}, {"method", method}, {"K_size", K.size()}, {"seed", seed}};
  write_json(dir / "capacity.json", rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_compare(const json& cfg) {
  cma::DomainMask mask = parse_domain(cfg);
  if (!cfg.contains("compare")) throw ConfigError("config: missing 'compare'");
  const json& c = cfg["compare"];
  check_keys(c, "compare", {"u", "v"});
  cma::GridFunction u = cma::load_field(c.at("u").get<std::string>());
  cma::GridFunction v = cma::load_field(c.at("v").get<std::string>());
  if (!(u.spec == mask.spec) || !(v.spec == mask.spec))
    throw ConfigError("compare: field grid does not match the domain");
  cma::HermitianField theta = parse_theta(cfg, mask);
  cma::ComparisonReport rep = cma::check_comparison(u, v, theta, mask);
  json j{{"preconditions_ok", rep.preconditions_ok}, {"note", rep.note},
         {"lhs", rep.lhs},         {"rhs", rep.rhs},
         {"slack", rep.slack},     {"tol", rep.tol},
         {"set_size", rep.set_size}, {"pass", rep.pass}};
  write_json(out_dir(cfg) / "compare.json", j);
  std::cout << j.dump(2) << "\n";
  return rep.pass ? 0 : 1;
}

cma::SublevelStats stats_from_config(const json& cfg, cma::DomainMask& mask,
                                     cma::GridFunction& phi) {
  mask = parse_domain(cfg);
  if (!cfg.contains("stats") || !cfg["stats"].contains("phi"))
    throw ConfigError("config: missing stats.phi field path");
  check_keys(cfg["stats"], "stats", {"phi"});
  phi = cma::load_field(cfg["stats"]["phi"].get<std::string>());
  if (!(phi.spec == mask.spec)) throw ConfigError("stats: field grid does not match the domain");
  if (!cfg.contains("levels")) throw ConfigError("config: missing 'levels'");
  std::vector<double> levels = parse_schedule(cfg["levels"], "levels");

  double A = 2.0, s = 0.0;
  if (cfg.contains("forms")) {
    A = cfg["forms"].value("A", A);
    s = cfg["forms"].value("s", s);
  }
  cma::ReferenceForms forms =
      cma::build_reference_forms(mask, A, cma::GridFunction(mask.spec), s);
  return cma::sublevel_stats(phi, forms.theta_s_field(), levels, mask);
}

void emit_stats_csv(const fs::path& p, const cma::SublevelStats& st) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < st.levels.size(); ++i)
    rows.push_back({st.levels[i], st.a[i], st.b[i], st.F[i], double(st.sets[i].size()),
                    st.skipped[i] ? 1.0 : 0.0});
  write_csv(p, {"l", "a", "b", "F", "set_size", "skipped"}, rows);
}

int cmd_stats(const json& cfg) {
  cma::DomainMask mask;
  cma::GridFunction phi;
  cma::SublevelStats st = stats_from_config(cfg, mask, phi);
  emit_stats_csv(out_dir(cfg) / "stats.csv", st);
  std::cout << json{{"levels", st.levels.size()}}.dump(2) << "\n";
  return 0;
}

json degiorgi_json(const cma::DeGiorgiCertificate& c) {
  return json{{"hypothesis_verified", c.hypothesis_verified},
              {"witness_l", c.witness_l},
              {"witness_r", c.witness_r},
              {"has_l0", c.has_l0},
              {"l0", c.l0},
              {"S", c.S},
              {"vanishes_beyond_S", c.vanishes_beyond_S}};
}

int cmd_degiorgi(const json& cfg) {
  if (!cfg.contains("degiorgi")) throw ConfigError("config: missing 'degiorgi'");
  const json& d = cfg["degiorgi"];
  check_keys(d, "degiorgi", {"samples", "A", "alpha"});
  std::vector<std::pair<double, double>> samples;
  for (const auto& row : d.at("samples"))
    samples.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  cma::DeGiorgiCertificate cert =
      cma::degiorgi_bound(samples, d.value("A", 1.0), d.value("alpha", 1.0));
  json rep = degiorgi_json(cert);
  write_json(out_dir(cfg) / "degiorgi.json", rep);
  std::cout << rep.dump(2) << "\n";
  return cert.hypothesis_verified ? 0 : 1;
}

int cmd_c0cert(const json& cfg) {
  cma::DomainMask mask;
  cma::GridFunction phi;
  cma::SublevelStats st = stats_from_config(cfg, mask, phi);
  double t = 0.5;
  if (cfg.contains("c0cert")) {
    check_keys(cfg["c0cert"], "c0cert", {"t"});
    t = cfg["c0cert"].value("t", t);
  }
  cma::KolodziejReport kol = cma::check_kolodziej_inequalities(st, t, 0.0);
  double A_fit = kol.C_fit > 0.0 ? std::pow(kol.C_fit, 1.0 / mask.spec.n) : 1.0;
  cma::C0Certificate cert = cma::c0_certificate(st, A_fit, phi, mask);
  json rep{{"kolodziej_all_ok", kol.all_ok},
           {"C_fit", kol.C_fit},
           {"decay_exponent", kol.decay_exponent},
           {"A_fit", A_fit},
           {"S", cert.S},
           {"inf_phi", cert.inf_phi},
           {"certified", cert.certified},
           {"bound_holds", cert.bound_holds},
           {"degiorgi", degiorgi_json(cert.dg)}};
  fs::path dir = out_dir(cfg);
  emit_stats_csv(dir / "stats.csv", st);
  write_json(dir / "c0cert.json", rep);
  std::cout << rep.dump(2) << "\n";
  return (kol.all_ok && cert.certified && cert.bound_holds) ? 0 : 1;
}

cma::PoleSpec parse_poles(const json& cfg, const cma::DomainMask& mask) {
  if (!cfg.contains("poles")) throw ConfigError("config: missing 'poles'");
  const json& p = cfg["poles"];
  check_keys(p, "poles",
             {"locations", "weights", "deltas", "lambda", "f", "psi", "volume", "min_inner_r",
              "osc_bound", "growth_const"});
  cma::PoleSpec ps;
  const auto& locs = p.at("locations");
  const auto& ws = p.at("weights");
  if (locs.size() != ws.size()) throw ConfigError("poles: locations/weights length mismatch");
  for (std::size_t i = 0; i < locs.size(); ++i) {
    cma::Pole pole;
    const auto& row = locs[i];
    if (row.size() != std::size_t(2 * mask.spec.n))
      throw ConfigError("poles: each location needs 2n real entries");
    pole.p[0] = cma::cplx(row[0].get<double>(), row[1].get<double>());
    if (mask.spec.n == 2) pole.p[1] = cma::cplx(row[2].get<double>(), row[3].get<double>());
    pole.s = ws[i].get<double>();
    ps.poles.push_back(pole);
  }
  if (p.contains("deltas")) ps.deltas = parse_schedule(p["deltas"], "poles.deltas");
  ps.lambda = p.value("lambda", 0.0);
  ps.f = p.contains("f") ? sample_expr(p["f"].get<std::string>(), mask, true)
                         : cma::GridFunction(mask.spec);
  ps.volume = p.contains("volume") ? sample_expr(p["volume"].get<std::string>(), mask, true)
                                   : cma::GridFunction(mask.spec, 1.0);
  cma::Expr pe = cma::Expr::parse(p.value("psi", std::string("0")));
  ps.psi = cma::sample_boundary(mask, [&](const std::array<cma::cplx, 2>& z, int) {
    return pe.eval_real(z);
  });
  return ps;
}

void emit_annulus_csv(const fs::path& p, const cma::AsymptoticsReport& rep) {
  std::vector<std::vector<double>> rows;
  for (std::size_t di = 0; di < rep.deltas.size(); ++di)
    for (std::size_t k = 0; k < rep.annuli.size(); ++k)
      rows.push_back({rep.deltas[di], double(k), rep.annuli[k].inner, rep.annuli[k].outer,
                      rep.sup_dev.empty() ? 0.0 : rep.sup_dev[di][k]});
  write_csv(p, {"delta", "annulus_index", "inner_r", "outer_r", "sup_dev"}, rows);
}

int cmd_poles(const json& cfg) {
  cma::DomainMask mask = parse_domain(cfg);
  cma::PoleSpec ps = parse_poles(cfg, mask);
  cma::SolveConfig sc = parse_solver(cfg);
  std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
  if (cfg.contains("forms") && cfg["forms"].contains("t_schedule"))
    ts = parse_schedule(cfg["forms"]["t_schedule"], "t_schedule");
  double min_inner_r = cfg["poles"].value("min_inner_r", 3.0 * mask.spec.h());

  cma::LogPoleResult res = cma::solve_log_pole(ps, mask, ts, sc, min_inner_r);
  fs::path dir = out_dir(cfg);
  if (!res.ok) {
    std::cerr << json{{"error", res.message}}.dump() << "\n";
    return 2;
  }
  for (std::size_t i = 0; i < res.phi.size(); ++i) {
    cma::save_field((dir / ("phi_" + std::to_string(i) + ".field")).string(), res.phi[i], &mask);
    cma::save_field((dir / ("remainder_" + std::to_string(i) + ".field")).string(),
                    res.remainder[i], &mask);
  }
  emit_annulus_csv(dir / "annuli.csv", res.report);
  json rep{{"ok", true}, {"o1_flag", res.report.o1_flag},
           {"cross_delta_osc", res.report.cross_delta_osc}};
  if (res.phi.size() >= 2) {
    json rec = json::array();
    for (const auto& pole : ps.poles)
      rec.push_back(cma::recover_pole_weight(res.phi.front(), ps.deltas.front(), res.phi.back(),
                                             ps.deltas.back(), pole, ps, mask, min_inner_r));
    rep["recovered_weights"] = rec;
  }
  write_json(dir / "poles.json", rep);
  std::cout << rep.dump(2) << "\n";
  return res.report.o1_flag || res.phi.size() < 2 ? 0 : 1;
}

int cmd_asymptotics(const json& cfg) {
  cma::DomainMask mask = parse_domain(cfg);
  cma::PoleSpec ps = parse_poles(cfg, mask);
  if (!cfg.contains("asymptotics") || !cfg["asymptotics"].contains("phi_family"))
    throw ConfigError("config: missing asymptotics.phi_family");
  check_keys(cfg["asymptotics"], "asymptotics", {"phi_family"});
  std::vector<cma::GridFunction> family;
  for (const auto& path : cfg["asymptotics"]["phi_family"])
    family.push_back(cma::load_field(path.get<std::string>()));
  double min_inner_r = cfg["poles"].value("min_inner_r", 3.0 * mask.spec.h());
  double osc = cfg["poles"].value("osc_bound", 0.1);
  double growth = cfg["poles"].value("growth_const", 5.0);
  cma::AsymptoticsReport rep = cma::verify_asymptotics(family, ps, mask, min_inner_r, osc, growth);
  fs::path dir = out_dir(cfg);
  emit_annulus_csv(dir / "annuli.csv", rep);
  json j{{"o1_flag", rep.o1_flag}, {"cross_delta_osc", rep.cross_delta_osc}};
  write_json(dir / "asymptotics.json", j);
  std::cout << j.dump(2) << "\n";
  return rep.o1_flag ? 0 : 1;
}

int cmd_klt(int n, int m) {
  cma::KltData k = cma::klt_discrepancy(n, m);
  json rep{{"a", k.a.to_double()}, {"a_num", k.a.num}, {"a_den", k.a.den}, {"klt", k.is_klt}};
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_blowup_check(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  double worst = 0.0, worst_schur = 0.0;
  for (int i = 0; i < samples; ++i) {
    cma::cplx z(coord(rng), coord(rng)), u(coord(rng), coord(rng));
    cma::BlowupCheck c = cma::blowup_positivity(z, u);
    worst = std::min(worst, c.lambda_min);
    double ref = std::max(1e-300, std::abs(c.schur_value));
    worst_schur = std::max(worst_schur, std::abs(c.det - c.schur_value) / ref);
  }
  bool ok = worst >= -1e-12 && worst_schur <= 1e-12;
  json rep{{"samples", samples},
           {"worst_lambda_min", worst},
           {"worst_schur_rel_err", worst_schur},
           {"pass", ok}};
  std::cout << rep.dump(2) << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex Monge-Ampere Dirichlet solver and verification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_cfg = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
  };

  auto* solve = app.add_subcommand("solve", "single Dirichlet solve via the continuity path");
  add_cfg(solve);
  auto* continuation = app.add_subcommand("continuation", "continuity path with history CSV");
  add_cfg(continuation);
  auto* sfamily = app.add_subcommand("sfamily", "regularized s-family with limit diagnostics");
  add_cfg(sfamily);
  auto* capacity = app.add_subcommand("capacity", "Monge-Ampere capacity of a node set");
  add_cfg(capacity);
  auto* extremal = app.add_subcommand("extremal", "relative extremal function of a node set");
  add_cfg(extremal);
  auto* compare = app.add_subcommand("compare", "comparison-principle check of two potentials");
  add_cfg(compare);
  auto* stats = app.add_subcommand("stats", "sublevel capacity/mass statistics");
  add_cfg(stats);
  auto* degiorgi = app.add_subcommand("degiorgi", "iteration-lemma certificate from F samples");
  add_cfg(degiorgi);
  auto* c0cert = app.add_subcommand("c0cert", "uniform-bound certificate from a solved field");
  add_cfg(c0cert);
  auto* poles = app.add_subcommand("poles", "log-pole family solve with asymptotics");
  add_cfg(poles);
  auto* asym = app.add_subcommand("asymptotics", "asymptotics report for a saved family");
  add_cfg(asym);

  int klt_n = 2, klt_m = 2;
  auto* klt = app.add_subcommand("klt", "discrepancy of the cone singularity resolution");
  klt->add_option("--n", klt_n, "ambient dimension")->required();
  klt->add_option("--m", klt_m, "degree")->required();

  int bc_samples = 10000;
  std::uint64_t bc_seed = 1234;
  auto* blowup = app.add_subcommand("blowup-check", "random check of the chart positivity matrix");
  blowup->add_option("--samples", bc_samples, "sample count");
  blowup->add_option("--seed", bc_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (klt->parsed()) return cmd_klt(klt_n, klt_m);
    if (blowup->parsed()) return cmd_blowup_check(bc_samples, bc_seed);

    json cfg = load_config(config_path);
    if (solve->parsed()) return cmd_solve(cfg, false);
    if (continuation->parsed()) return cmd_solve(cfg, true);
    if (sfamily->parsed()) return cmd_sfamily(cfg);
    if (capacity->parsed()) return cmd_capacity(cfg, false);
    if (extremal->parsed()) return cmd_capacity(cfg, true);
    if (compare->parsed()) return cmd_compare(cfg);
    if (stats->parsed()) return cmd_stats(cfg);
    if (degiorgi->parsed()) return cmd_degiorgi(cfg);
    if (c0cert->parsed()) return cmd_c0cert(cfg);
    if (poles->parsed()) return cmd_poles(cfg);
    if (asym->parsed()) return cmd_asymptotics(cfg);
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "config"}}.dump() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "config"}}.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "runtime"}}.dump() << "\n";
    return 2;
  }
  return 3;
}
