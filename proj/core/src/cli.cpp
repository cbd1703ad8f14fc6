#include "critsys/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "critsys/blowup.hpp"

namespace critsys {

namespace {

using json = nlohmann::json;  // std::map storage: keys always sorted
using config_map = std::map<std::string, std::string>;

struct sink {
  std::string* out = nullptr;
  std::string* csv = nullptr;
  std::string* err = nullptr;

  void print(const std::string& s) const {
    if (out)
      *out += s;
    else
      std::cout << s;
  }
  void warn(const std::string& s) const {
    if (err)
      *err += s;
    else
      std::cerr << s;
  }
};

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

config_map defaults_for(const std::string& cmd) {
  if (cmd == "constants") return {{"n", "3..8"}};
  if (cmd == "verify")
    return {{"family", "remark13"}, {"lambda", ""}, {"lambda2", "3"}, {"n", ""},
            {"N", "4096"},          {"tol", ""},    {"s", "1"},       {"alpha", "0.5"},
            {"beta", "0.5"},        {"t", "0.1"}};
  if (cmd == "minimize")
    return {{"model", "sphere:n=4"}, {"coupling", "yamabe-diag:p=1"},
            {"seed", "graded"},      {"N", "1024"},
            {"tol", "1e-9"},         {"max_iter", "20000"},
            {"step0", "0.1"},        {"abs_projection", "0"}};
  if (cmd == "solve")
    return {{"model", "sphere:n=4"}, {"coupling", "yamabe-diag:p=1"},
            {"seed", "minimizer"},   {"N", "512"},
            {"tol", "1e-10"},        {"max_iter", "50"},
            {"lambda_rhs", "1"}};
  if (cmd == "blowup")
    return {{"family", "sphere_yamabe"},
            {"n", "4"},
            {"N", "4096"},
            {"lambda_grid", "1.5,1.1,1.01,1.001"},
            {"delta", "0.5"},
            {"s", "1"}};
  if (cmd == "multiplicity")
    return {{"n", "4"}, {"T", "40"}, {"k", "3"}, {"N", "1536"}, {"tol", "1e-11"},
            {"potential", ""}};
  throw config_error("unknown command '" + cmd + "'");
}

void apply_config_file(config_map& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const auto it = cfg.find(key);
    if (it == cfg.end())
      throw config_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second = val;
  }
}

double num(const config_map& cfg, const std::string& key) {
  const std::string& v = cfg.at(key);
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw config_error("key '" + key + "': cannot parse number from '" + v + "'");
  }
}

int inum(const config_map& cfg, const std::string& key) {
  const double x = num(cfg, key);
  const int i = static_cast<int>(std::llround(x));
  if (std::abs(x - i) > 1e-12)
    throw config_error("key '" + key + "': integer required, got '" + cfg.at(key) + "'");
  return i;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw config_error(what + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw config_error(what + ": empty list");
  return out;
}

// "name:key=value,key=value" specs for models, couplings, and seeds
struct spec {
  std::string name;
  config_map kv;
  double get(const std::string& key, double fallback, bool required = false) const {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw config_error("spec '" + name + "': missing '" + key + "'");
      return fallback;
    }
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw config_error("spec '" + name + "': bad value for '" + key + "'");
    }
  }
};

spec parse_spec(const std::string& s) {
  spec sp;
  const size_t colon = s.find(':');
  sp.name = trim(s.substr(0, colon));
  if (colon == std::string::npos) return sp;
  std::stringstream ss(s.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw config_error("spec '" + s + "': expected key=value items");
    sp.kv[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  return sp;
}

manifold_model model_from_config(const config_map& cfg) {
  const spec sp = parse_spec(cfg.at("model"));
  const int N = inum(cfg, "N");
  const int n = static_cast<int>(sp.get("n", 4));
  if (sp.name == "sphere") return sphere_model(n, N);
  if (sp.name == "circle") return circle_model(n, sp.get("T", 1.0, true), N);
  if (sp.name == "ball") return ball_model(n, sp.get("R", 1.0, true), N);
  throw config_error("unknown model '" + sp.name + "'");
}

coupling coupling_from_config(const config_map& cfg, const manifold_model& m) {
  const spec sp = parse_spec(cfg.at("coupling"));
  const int p = static_cast<int>(sp.get("p", 1));
  if (sp.name == "yamabe-diag") return yamabe_coupling(m.n, p);
  if (sp.name == "const-diag") return diagonal_coupling(p, sp.get("c", 1.0, true));
  if (sp.name == "offdiag") {
    if (p != 2) throw config_error("offdiag coupling requires p=2");
    const double al = sp.get("alpha", 0.5);
    const double d = yamabe_potential(m.n);
    return constant_coupling(2, {d, al, al, d});
  }
  if (sp.name == "remark13") {
    if (m.n != 6) throw config_error("remark13 coupling requires an n=6 model");
    return remark13_family(m, sp.get("lambda", 1.0)).A;
  }
  throw config_error("unknown coupling '" + sp.name + "'");
}

pmap seed_from_config(const config_map& cfg, const manifold_model& m, int p) {
  const std::string& raw = cfg.at("seed");
  const size_t colon = raw.find(':');
  if (trim(raw.substr(0, colon)) == "pair") {
    // positional component values, not key=value items: seed = pair:1,-0.2
    if (colon == std::string::npos)
      throw config_error("seed 'pair': expected " + std::to_string(p) + " values");
    const std::vector<double> vals =
        parse_list(raw.substr(colon + 1), "seed values");
    if (static_cast<int>(vals.size()) != p)
      throw config_error("seed 'pair': expected " + std::to_string(p) + " values");
    return constant_map(vals, m.N);
  }
  const spec sp = parse_spec(raw);
  if (sp.name == "graded" || sp.name.empty()) return pmap{};  // library default
  if (sp.name == "constant") {
    pmap u = zero_map(p, m.N);
    for (int i = 0; i < p; ++i) u.comp[i].assign(m.N, sp.get("c", 1.0));
    return u;
  }
  if (sp.name == "bump") {
    pmap u = zero_map(p, m.N);
    const double c0 = m.extent / 2.0;
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < m.N; ++k) {
        const double d = coord_distance(m, m.x[k], c0);
        u.comp[i][k] = std::exp(-0.5 * d * d) / (i + 1.0);
      }
    return u;
  }
  if (sp.name == "bubble") {
    if (m.kind != model_kind::sphere_radial)
      throw config_error("seed 'bubble' requires a sphere model");
    const field b = sphere_bubble_field(m, sp.get("lam", 1.5));
    pmap u = zero_map(p, m.N);
    for (int i = 0; i < p; ++i) u.comp[i] = b;
    return u;
  }
  if (sp.name == "zero") return zero_map(p, m.N);
  throw config_error("unknown seed '" + sp.name + "'");
}

json config_echo(const config_map& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg) j[k] = v;
  return j;
}

struct check_table {
  json rows = json::array();
  bool all_pass = true;

  void add(const std::string& name, double value, double tol, bool pass) {
    rows.push_back({{"check", name}, {"value", value}, {"tol", tol}, {"pass", pass}});
    all_pass = all_pass && pass;
  }
  void add_le(const std::string& name, double value, double tol) {
    add(name, value, tol, value <= tol);
  }
};

// ---- commands -------------------------------------------------------

int cmd_constants(const config_map& cfg, json& report) {
  const std::string& r = cfg.at("n");
  int lo = 0, hi = 0;
  const size_t dots = r.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoi(r);
    } else {
      lo = std::stoi(r.substr(0, dots));
      hi = std::stoi(r.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw config_error("key 'n': expected an integer or a..b range");
  }
  if (lo < 3 || hi < lo) throw config_error("key 'n': need 3 <= a <= b");
  json rows = json::array();
  for (int n = lo; n <= hi; ++n)
    rows.push_back({{"n", n},
                    {"omega_n", sphere_volume(n)},
                    {"K_n", sharp_sobolev(n)},
                    {"K_n_sq_inv", sharp_sobolev_sq_inv(n)},
                    {"critical_exp", critical_exp(n)}});
  report["rows"] = rows;
  return 0;
}

int cmd_verify(const config_map& cfg, json& report) {
  const std::string family = cfg.at("family");
  const int N = inum(cfg, "N");
  // constant-map families default to lambda=1; bubble families need lambda>1
  const double lam = !cfg.at("lambda").empty() ? num(cfg, "lambda")
                     : family == "remark13"    ? 1.0
                                               : 2.0;
  check_table tab;

  auto resolve_n = [&](int dflt) {
    return cfg.at("n").empty() ? dflt : inum(cfg, "n");
  };
  auto fd_budget = [&](const manifold_model& m) {
    return cfg.at("tol").empty() ? 20.0 * m.h * m.h : num(cfg, "tol");
  };

  if (family == "remark13") {
    const manifold_model m = sphere_model(resolve_n(6), N);
    const double tol = cfg.at("tol").empty() ? 1e-12 : num(cfg, "tol");
    const triple_solutions tri = remark13_family(m, lam);
    for (int s = 0; s < 3; ++s)  // the constant family solves the source -1 system
      tab.add_le("solution_" + std::to_string(s + 1) + "_residual",
                 residual_sup_relative(m, tri.maps[s], tri.A, -1.0), tol);
    double sep = 1e300;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        sep = std::min(sep, std::max(std::abs(tri.values[a][0] - tri.values[b][0]),
                                     std::abs(tri.values[a][1] - tri.values[b][1])));
    tab.add("solutions_distinct", sep, 1e-6, sep > 1e-6);
  } else if (family == "remark11") {
    const manifold_model m = sphere_model(resolve_n(4), N);
    const pair_system ps = remark11_system(m, lam);
    tab.add_le("pair_residual", residual_sup_relative(m, ps.u, ps.A, 1.0), fd_budget(m));
  } else if (family == "scalar_pair") {
    const manifold_model m = sphere_model(resolve_n(4), N);
    const double lam2 = num(cfg, "lambda2");
    const field u = sphere_bubble_field(m, lam);
    const field v = sphere_bubble_field(m, lam2);
    const field hv(m.N, yamabe_potential(m.n));
    const field bf(m.N, num(cfg, "beta"));
    const coupling A = coupling_from_scalars(u, v, hv, hv, bf);
    pmap U = zero_map(2, m.N);
    U.comp[0] = u;
    U.comp[1] = v;
    tab.add_le("pair_residual", residual_sup_relative(m, U, A, 1.0), fd_budget(m));
  } else if (family == "prop91_pair") {
    const manifold_model m = sphere_model(resolve_n(5), N);
    const int s = inum(cfg, "s");
    const field u = sphere_bubble_field(m, lam);
    const double mu = std::pow(sphere_bubble_max(lam, m.n), -2.0 / (m.n - 2.0));
    const field uc(m.N, constant_yamabe(m.n));
    const field hv(m.N, yamabe_potential(m.n));
    const field bf(m.N, std::pow(mu, m.n - 2.0));
    const coupling A = blowup_pair_coupling(u, uc, bf, s, hv, hv);
    pmap U = zero_map(2, m.N);
    U.comp[0] = u;
    U.comp[1] = uc;
    tab.add_le("pair_residual", residual_sup_relative(m, U, A, 1.0), fd_budget(m));
    const coupling_flags fl = structure_tests(A);
    const bool coop_ok = s >= 0 ? fl.cooperative : fl.neg_cooperative;
    tab.add("coupling_sign_structure", coop_ok ? 1.0 : 0.0, 1.0, coop_ok);
  } else if (family == "remark91") {
    const manifold_model m = sphere_model(resolve_n(4), N);
    const double half = 0.5 * yamabe_potential(m.n);
    const coupling A = remark91_matrix(m.n, half, half, half);
    const field u = sphere_bubble_field(m, lam);
    pmap U = zero_map(2, m.N);
    U.comp[0] = u;
    U.comp[1] = u;
    tab.add_le("pair_residual", residual_sup_relative(m, U, A, 1.0), fd_budget(m));
  } else if (family == "remark92") {
    const manifold_model m = sphere_model(resolve_n(4), N);
    const double ln = yamabe_potential(m.n);
    const coupling A = matrix936(m.n, ln / 2, ln / 2, 3 * ln / 4, ln / 4, 5 * ln / 4);
    const field u = sphere_bubble_field(m, lam);
    pmap U = zero_map(3, m.N);
    for (int i = 0; i < 3; ++i) U.comp[i] = u;
    tab.add_le("triple_residual", residual_sup_relative(m, U, A, 1.0), fd_budget(m));
    const coupling_flags fl = structure_tests(A);
    tab.add("fully_coupled", fl.fully_coupled ? 1.0 : 0.0, 1.0, fl.fully_coupled);
    const bool mixed = !fl.cooperative && !fl.neg_cooperative;
    tab.add("mixed_sign_offdiagonal", mixed ? 1.0 : 0.0, 1.0, mixed);
  } else if (family == "corollary91") {
    const int n = resolve_n(4);
    const double al = num(cfg, "alpha");
    const coupling base = constant_coupling(2, {0.0, al, al, 0.0});
    const double t = num(cfg, "t");
    const coupling path = corollary91_path(base, t, n);
    const coupling at0 = corollary91_path(base, 0.0, n);
    double dev = 0.0;
    const coupling diag = yamabe_coupling(n, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        dev = std::max(dev, std::abs(at0.at(i, j, 0) - diag.at(i, j, 0)));
    tab.add_le("path_origin_is_diagonal", dev, 1e-14);
    const manifold_model m = sphere_model(n, std::min(N, 512));
    const double lam1 = coercivity_lambda(m, path);
    tab.add("coercive_at_t", lam1, 0.0, lam1 > 0.0);
  } else if (family == "remark12") {
    const manifold_model m = sphere_model(resolve_n(4), N);
    const double al = num(cfg, "alpha");
    const coupling A = remark12_matrix(yamabe_potential(m.n), al, num(cfg, "beta"));
    const field u = sphere_bubble_field(m, lam);
    pmap U = zero_map(3, m.N);
    U.comp[0] = u;
    U.comp[1] = u;
    tab.add_le("triple_residual", residual_sup_relative(m, U, A, 1.0), fd_budget(m));
    const coupling_flags fl = structure_tests(A);
    const bool want = al != 0.0;
    tab.add("fully_coupled_iff_alpha", fl.fully_coupled == want ? 1.0 : 0.0, 1.0,
            fl.fully_coupled == want);
  } else {
    throw config_error("unknown family '" + family + "'");
  }

  report["checks"] = tab.rows;
  report["pass"] = tab.all_pass;
  return tab.all_pass ? 0 : 1;
}

int cmd_minimize(const config_map& cfg, json& report, const sink& io,
                 const std::string& out_dir);
int cmd_solve(const config_map& cfg, json& report, const sink& io,
              const std::string& out_dir);

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path);
}

void emit_solution_csv(const manifold_model& m, const pmap& u, const sink& io,
                       const std::string& out_dir) {
  for (int i = 0; i < u.p(); ++i) {
    const std::string text = field_csv(m, u.comp[i]);
    if (io.csv) *io.csv += text;
    if (!out_dir.empty())
      write_text(out_dir + "/solution_" + std::to_string(i) + ".csv", text);
  }
}

int cmd_minimize(const config_map& cfg, json& report, const sink& io,
                 const std::string& out_dir) {
  const manifold_model m = model_from_config(cfg);
  const coupling A = coupling_from_config(cfg, m);
  minimize_options opts;
  opts.p = A.p;
  opts.seed = seed_from_config(cfg, m, A.p);
  opts.tol = num(cfg, "tol");
  opts.max_iter = inum(cfg, "max_iter");
  opts.step0 = num(cfg, "step0");
  opts.abs_projection = inum(cfg, "abs_projection") != 0;
  opts.record_history = false;
  const solve_report rep = minimize_mu(m, A, opts);
  report["mu"] = rep.value;
  report["iterations"] = rep.iterations;
  report["converged"] = rep.converged;
  report["residual_sup"] = rep.residual_sup;
  report["phi"] = constraint_phi(m, rep.solution);
  // success = certified critical point: either the tangent gradient met the
  // flow tolerance or the equation residual is below the discretization budget
  const double budget = 20.0 * m.h * m.h;
  const bool pass = rep.converged || rep.residual_sup <= budget;
  report["residual_budget"] = budget;
  report["pass"] = pass;
  emit_solution_csv(m, rep.solution, io, out_dir);
  return pass ? 0 : 1;
}

int cmd_solve(const config_map& cfg, json& report, const sink& io,
              const std::string& out_dir) {
  const manifold_model m = model_from_config(cfg);
  const coupling A = coupling_from_config(cfg, m);
  pmap seed;
  if (cfg.at("seed") == "minimizer") {
    minimize_options mo;
    mo.p = A.p;
    mo.record_history = false;
    const solve_report min_rep = minimize_mu(m, A, mo);
    seed = rescale_to_solution(min_rep.solution, min_rep.value, m.n);
    report["minimizer_mu"] = min_rep.value;
  } else {
    seed = seed_from_config(cfg, m, A.p);
    if (seed.p() == 0) seed = constant_map(std::vector<double>(A.p, 1.0), m.N);
  }
  newton_options no;
  no.tol = num(cfg, "tol");
  no.max_iter = inum(cfg, "max_iter");
  no.lambda_rhs = num(cfg, "lambda_rhs");
  const solve_report rep = newton_solve(m, A, seed, no);
  report["iterations"] = rep.iterations;
  report["converged"] = rep.converged;
  report["residual_sup"] = rep.residual_sup;
  report["free_energy"] = rep.value;
  emit_solution_csv(m, rep.solution, io, out_dir);
  return rep.converged ? 0 : 1;
}

int cmd_blowup(const config_map& cfg, json& report, const sink& io,
               const std::string& out_dir) {
  const manifold_model m = sphere_model(inum(cfg, "n"), inum(cfg, "N"));
  family_options fo;
  fo.s = inum(cfg, "s");
  const blowup_sequence seq = build_family(
      cfg.at("family"), m, parse_list(cfg.at("lambda_grid"), "lambda_grid"), fo);
  const double delta = num(cfg, "delta");
  const std::vector<blowup_row> rows = family_diagnostics(seq, delta);

  bool ok = true;
  json jrows = json::array();
  for (const blowup_row& r : rows) {
    ok = ok && r.mu > 0.0 && r.R_delta >= 0.0 && r.R_delta <= 1.0;
    jrows.push_back({{"index", r.index},
                     {"lambda", r.lambda},
                     {"mu", r.mu},
                     {"R_delta", r.R_delta},
                     {"envelope", r.envelope},
                     {"splitting_residual", r.splitting_residual},
                     {"A_fit", r.A_fit},
                     {"c_fit", r.c_fit},
                     {"pohozaev_gap", r.pohozaev_gap}});
  }
  report["rows"] = jrows;
  report["pass"] = ok;
  const std::string text = blowup_csv(rows);
  if (io.csv) *io.csv += text;
  if (!out_dir.empty()) write_text(out_dir + "/blowup.csv", text);
  return ok ? 0 : 1;
}

int cmd_multiplicity(const config_map& cfg, json& report) {
  const int n = inum(cfg, "n");
  const int k = inum(cfg, "k");
  // default scalar potential (n-2)^2/4: the product-model constant under
  // which the quotient-circle minimizers tile into distinct solutions
  const double pot =
      cfg.at("potential").empty() ? (n - 2.0) * (n - 2.0) / 4.0 : num(cfg, "potential");
  minimize_options base;
  base.tol = num(cfg, "tol");
  base.max_iter = 40000;
  base.record_history = false;
  const std::vector<multiplicity_row> rows = multiplicity_energies(
      diagonal_coupling(1, pot), n, num(cfg, "T"), k, inum(cfg, "N"), base);
  const manifold_model big = circle_model(n, num(cfg, "T"), inum(cfg, "N"));
  bool ok = true;
  json jrows = json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    const multiplicity_row& r = rows[i];
    ok = ok && r.identity_gap <= 1e-10 && r.lift_residual <= 20.0 * big.h * big.h;
    if (i > 0) ok = ok && r.energy > rows[i - 1].energy;
    jrows.push_back({{"alpha", r.alpha},
                     {"mu", r.mu},
                     {"energy", r.energy},
                     {"lift_residual", r.lift_residual},
                     {"identity_gap", r.identity_gap},
                     {"converged", r.converged}});
  }
  report["rows"] = jrows;
  report["pass"] = ok;
  return ok ? 0 : 1;
}

// ---- dispatch -------------------------------------------------------

struct sub_ctx {
  std::string config_path;
  std::string out_dir;
  bool print_defaults = false;
  config_map overrides;
};

void add_common(CLI::App* sub, sub_ctx& ctx,
                const std::vector<std::pair<std::string, std::string>>& keys) {
  sub->add_option("--config", ctx.config_path, "key=value config file");
  sub->add_option("--out", ctx.out_dir, "directory for report.json and CSV dumps");
  sub->add_flag("--print-defaults", ctx.print_defaults,
                "print the command's default config and exit");
  for (const auto& [flag, key] : keys) {
    const std::string k = key;
    sub->add_option_function<std::string>(
        flag, [&ctx, k](const std::string& v) { ctx.overrides[k] = v; });
  }
}

int run_command(const std::string& cmd, const sub_ctx& ctx, const sink& io) {
  config_map cfg = defaults_for(cmd);
  if (ctx.print_defaults) {
    std::string text;
    for (const auto& [k, v] : cfg) text += k + " = " + v + "\n";
    io.print(text);
    return 0;
  }
  if (!ctx.config_path.empty()) apply_config_file(cfg, ctx.config_path);
  for (const auto& [k, v] : ctx.overrides) {
    if (cfg.find(k) == cfg.end())
      throw config_error("option does not apply to '" + cmd + "': " + k);
    cfg[k] = v;
  }

  if (!ctx.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + ctx.out_dir);
  }

  json report;
  report["command"] = cmd;
  report["config"] = config_echo(cfg);
  int code = 0;
  if (cmd == "constants")
    code = cmd_constants(cfg, report);
  else if (cmd == "verify")
    code = cmd_verify(cfg, report);
  else if (cmd == "minimize")
    code = cmd_minimize(cfg, report, io, ctx.out_dir);
  else if (cmd == "solve")
    code = cmd_solve(cfg, report, io, ctx.out_dir);
  else if (cmd == "blowup")
    code = cmd_blowup(cfg, report, io, ctx.out_dir);
  else if (cmd == "multiplicity")
    code = cmd_multiplicity(cfg, report);

  report["exit_code"] = code;
  const std::string text = report.dump(2) + "\n";
  io.print(text);
  if (!ctx.out_dir.empty()) write_text(ctx.out_dir + "/report.json", text);
  return code;
}

int run_impl(int argc, const char* const* argv, const sink& io) {
  CLI::App app{"critical elliptic system toolkit"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> common = {
      {"--n", "n"},     {"--N", "N"},       {"--lambda-grid", "lambda_grid"},
      {"--delta", "delta"}, {"--tol", "tol"}, {"--family", "family"},
      {"--lambda", "lambda"}, {"--model", "model"}, {"--coupling", "coupling"},
      {"--seed", "seed"}, {"--T", "T"}, {"--k", "k"}, {"--potential", "potential"}};

  std::map<std::string, sub_ctx> ctxs;
  const std::vector<std::pair<std::string, std::string>> names = {
      {"constants", "print dimensional constants (sharp Sobolev, volumes, exponents)"},
      {"verify", "check a registered closed-form solution family against its system"},
      {"minimize", "constrained minimization of the variational quotient mu"},
      {"solve", "Newton-solve the critical system from a seed map"},
      {"blowup", "build a solution family along a lambda grid and run blow-up diagnostics"},
      {"multiplicity", "construct the multi-bump energy ladder on the product model"}};
  for (const auto& [name, desc] : names) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub_ctx& ctx = ctxs[name];
    std::vector<std::pair<std::string, std::string>> keys;
    const config_map defs = defaults_for(name);
    for (const auto& [flag, key] : common)
      if (defs.find(key) != defs.end()) keys.emplace_back(flag, key);
    add_common(sub, ctx, keys);
  }

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      io.print(app.help());
      return 0;
    }
    io.warn(std::string(e.what()) + "\n");
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run_command(cmd, ctxs[cmd], io);
  } catch (const config_error& e) {
    io.warn(std::string("config error: ") + e.what() + "\n");
    return 2;
  } catch (const std::invalid_argument& e) {
    io.warn(std::string("config error: ") + e.what() + "\n");
    return 2;
  } catch (const std::exception& e) {
    io.warn(std::string("error: ") + e.what() + "\n");
    return 1;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  return run_impl(argc, argv, sink{});
}

cli_result run_cli_capture(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("critsys-cli");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> ptrs;
  ptrs.reserve(full.size());
  for (const std::string& s : full) ptrs.push_back(s.c_str());

  cli_result res;
  sink io{&res.report, &res.csv, &res.error};
  res.exit_code = run_impl(static_cast<int>(ptrs.size()), ptrs.data(), io);
  return res;
}

}  // namespace critsys
