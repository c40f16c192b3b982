#include "hlap/cli.hpp"
#include "hlap/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace hlap::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ConfigParse, what); }

void only_keys(const json& obj, const std::string& section, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail("section '" + section + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) fail("unknown key '" + k + "' in section '" + section + "'");
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail("bad value for '" + section + "." + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, std::optional<T>& out, const std::string& section) {
  if (!obj.contains(key)) return;
  T v{};
  read(obj, key, v, section);
  out = v;
}

void read_point(const json& obj, const char* key, std::optional<Point>& out, const std::string& section) {
  if (!obj.contains(key)) return;
  std::vector<double> v;
  read(obj, key, v, section);
  if (v.size() != 2) fail("'" + section + "." + key + "' must be [x, y]");
  out = Point{v[0], v[1]};
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void require_file(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) fail(what + " requires a table path");
  if (!std::filesystem::is_regular_file(p)) fail(what + " table not found: " + p.string());
}

// Two-column CSV with a header row.
std::pair<std::vector<double>, std::vector<double>> read_table(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) fail("cannot read " + p.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> a, b;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x = 0.0, y = 0.0;
    if (!(ss >> x >> y)) fail("malformed row in " + p.string() + ": " + line);
    a.push_back(x);
    b.push_back(y);
  }
  if (a.size() < 2) fail("table " + p.string() + " needs at least two rows");
  return {a, b};
}

} // namespace

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  only_keys(doc, "config",
            {"function", "modulus", "geometry", "grid", "solver", "check", "verify", "stages", "seed", "out"});
  RunConfig cfg;

  if (doc.contains("function")) {
    const json& s = doc["function"];
    only_keys(s, "function", {"kind", "p", "table", "t_max"});
    auto& f = cfg.function;
    read(s, "kind", f.kind, "function");
    read(s, "p", f.p, "function");
    read(s, "t_max", f.t_max, "function");
    std::string table;
    read(s, "table", table, "function");
    f.table = resolve(table, base_dir);
  }
  {
    const auto& f = cfg.function;
    if (f.kind == "power") {
      if (!(f.p > 1.0)) fail("function.p must exceed 1");
    } else if (f.kind == "table") {
      require_file(f.table, "function");
    } else if (f.kind != "minimal_surface" && f.kind != "exponential") {
      fail("unknown function kind '" + f.kind + "'");
    }
  }

  if (doc.contains("modulus")) {
    const json& s = doc["modulus"];
    only_keys(s, "modulus", {"kind", "a", "q", "t_cap", "table"});
    auto& m = cfg.modulus;
    read(s, "kind", m.kind, "modulus");
    read(s, "a", m.a, "modulus");
    read(s, "q", m.q, "modulus");
    read(s, "t_cap", m.t_cap, "modulus");
    std::string table;
    read(s, "table", table, "modulus");
    m.table = resolve(table, base_dir);
  }
  if (cfg.modulus.kind == "table")
    require_file(cfg.modulus.table, "modulus");
  else if (cfg.modulus.kind != "power" && cfg.modulus.kind != "log_power")
    fail("unknown modulus kind '" + cfg.modulus.kind + "'");

  if (doc.contains("geometry")) {
    const json& s = doc["geometry"];
    only_keys(s, "geometry", {"kind", "R1", "R2", "r_D", "ring", "fillet"});
    auto& g = cfg.geometry;
    read(s, "kind", g.kind, "geometry");
    read(s, "R1", g.R1, "geometry");
    read(s, "R2", g.R2, "geometry");
    read(s, "r_D", g.r_D, "geometry");
    read(s, "ring", g.ring, "geometry");
    read(s, "fillet", g.fillet, "geometry");
  }
  if (cfg.geometry.kind == "dini_cap") {
    // default window for the cap rings
    cfg.grid.lo = -1.0;
    cfg.grid.hi = 1.0;
    if (cfg.geometry.ring != "inner" && cfg.geometry.ring != "outer") fail("geometry.ring must be inner or outer");
  } else if (cfg.geometry.kind != "annulus") {
    fail("unknown geometry kind '" + cfg.geometry.kind + "'");
  }

  if (doc.contains("grid")) {
    const json& s = doc["grid"];
    only_keys(s, "grid", {"n", "extent"});
    read(s, "n", cfg.grid.n, "grid");
    if (s.contains("extent")) {
      std::vector<double> e;
      read(s, "extent", e, "grid");
      if (e.size() != 2 || !(e[0] < e[1])) fail("grid.extent must be [lo, hi] with lo < hi");
      cfg.grid.lo = e[0];
      cfg.grid.hi = e[1];
    }
  }
  if (cfg.grid.n < 33) fail("grid.n must be at least 33");

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    only_keys(s, "solver", {"delta_schedule", "tol", "max_iter", "linear_solver"});
    auto& o = cfg.solver;
    read(s, "delta_schedule", o.delta_schedule, "solver");
    read(s, "tol", o.tol, "solver");
    read(s, "max_iter", o.max_iter, "solver");
    std::string ls;
    read(s, "linear_solver", ls, "solver");
    if (ls == "direct")
      o.linear_solver = LinearSolver::DirectBanded;
    else if (ls == "iterative")
      o.linear_solver = LinearSolver::ConjugateGradientLike;
    else if (!ls.empty())
      fail("solver.linear_solver must be direct or iterative");
  }
  try {
    cfg.solver.validate();
  } catch (const Error& e) {
    fail(std::string("solver: ") + e.what());
  }

  if (doc.contains("check")) {
    const json& s = doc["check"];
    only_keys(s, "check", {"p_guess", "range", "delta2_t0", "dini_t1"});
    read(s, "p_guess", cfg.check.p_guess, "check");
    read(s, "delta2_t0", cfg.check.delta2_t0, "check");
    read(s, "dini_t1", cfg.check.dini_t1, "check");
    if (s.contains("range")) {
      std::vector<double> r;
      read(s, "range", r, "check");
      if (r.size() != 2 || !(0 < r[0] && r[0] < r[1])) fail("check.range must be [lo, hi] with 0 < lo < hi");
      cfg.check.range_lo = r[0];
      cfg.check.range_hi = r[1];
    }
  }

  if (doc.contains("verify")) {
    const json& s = doc["verify"];
    only_keys(s, "verify",
              {"zeta", "bins", "C_D", "alpha", "beta", "target", "hopf_point", "hopf_radii", "flow_start",
               "residual_rel", "condition_s_range"});
    auto& v = cfg.verify;
    read(s, "zeta", v.zeta, "verify");
    read(s, "bins", v.bins, "verify");
    read(s, "C_D", v.C_D, "verify");
    read(s, "alpha", v.alpha, "verify");
    read(s, "beta", v.beta, "verify");
    read(s, "target", v.target, "verify");
    read_point(s, "hopf_point", v.hopf_point, "verify");
    read(s, "hopf_radii", v.hopf_radii, "verify");
    read_point(s, "flow_start", v.flow_start, "verify");
    read(s, "residual_rel", v.residual_rel, "verify");
    if (s.contains("condition_s_range")) {
      std::vector<double> r;
      read(s, "condition_s_range", r, "verify");
      if (r.size() != 2 || !(0 < r[0] && r[0] < r[1])) fail("verify.condition_s_range must be [lo, hi]");
      v.condition_s_lo = r[0];
      v.condition_s_hi = r[1];
    }
    if (v.zeta != "field" && v.zeta != "modulus") fail("verify.zeta must be field or modulus");
    if (v.bins < 4) fail("verify.bins must be at least 4");
  }

  if (doc.contains("stages")) {
    read(doc, "stages", cfg.stages, "config");
    static const std::vector<std::string> order{"check", "solve", "verify"};
    int last = -1;
    for (const auto& st : cfg.stages) {
      const auto it = std::find(order.begin(), order.end(), st);
      if (it == order.end()) fail("unknown stage '" + st + "'");
      const int k = static_cast<int>(it - order.begin());
      if (k <= last) fail("stages must follow check, solve, verify order without repeats");
      last = k;
    }
  }
  read(doc, "seed", cfg.seed, "config");
  std::string out;
  read(doc, "out", out, "config");
  if (!out.empty()) cfg.out = resolve(out, base_dir);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(path.string() + ": " + e.what());
  }
  RunConfig cfg = parse_config(doc, path.parent_path());
  cfg.source = path;
  return cfg;
}

OrliczFunction make_function(const FunctionSpec& spec) {
  if (spec.kind == "power") return spec.t_max ? OrliczFunction::power(spec.p, *spec.t_max) : OrliczFunction::power(spec.p);
  if (spec.kind == "minimal_surface")
    return spec.t_max ? OrliczFunction::minimal_surface(*spec.t_max) : OrliczFunction::minimal_surface();
  if (spec.kind == "exponential")
    return spec.t_max ? OrliczFunction::exponential(*spec.t_max) : OrliczFunction::exponential();
  auto [t, h] = read_table(spec.table);
  return OrliczFunction::from_table(std::move(t), std::move(h));
}

DiniModulus make_modulus(const ModulusSpec& spec) {
  if (spec.kind == "power") return spec.t_cap ? DiniModulus::power(spec.a, *spec.t_cap) : DiniModulus::power(spec.a);
  if (spec.kind == "log_power")
    return spec.t_cap ? DiniModulus::log_power(spec.q, *spec.t_cap) : DiniModulus::log_power(spec.q);
  auto [t, e] = read_table(spec.table);
  return DiniModulus::table(std::move(t), std::move(e));
}

Grid make_grid(const GridSpec& spec) { return Grid::square(spec.n, spec.lo, spec.hi); }

ConvexRing make_ring(const RunConfig& cfg) {
  const Grid grid = make_grid(cfg.grid);
  const auto& g = cfg.geometry;
  if (g.kind == "annulus") return make_annulus(g.R1, g.R2, grid);
  const ConvexDomain K = build_dini_cap(g.r_D, make_modulus(cfg.modulus), g.fillet.value_or(grid.h));
  RingPair rings = make_rings(K, g.r_D, grid);
  return g.ring == "inner" ? std::move(rings.inner_ring) : std::move(rings.outer_ring);
}

} // namespace hlap::cli
