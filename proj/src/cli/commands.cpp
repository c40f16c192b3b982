#include "hlap/barrier.hpp"
#include "hlap/cli.hpp"
#include "hlap/diagnostics.hpp"
#include "hlap/error.hpp"
#include "hlap/hopf.hpp"
#include "hlap/numerics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace hlap::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_for(ErrorCode code) {
  switch (code) {
  case ErrorCode::ConfigParse:
  case ErrorCode::MissingArtifact:
  case ErrorCode::BadInput:
  case ErrorCode::BadRadii:
  case ErrorCode::GridTooSmall:
  case ErrorCode::GapTooSmall:
    return ConfigError;
  case ErrorCode::NonConvergence:
  case ErrorCode::LineSearchStall:
    return NotConverged;
  default:
    return VerifyFail;
  }
}

json error_json(const Error& e) { return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}; }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadInput, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void prepare_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw Error(ErrorCode::ConfigParse, "cannot create output directory " + cfg.out.string());
}

// Runs a stage body; library errors become a stage report with an exit code.
template <class Body>
int guarded(const RunConfig& cfg, const char* stage, std::ostream& log, Body body) {
  try {
    prepare_out(cfg);
    return body();
  } catch (const Error& e) {
    log << stage << ": " << e.what() << '\n';
    const int code = exit_for(e.code());
    if (code != ConfigError || e.code() == ErrorCode::MissingArtifact) {
      try {
        write_json(cfg.out / (std::string(stage) + ".json"), {{"pass", false}, {"error", error_json(e)}});
      } catch (const Error&) {
      }
    }
    return code;
  }
}

bool dini_ring(const RunConfig& cfg) { return cfg.geometry.kind == "dini_cap"; }
bool outer_ring(const RunConfig& cfg) { return dini_ring(cfg) && cfg.geometry.ring == "outer"; }

// u vanishes on the inner set for the outer cap ring, else on the outer set.
BoundaryData potential_data(const RunConfig& cfg) {
  return outer_ring(cfg) ? BoundaryData{0.0, 1.0} : BoundaryData{1.0, 0.0};
}

ScalarField load_field(const RunConfig& cfg, const ConvexRing& ring, const char* name) {
  const fs::path path = cfg.out / name;
  if (!fs::is_regular_file(path))
    throw Error(ErrorCode::MissingArtifact, path.string() + " missing; run the solve stage first");
  GridFile gf = read_grid_file(path);
  const Grid& g = ring.grid();
  if (gf.grid.nx != g.nx || gf.grid.ny != g.ny || gf.values.size() != g.size())
    throw Error(ErrorCode::MissingArtifact, path.string() + " does not match the configured grid");
  return ScalarField(ring.mesh(), std::move(gf.values));
}

std::vector<double> default_radii(const RunConfig& cfg) {
  if (!cfg.verify.hopf_radii.empty()) return cfg.verify.hopf_radii;
  if (dini_ring(cfg)) {
    const double r = cfg.geometry.r_D;
    return {0.4 * r, 0.2 * r, 0.1 * r};
  }
  const double gap = cfg.geometry.R2 - cfg.geometry.R1;
  return {0.4 * gap, 0.2 * gap, 0.1 * gap, 0.05 * gap};
}

Point default_hopf_point(const RunConfig& cfg) {
  if (cfg.verify.hopf_point) return *cfg.verify.hopf_point;
  return dini_ring(cfg) ? Point{0.0, 0.0} : Point{cfg.geometry.R2, 0.0};
}

Point default_flow_start(const RunConfig& cfg) {
  if (cfg.verify.flow_start) return *cfg.verify.flow_start;
  if (dini_ring(cfg)) return {0.0, 0.25 * cfg.geometry.r_D};
  return {0.5 * (cfg.geometry.R1 + cfg.geometry.R2), 0.0};
}

// Weight c(s) = |grad w| along the flow line, with w running over its range
// as s runs log-uniformly over the s range; made non-decreasing by a running
// max and resampled at 17 nodes.
ConditionReport flow_condition_R(const OrliczFunction& of, const ScalarField& w, const LevelDiagnostics& diag,
                                 Point start, Interval range, json& info) {
  const auto samples = trace_flow_line(w, diag, start);
  std::vector<double> ws, gs;
  double running = 0.0, drop = 0.0;
  for (const auto& s : samples) {
    if (!ws.empty() && s.w <= ws.back()) continue;
    drop = std::max(drop, running - s.grad_norm);
    running = std::max(running, s.grad_norm);
    ws.push_back(s.w);
    gs.push_back(running);
  }
  if (ws.size() < 2) throw Error(ErrorCode::StagnationPoint, "flow line too short for a weight");
  const double la = std::log(range.lo), lb = std::log(range.hi);
  const double w0 = ws.front(), w1 = ws.back();
  // few nodes keep the adaptive quadrature in the certification cheap
  std::vector<double> nodes = numerics::lin_space(w0, w1, 17), values;
  for (double x : nodes) values.push_back(numerics::interp_linear(ws, gs, x));
  ws = std::move(nodes);
  gs = std::move(values);
  WeightSample weight{[=](double s) {
                        const double x = w0 + (w1 - w0) * (std::log(s) - la) / (lb - la);
                        return numerics::interp_linear(ws, gs, x);
                      },
                      gs.front(), gs.back(), "flow-line |grad w|"};
  info = {{"samples", samples.size()}, {"w_range", {w0, w1}}, {"monotone_defect", drop}, {"c", gs.front()},
          {"C", gs.back()}};
  return check_condition_R(of, {weight}, range);
}

} // namespace

// ---------------------------------------------------------------------------

int cmd_check(const RunConfig& cfg, std::ostream& log) {
  return guarded(cfg, "check", log, [&] {
    const OrliczFunction of = make_function(cfg.function);
    const double p_guess = cfg.check.p_guess.value_or(cfg.function.kind == "power" ? cfg.function.p : 2.0);
    const Interval range{cfg.check.range_lo, std::min(cfg.check.range_hi, 0.5 * of.t_max())};
    const auto reports = check_conditions(of, p_guess, range, cfg.check.delta2_t0);
    bool pass = true;
    json conditions = json::array();
    for (const auto& r : reports) {
      conditions.push_back(r.to_json());
      pass = pass && r.pass;
      if (!r.pass) log << "check: " << to_string(r.condition_id) << " fails\n";
    }
    write_json(cfg.out / "conditions.json", conditions);

    const DiniModulus eps = make_modulus(cfg.modulus);
    const DiniReport dini = dini_report(eps, std::min(cfg.check.dini_t1, eps.t_cap()));
    write_json(cfg.out / "dini.json", dini.to_json());
    if (!dini.converges) log << "check: modulus fails the Dini test\n";
    if (!dini.convex_dini) log << "check: t eps(t) is not convex\n";
    pass = pass && dini.converges && dini.convex_dini;

    write_json(cfg.out / "check.json", {{"pass", pass},
                                        {"function", of.to_record()},
                                        {"modulus", eps.to_record()},
                                        {"conditions", conditions},
                                        {"dini", dini.to_json()}});
    return pass ? Ok : VerifyFail;
  });
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  return guarded(cfg, "solve", log, [&] {
    const OrliczFunction of = make_function(cfg.function);
    const ConvexRing ring = make_ring(cfg);
    const Grid& grid = ring.grid();

    const SolveResult w = solve_harmonic(ring, cfg.solver);
    const SolveResult u = solve_h_potential(ring, of, cfg.solver, potential_data(cfg));
    write_grid_file(cfg.out / "mask.grid", grid, mask_values(*ring.mesh()));
    write_grid_file(cfg.out / "w.grid", grid, w.field.values());
    write_grid_file(cfg.out / "u.grid", grid, u.field.values());
    write_convergence_log(cfg.out / "convergence.csv", u.log);

    json diag_info;
    try {
      const LevelDiagnostics d = level_diagnostics(u.field);
      write_grid_file(cfg.out / "u_grad_norm.grid", grid, d.grad_norm.values());
      write_grid_file(cfg.out / "u_laplacian.grid", grid, d.laplacian.values());
      write_grid_file(cfg.out / "u_inf_laplacian.grid", grid, d.inf_lap.values());
      write_grid_file(cfg.out / "u_curvature.grid", grid, d.curvature.values());
      const LevelDiagnostics dw = level_diagnostics(w.field);
      const GradientBounds b = gradient_bounds(w.field, dw);
      diag_info = {{"vanishing_cells", d.vanishing}, {"w_gradient_bounds", {{"c", b.c}, {"C", b.C}}}};
    } catch (const Error& e) {
      diag_info = {{"error", error_json(e)}};
    }

    auto result_json = [](const SolveResult& r) {
      json j = {{"converged", r.converged},
                {"residual", r.residual},
                {"residual_scale", r.residual_scale},
                {"iterations", r.log.empty() ? 0 : r.log.back().iteration},
                {"diagnostic", r.diagnostic}};
      if (r.error) j["error"] = std::string(to_string(*r.error));
      return j;
    };
    const bool ok = w.converged && u.converged;
    write_json(cfg.out / "solve.json", {{"pass", ok},
                                        {"function", of.to_record()},
                                        {"ring", ring.descriptor()},
                                        {"potential", result_json(u)},
                                        {"harmonic", result_json(w)},
                                        {"diagnostics", diag_info}});
    if (!ok) log << "solve: " << (u.converged ? w.diagnostic : u.diagnostic) << '\n';
    return ok ? Ok : NotConverged;
  });
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  return guarded(cfg, "verify", log, [&] {
    const OrliczFunction of = make_function(cfg.function);
    const ConvexRing ring = make_ring(cfg);
    const ScalarField u = load_field(cfg, ring, "u.grid");
    const ScalarField w = load_field(cfg, ring, "w.grid");
    const Mesh& mesh = *ring.mesh();
    const double tol_cmp = comparison_tolerance(cfg.grid.n);

    json report = {{"function", of.to_record()}, {"tol_cmp", tol_cmp}};
    bool pass = true;
    auto record = [&](const char* name, const json& j, bool ok) {
      report[name] = j;
      pass = pass && ok;
      if (!ok) log << "verify: " << name << " fails\n";
    };
    auto attempt = [&](const char* name, auto fn) {
      try {
        fn();
      } catch (const Error& e) {
        if (exit_for(e.code()) == ConfigError) throw;
        record(name, {{"pass", false}, {"error", error_json(e)}}, false);
      }
    };

    if (outer_ring(cfg)) {
      double M = 0.0;
      for (int idx : mesh.ghost_cells()) M = std::max(M, u[idx]);
      attempt("outer_lipschitz", [&] {
        const LipschitzReport lr = outer_lipschitz_check(u, ring, M, of, tol_cmp);
        write_json(cfg.out / "outer_lipschitz.json", lr.to_json());
        record("outer_lipschitz", lr.to_json(), lr.pass);
      });
    } else {
      const LevelDiagnostics diag = level_diagnostics(w);
      const GradientBounds bounds = gradient_bounds(w, diag);
      report["w_gradient_bounds"] = {{"c", bounds.c}, {"C", bounds.C}};

      attempt("barrier", [&] {
        const ZetaProfile zeta = cfg.verify.zeta == "field"
                                     ? zeta_from_field(w, diag, cfg.verify.bins)
                                     : zeta_from_modulus(make_modulus(cfg.modulus), bounds.c, bounds.C, cfg.verify.C_D);
        double target = std::numeric_limits<double>::infinity();
        for (int idx : mesh.ghost_cells())
          if (mesh.type(idx) == CellType::InnerBoundary) target = std::min(target, u[idx]);
        if (cfg.verify.target) target = *cfg.verify.target;
        const double beta = cfg.verify.beta.value_or(bounds.C);
        const BarrierProfile f = tune_m(of, zeta, cfg.verify.alpha, beta, target);
        write_barrier_csv(cfg.out / "barrier.csv", f);
        write_json(cfg.out / "zeta.json", zeta.to_json());
        record("barrier", f.header(), std::isfinite(f.f_prime.back()));

        const SubsolutionReport sub = verify_subsolution(w, diag, f, zeta, of);
        write_json(cfg.out / "subsolution.json", sub.to_json());
        record("subsolution", sub.to_json(), sub.pass);

        attempt("comparison", [&] {
          const ComparisonReport cr = comparison_check(u, f.compose(w), of, {tol_cmp, cfg.verify.residual_rel});
          write_json(cfg.out / "comparison.json", cr.to_json());
          record("comparison", cr.to_json(), cr.pass);
        });
      });

      attempt("hopf", [&] {
        const HopfReport hr = hopf_constant(u, default_hopf_point(cfg), default_radii(cfg));
        write_json(cfg.out / "hopf.json", hr.to_json());
        write_hopf_csv(cfg.out / "hopf.csv", hr);
        record("hopf", hr.to_json(), hr.pass);
      });

      attempt("condition_R", [&] {
        json info;
        const ConditionReport cr = flow_condition_R(
            of, w, diag, default_flow_start(cfg), {cfg.verify.condition_s_lo, cfg.verify.condition_s_hi}, info);
        json j = cr.to_json();
        j["weight"] = info;
        write_json(cfg.out / "condition_R.json", j);
        record("condition_R", j, cr.pass);
      });
    }
    report["pass"] = pass;
    write_json(cfg.out / "verify.json", report);
    return pass ? Ok : VerifyFail;
  });
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv, std::ostream& log) {
  CLI::App app{"H-harmonic potentials on convex rings: condition checks, solver and barrier verification"};
  app.require_subcommand(1);
  fs::path config, out;
  std::optional<int> grid_n;
  std::optional<double> p;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON configuration file")->required();
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--grid", grid_n, "grid resolution (overrides the config)");
    sub->add_option("--p", p, "power-law exponent (overrides the config)");
  };
  for (const char* name : {"check", "solve", "verify", "run"}) {
    CLI::App* sub = app.add_subcommand(name, name == std::string("run") ? "all configured stages in order"
                                                                       : std::string(name) + " stage");
    add_common(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Ok : ConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config);
    if (!out.empty()) cfg.out = out;
    if (grid_n) {
      if (*grid_n < 33) throw Error(ErrorCode::ConfigParse, "--grid must be at least 33");
      cfg.grid.n = *grid_n;
    }
    if (p) {
      if (!(*p > 1.0)) throw Error(ErrorCode::ConfigParse, "--p must exceed 1");
      cfg.function.kind = "power";
      cfg.function.p = *p;
    }
  } catch (const Error& e) {
    log << e.what() << '\n';
    return ConfigError;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  if (cmd == "check") return cmd_check(cfg, log);
  if (cmd == "solve") return cmd_solve(cfg, log);
  if (cmd == "verify") return cmd_verify(cfg, log);
  for (const auto& stage : cfg.stages) {
    const int code = stage == "check" ? cmd_check(cfg, log) : stage == "solve" ? cmd_solve(cfg, log) : cmd_verify(cfg, log);
    if (code != Ok) return code;
  }
  return Ok;
}

} // namespace hlap::cli
