#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlap/geometry.hpp"
#include "hlap/grid.hpp"
#include "hlap/orlicz.hpp"
#include "hlap/solver.hpp"

namespace hlap::cli {

enum ExitCode { Ok = 0, ConfigError = 1, VerifyFail = 2, NotConverged = 3 };

struct FunctionSpec {
  std::string kind = "power";  ///< power | table | minimal_surface | exponential
  double p = 2.0;
  std::filesystem::path table;  ///< CSV with columns t,h
  std::optional<double> t_max;
};

struct ModulusSpec {
  std::string kind = "power";  ///< power | log_power | table
  double a = 0.5;
  double q = 1.0;
  std::optional<double> t_cap;
  std::filesystem::path table;  ///< CSV with columns t,eps
};

struct GeometrySpec {
  std::string kind = "annulus";  ///< annulus | dini_cap
  double R1 = 1.0;
  double R2 = 2.0;
  double r_D = 0.25;
  std::string ring = "inner";  ///< dini_cap: inner | outer
  std::optional<double> fillet;  ///< defaults to one grid cell
};

struct GridSpec {
  int n = 129;
  double lo = -2.1;
  double hi = 2.1;
};

struct CheckSpec {
  std::optional<double> p_guess;
  double range_lo = 1e-3;
  double range_hi = 1e3;
  double delta2_t0 = 1.0;
  double dini_t1 = 0.5;
};

struct VerifySpec {
  std::string zeta = "field";  ///< field | modulus
  int bins = 64;
  double C_D = 1.0;
  double alpha = 1.0;
  std::optional<double> beta;    ///< defaults to the measured max |grad w|
  std::optional<double> target;  ///< defaults to min u on the inner boundary
  std::optional<Point> hopf_point;
  std::vector<double> hopf_radii;
  std::optional<Point> flow_start;
  double residual_rel = 1e-3;
  double condition_s_lo = 0.1;
  double condition_s_hi = 10.0;
};

struct RunConfig {
  FunctionSpec function;
  ModulusSpec modulus;
  GeometrySpec geometry;
  GridSpec grid;
  SolveOptions solver;
  CheckSpec check;
  VerifySpec verify;
  std::vector<std::string> stages{"check", "solve", "verify"};
  std::uint64_t seed = 20240601;
  std::filesystem::path out = "out";
  std::filesystem::path source;  ///< the config file itself
};

/// Parses a JSON config; relative table paths resolve against the config's
/// directory. Throws ConfigParse on malformed input, unknown keys, missing
/// files or out-of-range values.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

OrliczFunction make_function(const FunctionSpec& spec);
DiniModulus make_modulus(const ModulusSpec& spec);
Grid make_grid(const GridSpec& spec);
ConvexRing make_ring(const RunConfig& cfg);

/// Each command writes its artifacts into cfg.out and returns an exit code.
/// Library errors are caught, logged and written into the stage report.
int cmd_check(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);

/// `hlap check|solve|verify|run --config <path> [--out <dir>] [--grid N] [--p VALUE]`
int run(int argc, char** argv, std::ostream& log);

} // namespace hlap::cli
