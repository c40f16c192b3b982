#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hlap/cli.hpp"
#include "hlap/error.hpp"

using namespace hlap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hlap_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

cli::RunConfig config(const json& doc, const fs::path& dir) {
  auto cfg = cli::parse_config(doc, dir);
  cfg.out = dir / "out";
  return cfg;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hlap");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream log;
  return cli::run(static_cast<int>(argv.size()), argv.data(), log);
}

ErrorCode parse_error(const json& doc) {
  try {
    cli::parse_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config accepted");
  return ErrorCode::BadInput;
}

} // namespace

TEST_CASE("config parsing") {
  const auto cfg = cli::parse_config(json::parse(R"({"function": {"kind": "power", "p": 3}, "grid": {"n": 65}})"));
  CHECK(cfg.function.p == 3.0);
  CHECK(cfg.grid.n == 65);
  CHECK(cfg.grid.lo == -2.1);
  CHECK(cfg.stages.size() == 3);

  const auto cap = cli::parse_config(json::parse(R"({"geometry": {"kind": "dini_cap"}})"));
  CHECK(cap.grid.lo == -1.0);

  CHECK(parse_error(json::parse(R"({"functon": {}})")) == ErrorCode::ConfigParse);
  CHECK(parse_error(json::parse(R"({"function": {"kind": "power", "p": 1}})")) == ErrorCode::ConfigParse);
  CHECK(parse_error(json::parse(R"({"grid": {"n": 9}})")) == ErrorCode::ConfigParse);
  CHECK(parse_error(json::parse(R"({"stages": ["verify", "solve"]})")) == ErrorCode::ConfigParse);
  CHECK(parse_error(json::parse(R"({"function": {"kind": "table", "table": "no_such.csv"}})")) ==
        ErrorCode::ConfigParse);
}

TEST_CASE("table functions resolve relative to the config") {
  const auto dir = scratch("table");
  {
    std::ofstream t(dir / "law.csv");
    t << "t,h\n";
    for (int i = 0; i <= 200; ++i) t << i * 0.05 << "," << i * 0.05 << "\n";
  }
  std::ofstream(dir / "cfg.json") << R"({"function": {"kind": "table", "table": "law.csv"}})";
  const auto cfg = cli::load_config(dir / "cfg.json");
  const auto of = cli::make_function(cfg.function);
  CHECK(of.h(2.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("check command") {
  const auto dir = scratch("check");
  auto cfg = config(json::parse(R"({"function": {"kind": "power", "p": 2}, "modulus": {"kind": "power", "a": 0.5}})"), dir);
  std::ostringstream log;
  CHECK(cli::cmd_check(cfg, log) == cli::Ok);
  CHECK(fs::exists(cfg.out / "check.json"));
  CHECK(fs::exists(cfg.out / "conditions.json"));

  cfg = config(json::parse(R"({"function": {"kind": "minimal_surface"}})"), dir);
  CHECK(cli::cmd_check(cfg, log) == cli::VerifyFail);
  const auto conditions = read_json(cfg.out / "conditions.json");
  bool coercivity_failed = false;
  for (const auto& c : conditions)
    if (c.at("condition") == "Coercivity") coercivity_failed = !c.at("pass").get<bool>();
  CHECK(coercivity_failed);
}

TEST_CASE("solve and verify commands") {
  const auto dir = scratch("solve");
  std::ostringstream log;
  auto cfg = config(json::parse(R"({"function": {"kind": "power", "p": 3}, "grid": {"n": 65}})"), dir);
  CHECK(cli::cmd_verify(cfg, log) == cli::ConfigError);
  CHECK(cli::cmd_solve(cfg, log) == cli::Ok);
  CHECK(fs::exists(cfg.out / "u.grid"));
  CHECK(fs::exists(cfg.out / "convergence.csv"));
  CHECK(read_json(cfg.out / "solve.json").at("pass").get<bool>());

  auto limited = config(json::parse(R"({"function": {"kind": "power", "p": 3}, "grid": {"n": 65}, "solver": {"max_iter": 1}})"), dir);
  limited.out = dir / "limited";
  CHECK(cli::cmd_solve(limited, log) == cli::NotConverged);
  CHECK(fs::exists(limited.out / "u.grid"));

  auto nodini = config(json::parse(R"({"function": {"kind": "power", "p": 3}, "modulus": {"kind": "log_power", "q": 1},
                                       "grid": {"n": 65}, "verify": {"zeta": "modulus"}})"), dir);
  CHECK(cli::cmd_verify(nodini, log) == cli::VerifyFail);
  CHECK(read_json(nodini.out / "verify.json").dump().find("NotIntegrable") != std::string::npos);
}

TEST_CASE("command line front end") {
  const auto dir = scratch("front");
  std::ofstream(dir / "bad.json") << R"({"function": {"kind": "table", "table": "missing.csv"}})";
  CHECK(run_cli({"check", "--config", (dir / "bad.json").string()}) == cli::ConfigError);
  CHECK(run_cli({"check", "--config", (dir / "absent.json").string()}) == cli::ConfigError);

  std::ofstream(dir / "p2.json") << R"({"function": {"kind": "power", "p": 2}, "out": "o"})";
  CHECK(run_cli({"check", "--config", (dir / "p2.json").string(), "--p", "3"}) == cli::Ok);
  CHECK(read_json(dir / "o" / "check.json").at("function").at("p") == 3.0);
}
