#include "adaptive_ope/config.hpp"
#include "test_util.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace aope;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "adaptive_ope");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("aope_cli_" + name);
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = temp_path(name);
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("flags build a valid config") {
  CliOverrides o;
  o.scenario = "gaussian-neyman";
  o.periods = "750";
  o.trials = 100;
  o.seed = 7;
  const auto cfg = parse_config(o);
  REQUIRE(cfg.scenarios.size() == 1);
  CHECK(cfg.scenarios[0].periods == 750);
  CHECK(cfg.scenarios[0].trials == 100);
  CHECK(cfg.scenarios[0].seed == 7);
  CHECK(cfg.scenarios[0].logger == LoggerKind::kNeyman);
}

TEST_CASE("defaults follow the experiment settings") {
  CliOverrides o;
  o.scenario = "bandit-linucb";
  const auto cfg = parse_config(o);
  REQUIRE(cfg.scenarios.size() == 3);
  CHECK(cfg.scenarios[0].periods == 250);
  CHECK(cfg.scenarios[2].periods == 750);
  CHECK(cfg.scenarios[1].trials == 100);
}

TEST_CASE("flags override the config file") {
  const auto file = write_file("prec.json", R"({"scenario": "gaussian-neyman", "T": 250, "trials": 4})");
  CliOverrides o;
  o.config = file;
  CHECK(parse_config(o).scenarios.at(0).periods == 250);
  o.periods = "500";
  const auto cfg = parse_config(o);
  REQUIRE(cfg.scenarios.size() == 1);
  CHECK(cfg.scenarios[0].periods == 500);
  CHECK(cfg.scenarios[0].trials == 4);
}

TEST_CASE("jobs precedence") {
  const auto file = write_file("jobs.json", R"({"scenario": "gaussian-neyman", "jobs": 3})");
  CliOverrides o;
  o.config = file;
  unsetenv("ADAPTIVE_OPE_JOBS");
  CHECK(parse_config(o).jobs == 3);
  setenv("ADAPTIVE_OPE_JOBS", "5", 1);
  CHECK(parse_config(o).jobs == 5);
  o.jobs = 2;
  CHECK(parse_config(o).jobs == 2);
  o.jobs.reset();
  setenv("ADAPTIVE_OPE_JOBS", "zero", 1);
  CHECK_THROWS_AS(parse_config(o), ConfigurationError);
  unsetenv("ADAPTIVE_OPE_JOBS");
}

TEST_CASE("unknown estimator kind exits 2 and names it") {
  const auto r = cli({"--scenario", "gaussian-neyman", "--estimators", "adr,badname"});
  CHECK(r.code == 2);
  CHECK(r.err.find("badname") != std::string::npos);
}

TEST_CASE("unknown keys and missing files") {
  CHECK_THROWS_WITH_AS(config_from_json(R"({"scenario": "custom", "trails": 3})"),
                       doctest::Contains("trails"), ConfigurationError);
  CHECK_THROWS_WITH_AS(config_from_json(R"({"scenario": "gaussian-neyman", "nuisance": {"epsilon2": 1}})"),
                       doctest::Contains("epsilon2"), ConfigurationError);
  const auto r = cli({"--config", temp_path("does_not_exist.json").string()});
  CHECK(r.code == 2);
  CHECK(cli({"--scenario", "nope"}).code == 2);
  CHECK(cli({"--bogus-flag"}).code == 2);
}

TEST_CASE("dry run prints and writes nothing") {
  const auto out = temp_path("dry");
  std::filesystem::remove_all(out);
  const auto r = cli({"--scenario", "gaussian-neyman", "--T", "100", "--dry-run", "--out",
                      out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("would run gaussian-neyman") != std::string::npos);
  CHECK(r.out.find("\"T\"") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("presets expand to their scenarios") {
  CliOverrides o;
  o.preset = "paper-table-1";
  auto cfg = parse_config(o);
  REQUIRE(cfg.scenarios.size() == 3);
  for (const auto& s : cfg.scenarios) CHECK(s.name == "gaussian-neyman");
  CHECK(cfg.scenarios[2].periods == 750);
  o.preset = "paper-table-2";
  cfg = parse_config(o);
  REQUIRE(cfg.scenarios.size() == 6);
  CHECK(cfg.scenarios[0].logger == LoggerKind::kLinUcb);
  CHECK(cfg.scenarios[5].logger == LoggerKind::kLinTs);
  CHECK(cfg.scenarios[5].estimators.size() == 10);
  const auto r = cli({"--preset", "paper-table-1", "--dry-run"});
  CHECK(r.code == 0);
  CHECK(r.out.find("T=750") != std::string::npos);
}

TEST_CASE("help lists every estimator kind") {
  const auto r = cli({"--help"});
  CHECK(r.code == 0);
  for (auto k : kAllEstimators) {
    CHECK(r.out.find(std::string(to_string(k))) != std::string::npos);
  }
}

TEST_CASE("identical configs give byte identical metrics") {
  const auto a = temp_path("run_a");
  const auto b = temp_path("run_b");
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  const std::vector<std::string> common{"--scenario", "gaussian-neyman", "--T", "50,80",
                                        "--trials", "4", "--seed", "11"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string(), "--jobs", "2"});
  const auto ra = cli(args_a);
  const auto rb = cli(args_b);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out.find("a3ipw") != std::string::npos);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "errors.csv") == slurp(b / "errors.csv"));
  CHECK(read_metrics_csv(a / "metrics.csv").size() == 12);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

}
