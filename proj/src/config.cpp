#include "adaptive_ope/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#ifndef ADAPTIVE_OPE_PRESETS_DIR
#define ADAPTIVE_OPE_PRESETS_DIR "presets"
#endif

namespace aope {

using nlohmann::json;

std::filesystem::path presets_directory() { return ADAPTIVE_OPE_PRESETS_DIR; }

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigurationError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigurationError("unknown config key '" + (where.empty() ? key : where + "." + key) +
                               "'");
    }
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::filesystem::path resolve_preset(const std::string& name) {
  std::filesystem::path p(name);
  if (std::filesystem::exists(p) && std::filesystem::is_regular_file(p)) return p;
  p = presets_directory() / (name + ".json");
  if (std::filesystem::exists(p)) return p;
  throw ConfigurationError("unknown preset '" + name + "' (looked in " +
                           presets_directory().string() + ")");
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigurationError("config key '" + where + key + "' has the wrong type");
  }
}

std::vector<std::string> string_or_list(const json& v, const char* key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigurationError(std::string("'") + key + "' entries must be strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  throw ConfigurationError(std::string("'") + key + "' must be a string or a list of strings");
}

std::vector<std::size_t> periods_of(const json& v) {
  std::vector<std::size_t> out;
  auto one = [&](const json& e) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 1) {
      throw ConfigurationError("'T' must be a positive integer or a list of them");
    }
    out.push_back(e.get<std::size_t>());
  };
  if (v.is_array()) {
    for (const auto& e : v) one(e);
  } else {
    one(v);
  }
  if (out.empty()) throw ConfigurationError("'T' list is empty");
  return out;
}

void apply_nuisance(const json& n, Scenario& s) {
  check_keys(n,
             {"refit", "first_refit", "epsilon", "lambda_grid", "gamma_grid", "holdout_fraction",
              "default_lambda", "default_gamma", "outcome_clamp", "center_outcomes", "cross_fit",
              "mode"},
             "nuisance");
  const std::string w = "nuisance.";
  auto& c = s.nuisance;
  if (n.contains("refit")) {
    const auto r = get<std::string>(n, "refit", w);
    if (r == "doubling") c.cadence = RefitCadence::kDoubling;
    else if (r == "every") c.cadence = RefitCadence::kEveryPeriod;
    else throw ConfigurationError("nuisance.refit must be 'doubling' or 'every', got '" + r + "'");
  }
  if (n.contains("first_refit")) c.first_refit = get<std::size_t>(n, "first_refit", w);
  if (n.contains("epsilon")) c.epsilon = get<double>(n, "epsilon", w);
  if (n.contains("lambda_grid")) c.lambda_grid = get<std::vector<double>>(n, "lambda_grid", w);
  if (n.contains("gamma_grid")) c.gamma_grid = get<std::vector<double>>(n, "gamma_grid", w);
  if (n.contains("holdout_fraction")) c.holdout_fraction = get<double>(n, "holdout_fraction", w);
  if (n.contains("default_lambda")) c.default_lambda = get<double>(n, "default_lambda", w);
  if (n.contains("default_gamma")) c.default_gamma = get<double>(n, "default_gamma", w);
  if (n.contains("outcome_clamp")) c.outcome_clamp = get<double>(n, "outcome_clamp", w);
  if (n.contains("center_outcomes")) c.center_outcomes = get<bool>(n, "center_outcomes", w);
  if (n.contains("cross_fit")) c.cross_fit = get<bool>(n, "cross_fit", w);
  if (n.contains("mode")) {
    const auto m = get<std::string>(n, "mode", w);
    const auto mode = parse_nuisance_mode(m);
    if (!mode) throw ConfigurationError("nuisance.mode must be 'fitted' or 'oracle', got '" + m + "'");
    s.mode = *mode;
  }
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigurationError("nuisance.epsilon must lie in (0, 1)");
  if (c.first_refit < 1) throw ConfigurationError("nuisance.first_refit must be >= 1");
  if (c.lambda_grid.empty() || c.gamma_grid.empty()) {
    throw ConfigurationError("nuisance grids must be non-empty");
  }
  for (double v : c.lambda_grid) {
    if (!(v > 0.0)) throw ConfigurationError("nuisance.lambda_grid entries must be positive");
  }
  for (double v : c.gamma_grid) {
    if (!(v > 0.0)) throw ConfigurationError("nuisance.gamma_grid entries must be positive");
  }
  if (!(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0)) {
    throw ConfigurationError("nuisance.holdout_fraction must lie in (0, 1)");
  }
}

void apply_policy(const json& p, Scenario& s) {
  check_keys(p, {"ucb_alpha", "ridge", "ts_variance", "fixed_probs", "neyman_forced_exploration"},
             "policy");
  const std::string w = "policy.";
  if (p.contains("ucb_alpha")) s.policy.ucb.alpha = get<double>(p, "ucb_alpha", w);
  if (p.contains("ridge")) {
    const double r = get<double>(p, "ridge", w);
    if (!(r > 0.0)) throw ConfigurationError("policy.ridge must be positive");
    s.policy.ucb.ridge = s.policy.ts.ridge = r;
  }
  if (p.contains("ts_variance")) {
    s.policy.ts.variance = get<double>(p, "ts_variance", w);
    if (!(s.policy.ts.variance >= 0.0)) throw ConfigurationError("policy.ts_variance must be >= 0");
  }
  if (p.contains("neyman_forced_exploration")) {
    s.policy.neyman_forced_exploration = get<bool>(p, "neyman_forced_exploration", w);
  }
  if (p.contains("fixed_probs")) {
    const auto v = get<std::vector<double>>(p, "fixed_probs", w);
    s.policy.fixed_probs = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
}

Scenario build_scenario(const std::string& name, std::size_t periods, const json& doc) {
  Scenario s = preset_scenario(name);
  if (name == "custom") {
    if (!doc.contains("dgp") || !doc.contains("logger")) {
      throw ConfigurationError("scenario 'custom' needs 'dgp' and 'logger' keys");
    }
    const auto d = get<std::string>(doc, "dgp", "");
    const auto l = get<std::string>(doc, "logger", "");
    const auto dgp = parse_dgp_kind(d);
    if (!dgp) throw ConfigurationError("unknown dgp '" + d + "'");
    const auto logger = parse_logger_kind(l);
    if (!logger) throw ConfigurationError("unknown logger '" + l + "'");
    s.dgp = *dgp;
    s.logger = *logger;
    if (s.dgp == DgpKind::kSoftmax) {
      s.outcome_bound = 1.0;
      s.nuisance.outcome_clamp = 1.0;
    }
  } else if (doc.contains("dgp") || doc.contains("logger")) {
    throw ConfigurationError("'dgp' and 'logger' are only accepted for scenario 'custom'");
  }
  s.periods = periods;
  if (doc.contains("trials")) {
    const auto t = doc.at("trials");
    if (!t.is_number_integer() || t.get<std::int64_t>() < 1) {
      throw ConfigurationError("'trials' must be a positive integer");
    }
    s.trials = t.get<std::size_t>();
  }
  if (doc.contains("seed")) s.seed = get<std::uint64_t>(doc, "seed", "");
  if (doc.contains("estimators")) {
    s.estimators.clear();
    for (const auto& e : string_or_list(doc.at("estimators"), "estimators")) {
      const auto kind = parse_estimator_kind(e);
      if (!kind) throw ConfigurationError("unknown estimator kind '" + e + "'");
      s.estimators.push_back(EstimatorSpec::standard(*kind));
    }
  }
  if (doc.contains("nuisance")) apply_nuisance(doc.at("nuisance"), s);
  if (doc.contains("policy")) apply_policy(doc.at("policy"), s);
  if (doc.contains("level")) s.level = get<double>(doc, "level", "");
  if (doc.contains("oracle_budget")) s.oracle_budget = get<std::int64_t>(doc, "oracle_budget", "");
  if (doc.contains("train_size")) s.train_size = get<std::size_t>(doc, "train_size", "");
  if (doc.contains("evaluation_l2")) s.evaluation_l2 = get<double>(doc, "evaluation_l2", "");
  if (s.oracle_budget < 1) throw ConfigurationError("'oracle_budget' must be >= 1");
  if (s.train_size < 1) throw ConfigurationError("'train_size' must be >= 1");
  validate(s);
  return s;
}

unsigned parse_jobs(const std::string& text, const std::string& source) {
  unsigned long v = 0;
  std::size_t used = 0;
  try {
    v = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v < 1 || v > 4096) {
    throw ConfigurationError(source + " must be a positive integer, got '" + text + "'");
  }
  return static_cast<unsigned>(v);
}

}  // namespace

RunConfig config_from_json(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("invalid JSON config: ") + e.what());
  }
  check_keys(doc,
             {"scenario", "T", "trials", "estimators", "seed", "out", "jobs", "nuisance", "policy",
              "level", "oracle_budget", "train_size", "evaluation_l2", "dgp", "logger"},
             "");
  if (!doc.contains("scenario")) throw ConfigurationError("no scenario given");
  const auto names = string_or_list(doc.at("scenario"), "scenario");
  if (names.empty()) throw ConfigurationError("scenario list is empty");
  const std::vector<std::size_t> periods =
      doc.contains("T") ? periods_of(doc.at("T")) : std::vector<std::size_t>{250, 500, 750};

  RunConfig cfg;
  for (const auto& name : names) {
    for (std::size_t t : periods) cfg.scenarios.push_back(build_scenario(name, t, doc));
  }
  if (doc.contains("out")) cfg.out = get<std::string>(doc, "out", "");
  if (doc.contains("jobs")) {
    const auto& j = doc.at("jobs");
    if (!j.is_number_integer() || j.get<std::int64_t>() < 1) {
      throw ConfigurationError("'jobs' must be a positive integer");
    }
    cfg.jobs = j.get<unsigned>();
  }
  cfg.resolved = doc.dump();
  return cfg;
}

RunConfig parse_config(const CliOverrides& o) {
  json doc = json::object();
  if (o.preset) doc.merge_patch(load_json_file(resolve_preset(*o.preset)));
  if (o.config) doc.merge_patch(load_json_file(*o.config));
  if (!doc.is_object()) throw ConfigurationError("config must be a JSON object");

  if (o.scenario) doc["scenario"] = split_list(*o.scenario);
  if (o.periods) {
    json arr = json::array();
    for (const auto& p : split_list(*o.periods)) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(p, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != p.size() || v < 1) throw ConfigurationError("--T expects positive integers, got '" + p + "'");
      arr.push_back(v);
    }
    doc["T"] = arr;
  }
  if (o.trials) doc["trials"] = *o.trials;
  if (o.estimators) doc["estimators"] = split_list(*o.estimators);
  if (o.seed) doc["seed"] = *o.seed;
  if (o.out) doc["out"] = *o.out;

  RunConfig cfg = config_from_json(doc.dump());
  if (o.jobs) {
    if (*o.jobs < 1) throw ConfigurationError("--jobs must be >= 1");
    cfg.jobs = *o.jobs;
  } else if (const char* env = std::getenv("ADAPTIVE_OPE_JOBS"); env != nullptr && *env != '\0') {
    cfg.jobs = parse_jobs(env, "ADAPTIVE_OPE_JOBS");
  }
  cfg.dry_run = o.dry_run;
  return cfg;
}

void print_metrics(const std::vector<MetricsRow>& rows, std::ostream& out) {
  out << std::left << std::setw(18) << "scenario" << std::setw(8) << "logger" << std::right
      << std::setw(6) << "T" << "  " << std::left << std::setw(8) << "estimator" << std::right
      << std::setw(10) << "rmse" << std::setw(10) << "sd" << std::setw(8) << "cr" << std::setw(6)
      << "n" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(18) << r.scenario << std::setw(8) << r.logger << std::right
        << std::setw(6) << r.periods << "  " << std::left << std::setw(8) << r.estimator
        << std::right << std::fixed << std::setprecision(4) << std::setw(10) << r.rmse
        << std::setw(10) << r.sd << std::setprecision(3) << std::setw(8) << r.cr << std::setw(6)
        << r.n_trials << '\n';
    out.unsetf(std::ios::fixed);
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::string kinds;
  for (auto k : kAllEstimators) {
    if (!kinds.empty()) kinds += ", ";
    kinds += to_string(k);
  }

  CLI::App app{"Adaptive off-policy evaluation Monte Carlo runner"};
  app.footer("Estimator kinds: " + kinds +
             "\nScenarios: gaussian-neyman, bandit-linucb, bandit-lints, custom"
             "\nPresets: paper-table-1, paper-table-2 (or a path to a JSON document)"
             "\nADAPTIVE_OPE_JOBS sets the worker count when --jobs is absent.");
  CliOverrides o;
  std::string scenario, periods, estimators, out_dir, config, preset;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  auto* o_scenario = app.add_option("--scenario", scenario,
                                    "gaussian-neyman, bandit-linucb, bandit-lints or custom "
                                    "(comma separated for several)");
  auto* o_t = app.add_option("--T", periods, "horizon(s), comma separated");
  auto* o_trials = app.add_option("--trials", trials, "number of trials per scenario");
  auto* o_est = app.add_option("--estimators", estimators, "comma separated subset of: " + kinds);
  auto* o_seed = app.add_option("--seed", seed, "base seed");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_config = app.add_option("--config", config, "JSON config file");
  auto* o_preset = app.add_option("--preset", preset, "named preset or preset file");
  auto* o_jobs = app.add_option("--jobs", jobs, "worker threads for trials");
  app.add_flag("--dry-run", o.dry_run, "print the resolved config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  if (*o_scenario) o.scenario = scenario;
  if (*o_t) o.periods = periods;
  if (*o_trials) o.trials = trials;
  if (*o_est) o.estimators = estimators;
  if (*o_seed) o.seed = seed;
  if (*o_out) o.out = out_dir;
  if (*o_config) o.config = config;
  if (*o_preset) o.preset = preset;
  if (*o_jobs) o.jobs = jobs;

  RunConfig cfg;
  try {
    cfg = parse_config(o);
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  if (cfg.dry_run) {
    json echo = json::parse(cfg.resolved);
    echo["jobs"] = cfg.jobs;
    echo["out"] = cfg.out.string();
    out << echo.dump(2) << '\n';
    for (const auto& s : cfg.scenarios) {
      out << "would run " << s.name << " (" << to_string(s.dgp) << "/" << to_string(s.logger)
          << ") T=" << s.periods << " trials=" << s.trials << " estimators=";
      for (std::size_t i = 0; i < s.estimators.size(); ++i) {
        out << (i ? "," : "") << to_string(s.estimators[i].kind);
      }
      out << '\n';
    }
    return 0;
  }

  std::vector<ScenarioRun> runs;
  std::vector<MetricsRow> rows;
  try {
    for (const auto& s : cfg.scenarios) {
      err << "running " << s.name << " T=" << s.periods << " trials=" << s.trials << '\n';
      runs.push_back(run_scenario(s, cfg.jobs));
      rows.insert(rows.end(), runs.back().metrics.begin(), runs.back().metrics.end());
    }
    export_results(runs, cfg.out, cfg.resolved);
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  print_metrics(rows, out);
  out << "wrote " << (cfg.out / "metrics.csv").string() << '\n';
  return 0;
}

}  // namespace aope
