#include "adaptive_ope/harness.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace aope;
using namespace aope::test;

namespace {

Scenario small_gaussian(std::size_t periods = 60, std::size_t trials = 6) {
  Scenario s = preset_scenario("gaussian-neyman");
  s.periods = periods;
  s.trials = trials;
  s.seed = 99;
  return s;
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("aope_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

TrialResult synthetic_trial(std::size_t index, std::vector<std::pair<double, bool>> per_est) {
  TrialResult t;
  t.index = index;
  for (const auto& [err, cov] : per_est) {
    EstimatorOutcome o;
    o.kind = EstimatorKind::kAdr;
    o.ok = true;
    o.error = err;
    o.covered = cov;
    t.outcomes.push_back(o);
  }
  return t;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("aggregate examples") {
  auto s = summarize_errors({0.1, -0.1}, {true, false});
  CHECK(near(s.rmse, 0.1, 1e-12));
  CHECK(s.cr == 0.5);
  s = summarize_errors({3.0, 4.0}, {true, true});
  CHECK(near(s.rmse, std::sqrt(12.5), 1e-12));
  // squared errors (9, 16): population sd 3.5
  CHECK(near(s.sd, 3.5, 1e-12));
  std::vector<double> e(100, 0.2);
  std::vector<bool> c(100, false);
  std::fill(c.begin(), c.begin() + 95, true);
  CHECK(summarize_errors(e, c).cr == 0.95);
  CHECK_THROWS_AS(summarize_errors({}, {}), DomainError);
}

TEST_CASE("aggregate skips failed estimator runs") {
  Scenario s = small_gaussian();
  s.estimators = {EstimatorSpec::standard(EstimatorKind::kAdr),
                  EstimatorSpec::standard(EstimatorKind::kA2ipw)};
  std::vector<TrialResult> trials;
  for (std::size_t i = 0; i < 4; ++i) {
    auto t = synthetic_trial(i, {{0.5, true}, {1.0, false}});
    if (i == 0) t.outcomes[1].ok = false;
    trials.push_back(t);
  }
  const auto rows = aggregate(s, trials);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n_trials == 4);
  CHECK(rows[1].n_trials == 3);
  CHECK(rows[0].estimator == "adr");
  CHECK(rows[1].rmse == 1.0);
  CHECK(rows[1].cr == 0.0);
  CHECK_THROWS_AS(aggregate(s, {}), DomainError);
}

TEST_CASE("degenerate interval at the truth covers") {
  Scenario s = small_gaussian(5, 3);
  s.estimators = {EstimatorSpec::standard(EstimatorKind::kDm)};
  ScenarioContext ctx = prepare_context(s);
  std::vector<TrialResult> trials;
  for (std::size_t i = 0; i < 3; ++i) {
    TrialResult t;
    EstimatorOutcome o;
    o.kind = EstimatorKind::kDm;
    o.ok = true;
    o.ci = {ctx.truth, ctx.truth};
    o.covered = o.ci.lo <= ctx.truth && ctx.truth <= o.ci.hi;
    t.outcomes.push_back(o);
    trials.push_back(t);
  }
  CHECK(aggregate(s, trials)[0].cr == 1.0);
  // dm with the oracle outcome model has constant scores equal to the truth
  s.mode = NuisanceMode::kOracle;
  s.logger = LoggerKind::kFixed;
  const auto run = run_scenario(s);
  CHECK(run.metrics[0].cr == 1.0);
  CHECK(run.metrics[0].rmse == 0.0);
}

TEST_CASE("kde examples") {
  const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(near(kde_curve({0.0}, 1.0, {0.0})[0], peak, 1e-12));
  const auto sym = kde_curve({0.0}, 1.0, {-1.0, 1.0});
  CHECK(sym[0] == sym[1]);
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(-10.0 + 20.0 * i / 4000.0);
  const auto d = kde_curve({-0.5, 0.2, 1.3}, 0.4, grid);
  double integral = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) integral += 0.5 * (d[i] + d[i - 1]) * (grid[i] - grid[i - 1]);
  CHECK(near(integral, 1.0, 0.01));
  CHECK_THROWS_AS(kde_curve({0.0}, 0.0, {0.0}), DomainError);
  CHECK_THROWS_AS(kde_curve({}, 1.0, {0.0}), DomainError);
  CHECK(silverman_bandwidth({1.0, 1.0}) > 0.0);
}

TEST_CASE("seeds are deterministic and distinct") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("same trial twice is bitwise identical") {
  const Scenario s = small_gaussian();
  const auto ctx = prepare_context(s);
  const auto a = run_trial(s, ctx, 3);
  const auto b = run_trial(s, ctx, 3);
  REQUIRE(a.outcomes.size() == b.outcomes.size());
  for (std::size_t e = 0; e < a.outcomes.size(); ++e) {
    CHECK(a.outcomes[e].error == b.outcomes[e].error);
    CHECK(a.outcomes[e].covered == b.outcomes[e].covered);
  }
  CHECK(a.actions == b.actions);
  CHECK(run_trial(s, ctx, 4).actions != a.actions);
}

TEST_CASE("parallel trials match sequential trials") {
  Scenario s = preset_scenario("bandit-linucb");
  s.periods = 40;
  s.trials = 5;
  s.oracle_budget = 2000;
  s.train_size = 200;
  s.estimators = {EstimatorSpec::standard(EstimatorKind::kAdr),
                  EstimatorSpec::standard(EstimatorKind::kDr)};
  const auto seq = run_scenario(s, 1);
  const auto par = run_scenario(s, 3);
  CHECK(seq.metrics == par.metrics);
  for (std::size_t i = 0; i < s.trials; ++i) {
    CHECK(seq.trials[i].outcomes[0].error == par.trials[i].outcomes[0].error);
  }
}

TEST_CASE("estimator order does not change errors") {
  Scenario s = small_gaussian(80, 3);
  const auto ctx = prepare_context(s);
  Scenario r = s;
  std::reverse(r.estimators.begin(), r.estimators.end());
  for (std::size_t i = 0; i < s.trials; ++i) {
    const auto a = run_trial(s, ctx, i);
    const auto b = run_trial(r, ctx, i);
    const std::size_t n = a.outcomes.size();
    for (std::size_t e = 0; e < n; ++e) {
      CHECK(a.outcomes[e].kind == b.outcomes[n - 1 - e].kind);
      CHECK(a.outcomes[e].error == b.outcomes[n - 1 - e].error);
    }
  }
}

TEST_CASE("one-hot loggers never leave the realized action unsupported") {
  Scenario s = small_gaussian(30, 2);
  s.estimators = {EstimatorSpec::standard(EstimatorKind::kA2ipw),
                  EstimatorSpec::standard(EstimatorKind::kIpw)};
  const auto run = run_scenario(s);
  CHECK(run.metrics[0].n_trials == 2);
  CHECK(run.metrics[1].n_trials == 2);
}

TEST_CASE("export round trip and row counts") {
  std::vector<ScenarioRun> runs;
  for (std::size_t t : {20u, 30u, 40u}) {
    Scenario s = small_gaussian(t, 3);
    s.estimators = {EstimatorSpec::standard(EstimatorKind::kAdr),
                    EstimatorSpec::standard(EstimatorKind::kA3ipw)};
    runs.push_back(run_scenario(s));
  }
  const auto dir = fresh_dir("export");
  export_results(runs, dir, R"({"scenario":"gaussian-neyman"})");
  const auto rows = read_metrics_csv(dir / "metrics.csv");
  REQUIRE(rows.size() == 6);
  std::vector<MetricsRow> expected;
  for (const auto& r : runs) expected.insert(expected.end(), r.metrics.begin(), r.metrics.end());
  CHECK(rows == expected);
  CHECK(count_lines(dir / "errors.csv") == 1 + 3 * 3 * 2);
  CHECK(count_lines(dir / "kde.csv") == 1 + 6 * 101);
  std::ifstream meta(dir / "meta.json");
  std::string text((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"mds_diagnostics\"") != std::string::npos);
  CHECK(text.find("\"seed\"") != std::string::npos);
  std::ifstream head(dir / "errors.csv");
  std::string line;
  std::getline(head, line);
  CHECK(line == "scenario,logger,T,estimator,trial,error,covered");
  std::filesystem::remove_all(dir);
}

TEST_CASE("failures appear in errors.csv with an empty error") {
  Scenario s = small_gaussian(20, 2);
  s.estimators = {EstimatorSpec::standard(EstimatorKind::kA2ipw)};
  ScenarioRun run = run_scenario(s);
  run.trials[0].outcomes[0].ok = false;
  run.trials[0].outcomes[0].failure = "synthetic";
  run.metrics = aggregate(s, run.trials);
  CHECK(run.metrics[0].n_trials == 1);
  const auto dir = fresh_dir("failed");
  export_results({run}, dir);
  std::ifstream in(dir / "errors.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line == "gaussian-neyman,neyman,20,a2ipw,0,,failed");
  std::ifstream meta(dir / "meta.json");
  std::string text((std::istreambuf_iterator<char>(meta)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"failures\"") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario validation") {
  Scenario s = small_gaussian();
  s.dgp = DgpKind::kSoftmax;
  CHECK_THROWS_AS(validate(s), ConfigurationError);
  s = small_gaussian();
  s.estimators.clear();
  CHECK_THROWS_AS(validate(s), ConfigurationError);
  s = small_gaussian();
  s.logger = LoggerKind::kFixed;
  s.policy.fixed_probs = vec({0.2, 0.3, 0.5});
  CHECK_THROWS_AS(validate(s), ConfigurationError);
  CHECK_THROWS_AS(preset_scenario("nope"), ConfigurationError);
  CHECK(preset_scenario("bandit-lints").estimators.size() == 10);
}

TEST_CASE("oracle a2ipw error is centered with variance six over T") {
  Scenario s = preset_scenario("custom");
  s.logger = LoggerKind::kFixed;
  s.policy.fixed_probs = vec({0.5, 0.5});
  s.mode = NuisanceMode::kOracle;
  s.estimators = {EstimatorSpec::standard(EstimatorKind::kA2ipw)};
  s.periods = 1000;
  s.trials = 500;
  s.seed = 5;
  const auto run = run_scenario(s);
  CHECK(run.context.psi == doctest::Approx(6.0));
  double mean = 0.0;
  for (const auto& t : run.trials) mean += t.outcomes[0].error;
  mean /= 500.0;
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(6.0 / (1000.0 * 500.0)));
}

TEST_CASE("softmax context is shared across horizons") {
  Scenario a = preset_scenario("bandit-linucb");
  a.oracle_budget = 500;
  a.train_size = 100;
  a.seed = 3;
  Scenario b = a;
  b.periods = 250;
  b.logger = LoggerKind::kLinTs;
  const auto ca = prepare_context(a);
  const auto cb = prepare_context(b);
  CHECK(ca.truth == cb.truth);
  CHECK(ca.softmax->signs() == cb.softmax->signs());
  CHECK(ca.truth > 0.0);
  CHECK(ca.truth < 1.0);
}

TEST_CASE("format double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::nan("")) == "nan");
}

}
