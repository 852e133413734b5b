#ifndef ADAPTIVE_OPE_HARNESS_HPP
#define ADAPTIVE_OPE_HARNESS_HPP

#include "adaptive_ope/core.hpp"
#include "adaptive_ope/dgp.hpp"
#include "adaptive_ope/estimators.hpp"
#include "adaptive_ope/inference.hpp"
#include "adaptive_ope/nuisance.hpp"
#include "adaptive_ope/policies.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aope {

enum class DgpKind { kGaussian, kSoftmax };
enum class LoggerKind { kNeyman, kLinUcb, kLinTs, kFixed };

/// kOracle binds f = f* and g = the logger's limiting allocation (Gaussian DGP only).
enum class NuisanceMode { kFitted, kOracle };

std::string_view to_string(DgpKind kind);
std::string_view to_string(LoggerKind kind);
std::string_view to_string(NuisanceMode mode);
std::optional<DgpKind> parse_dgp_kind(std::string_view name);
std::optional<LoggerKind> parse_logger_kind(std::string_view name);
std::optional<NuisanceMode> parse_nuisance_mode(std::string_view name);

struct PolicySettings {
  LinUcbConfig ucb;
  LinTsConfig ts;
  Eigen::VectorXd fixed_probs;  // empty means uniform
  bool neyman_forced_exploration = true;
};

struct Scenario {
  std::string name = "custom";
  DgpKind dgp = DgpKind::kGaussian;
  LoggerKind logger = LoggerKind::kNeyman;
  std::size_t periods = 750;
  std::size_t trials = 100;
  std::vector<EstimatorSpec> estimators;
  NuisanceConfig nuisance;
  NuisanceMode mode = NuisanceMode::kFitted;
  PolicySettings policy;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::int64_t oracle_budget = kDefaultOracleBudget;
  std::size_t train_size = 1000;
  double evaluation_l2 = 1.0;
  // Hard bound for Bernoulli outcomes; Gaussian outcomes only count exceedances.
  double outcome_bound = 10.0;
};

/// Scenario presets: gaussian-neyman, bandit-linucb, bandit-lints.
Scenario preset_scenario(std::string_view name);

void validate(const Scenario& scenario);

/// Per-scenario state fixed before any trial: evaluation weight, truth, DGP instance.
struct ScenarioContext {
  EvaluationWeight weight;
  double truth = 0.0;
  GaussianTwoArmDGP gaussian;
  std::optional<SoftmaxContextualDGP> softmax;
  std::uint64_t scenario_seed = 0;
  // Semiparametric bound at the logger's limiting allocation (Gaussian only; NaN otherwise).
  double psi = 0.0;
  Eigen::VectorXd limiting_allocation;
};

ScenarioContext prepare_context(const Scenario& scenario);

/// Deterministic 64-bit mix of (base seed, stream index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

struct EstimatorOutcome {
  EstimatorKind kind = EstimatorKind::kIpw;
  bool ok = false;
  double estimate = 0.0;
  double error = 0.0;  // truth - estimate
  double variance = 0.0;
  Interval ci;
  bool covered = false;
  std::string failure;
  Eigen::VectorXd scores;
  std::optional<MdsDiagnostics> diagnostics;
};

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::vector<EstimatorOutcome> outcomes;
  std::vector<KernelHyperparameters> outcome_hyperparameters;  // last adaptive f snapshot
  std::vector<KernelHyperparameters> propensity_hyperparameters;  // last adaptive g snapshot
  std::size_t outcome_bound_exceedances = 0;
  std::vector<int> actions;
};

/// Simulates the logged data of one trial.
History simulate_trial_data(const Scenario& scenario, const ScenarioContext& ctx, Rng& rng,
                            std::size_t* bound_exceedances = nullptr);

/// One adaptive experiment evaluated by every estimator of the scenario; determined by
/// (scenario.seed, index).
TrialResult run_trial(const Scenario& scenario, const ScenarioContext& ctx, std::size_t index);

/// All trials, spread over `jobs` worker threads. Output order is by trial index.
std::vector<TrialResult> run_trials(const Scenario& scenario, const ScenarioContext& ctx,
                                    unsigned jobs = 1);

struct MetricsRow {
  std::string scenario;
  std::string logger;
  std::size_t periods = 0;
  std::string estimator;
  double rmse = 0.0;
  double sd = 0.0;
  double cr = 0.0;
  std::size_t n_trials = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct ErrorSummary {
  double rmse = 0.0;
  double sd = 0.0;  // population standard deviation of squared errors
  double cr = 0.0;
};

/// rmse = sqrt(mean e^2), sd = std of e^2, cr = covered fraction. Throws on empty input.
ErrorSummary summarize_errors(const std::vector<double>& errors, const std::vector<bool>& covered);

/// One row per estimator, in the scenario's estimator order.
std::vector<MetricsRow> aggregate(const Scenario& scenario, const std::vector<TrialResult>& trials);

/// Gaussian kernel density estimate on `grid`.
std::vector<double> kde_curve(const std::vector<double>& errors, double bandwidth,
                              const std::vector<double>& grid);

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^{-1/5}, with a positive fallback.
double silverman_bandwidth(const std::vector<double>& errors);

struct ScenarioRun {
  Scenario scenario;
  ScenarioContext context;
  std::vector<TrialResult> trials;
  std::vector<MetricsRow> metrics;
};

ScenarioRun run_scenario(const Scenario& scenario, unsigned jobs = 1);

/// Writes metrics.csv, errors.csv, kde.csv and meta.json into `dir`.
/// `config_echo` is a JSON document (serialized) copied into meta.json.
void export_results(const std::vector<ScenarioRun>& runs, const std::filesystem::path& dir,
                    const std::string& config_echo = "{}");

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace aope

#endif  // ADAPTIVE_OPE_HARNESS_HPP
