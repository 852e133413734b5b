#include "adaptive_ope/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace aope {

namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view name, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 2> kDgpNames = {"gaussian", "softmax"};
constexpr std::array<std::string_view, 4> kLoggerNames = {"neyman", "linucb", "lints", "fixed"};
constexpr std::array<std::string_view, 2> kModeNames = {"fitted", "oracle"};

}  // namespace

std::string_view to_string(DgpKind kind) { return kDgpNames[static_cast<std::size_t>(kind)]; }
std::string_view to_string(LoggerKind kind) { return kLoggerNames[static_cast<std::size_t>(kind)]; }
std::string_view to_string(NuisanceMode mode) { return kModeNames[static_cast<std::size_t>(mode)]; }

std::optional<DgpKind> parse_dgp_kind(std::string_view name) {
  return parse_enum<DgpKind>(name, kDgpNames);
}
std::optional<LoggerKind> parse_logger_kind(std::string_view name) {
  return parse_enum<LoggerKind>(name, kLoggerNames);
}
std::optional<NuisanceMode> parse_nuisance_mode(std::string_view name) {
  return parse_enum<NuisanceMode>(name, kModeNames);
}

Scenario preset_scenario(std::string_view name) {
  Scenario s;
  s.name = std::string(name);
  if (name == "gaussian-neyman") {
    s.dgp = DgpKind::kGaussian;
    s.logger = LoggerKind::kNeyman;
    for (auto k : {EstimatorKind::kDm, EstimatorKind::kEipw, EstimatorKind::kAdr,
                   EstimatorKind::kMadr, EstimatorKind::kA3ipw, EstimatorKind::kMa3ipw}) {
      s.estimators.push_back(EstimatorSpec::standard(k));
    }
    return s;
  }
  if (name == "bandit-linucb" || name == "bandit-lints") {
    s.dgp = DgpKind::kSoftmax;
    s.logger = name == "bandit-linucb" ? LoggerKind::kLinUcb : LoggerKind::kLinTs;
    s.outcome_bound = 1.0;
    s.nuisance.outcome_clamp = 1.0;
    for (auto k : kAllEstimators) s.estimators.push_back(EstimatorSpec::standard(k));
    return s;
  }
  if (name == "custom") {
    for (auto k : kAllEstimators) s.estimators.push_back(EstimatorSpec::standard(k));
    return s;
  }
  throw ConfigurationError("unknown scenario '" + std::string(name) + "'");
}

void validate(const Scenario& s) {
  if (s.periods < 1) throw ConfigurationError("T must be >= 1");
  if (s.trials < 1) throw ConfigurationError("trial count must be >= 1");
  if (s.estimators.empty()) throw ConfigurationError("estimator list is empty");
  for (const auto& e : s.estimators) validate(e);
  if (s.logger == LoggerKind::kNeyman && s.dgp != DgpKind::kGaussian) {
    throw ConfigurationError("the Neyman logger needs the two-arm Gaussian DGP");
  }
  const int k = s.dgp == DgpKind::kGaussian ? GaussianTwoArmDGP::kNumActions
                                            : SoftmaxContextualDGP::kNumActions;
  if (s.logger == LoggerKind::kFixed && s.policy.fixed_probs.size() != 0) {
    if (s.policy.fixed_probs.size() != k || !is_probability_vector(s.policy.fixed_probs)) {
      throw ConfigurationError("fixed policy must be a probability vector over K actions");
    }
  }
  if (s.mode == NuisanceMode::kOracle &&
      (s.dgp != DgpKind::kGaussian ||
       (s.logger != LoggerKind::kFixed && s.logger != LoggerKind::kNeyman))) {
    throw ConfigurationError("oracle nuisances need the Gaussian DGP with a fixed or Neyman logger");
  }
  if (!(s.level > 0.0 && s.level < 1.0)) throw ConfigurationError("level must lie in (0, 1)");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over a combination of both inputs.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kScenarioStream = 0xC0FFEEULL;

Eigen::VectorXd fixed_probs(const Scenario& s, int k) {
  if (s.policy.fixed_probs.size() != 0) return s.policy.fixed_probs;
  return Eigen::VectorXd::Constant(k, 1.0 / k);
}

}  // namespace

ScenarioContext prepare_context(const Scenario& scenario) {
  validate(scenario);
  const std::uint64_t scenario_seed = derive_seed(scenario.seed, kScenarioStream);
  if (scenario.dgp == DgpKind::kGaussian) {
    ScenarioContext ctx{ate_weight(2), 0.0, GaussianTwoArmDGP{}, std::nullopt, scenario_seed,
                        std::numeric_limits<double>::quiet_NaN(), Eigen::VectorXd()};
    ctx.truth = true_value(ctx.gaussian, ctx.weight);
    if (scenario.logger == LoggerKind::kNeyman) {
      ctx.limiting_allocation = neyman_allocation(ctx.gaussian, ctx.weight);
    } else if (scenario.logger == LoggerKind::kFixed) {
      ctx.limiting_allocation = fixed_probs(scenario, 2);
    }
    if (ctx.limiting_allocation.size() == 2 && (ctx.limiting_allocation.array() > 0.0).all()) {
      ctx.psi = semiparametric_bound(ctx.gaussian, ctx.weight, ctx.limiting_allocation);
    }
    return ctx;
  }

  Rng rng(scenario_seed);
  auto dgp = SoftmaxContextualDGP::from_rng(rng);
  // Training set for the evaluation policy: covariates and latent winners.
  Eigen::MatrixXd x(static_cast<Eigen::Index>(scenario.train_size), SoftmaxContextualDGP::kDim);
  std::vector<int> winners;
  winners.reserve(scenario.train_size);
  for (std::size_t i = 0; i < scenario.train_size; ++i) {
    const auto po = dgp.draw(rng);
    x.row(static_cast<Eigen::Index>(i)) = po.x.transpose();
    int w = 0;
    po.y.maxCoeff(&w);
    winners.push_back(w);
  }
  EvaluationWeight weight = fit_evaluation_policy(x, winners, SoftmaxContextualDGP::kNumActions,
                                                  scenario.evaluation_l2);
  const double truth = true_value(dgp, weight, scenario.oracle_budget, rng);
  return ScenarioContext{std::move(weight), truth, GaussianTwoArmDGP{}, std::move(dgp),
                         scenario_seed, std::numeric_limits<double>::quiet_NaN(),
                         Eigen::VectorXd()};
}

History simulate_trial_data(const Scenario& scenario, const ScenarioContext& ctx, Rng& rng,
                            std::size_t* bound_exceedances) {
  const bool gaussian = scenario.dgp == DgpKind::kGaussian;
  const int k = gaussian ? GaussianTwoArmDGP::kNumActions : SoftmaxContextualDGP::kNumActions;
  const int dim = gaussian ? 0 : SoftmaxContextualDGP::kDim;

  NeymanRatioPolicy neyman(scenario.policy.neyman_forced_exploration);
  LinUcbPolicy ucb(k, dim, scenario.policy.ucb);
  LinTsPolicy ts(k, dim, scenario.policy.ts);
  const FixedPolicy fixed(fixed_probs(scenario, k));

  std::vector<Sample> samples;
  samples.reserve(scenario.periods);
  std::size_t exceed = 0;
  for (std::size_t t = 0; t < scenario.periods; ++t) {
    const PotentialOutcomes po = gaussian ? ctx.gaussian.draw(rng) : ctx.softmax->draw(rng);
    std::optional<PolicyDecision> decision;
    switch (scenario.logger) {
      case LoggerKind::kNeyman: decision = neyman.step(); break;
      case LoggerKind::kLinUcb: decision = ucb.step(po.x); break;
      case LoggerKind::kLinTs: decision = ts.step(po.x, rng); break;
      case LoggerKind::kFixed: decision = fixed.step(rng); break;
    }
    const ActionIndex a = decision->action;
    const double y = po.y[a.zero_based()];
    Sample s(po.x, a, y, decision->probs);
    if (std::abs(y) > scenario.outcome_bound) {
      if (!gaussian) check_outcome_bound(s, scenario.outcome_bound);
      ++exceed;
    }
    switch (scenario.logger) {
      case LoggerKind::kNeyman: neyman.update(a, y); break;
      case LoggerKind::kLinUcb: ucb.update(a, po.x, y); break;
      case LoggerKind::kLinTs: ts.update(a, po.x, y); break;
      case LoggerKind::kFixed: break;
    }
    samples.push_back(std::move(s));
  }
  if (bound_exceedances != nullptr) *bound_exceedances = exceed;
  return History(std::move(samples));
}

namespace {

NuisanceBundle build_bundle(const Scenario& scenario, const ScenarioContext& ctx,
                            const History& data) {
  const NuisanceNeeds needs = needs_of(scenario.estimators);
  const std::size_t periods = data.size();
  NuisanceBundle b;
  if (needs.g_running) b.g_running = running_average_sequence(data, scenario.nuisance.epsilon);

  if (scenario.mode == NuisanceMode::kOracle) {
    auto f = std::make_shared<const OutcomeModel>(OutcomeModel::constant(ctx.gaussian.means));
    auto g = std::make_shared<const PropensityModel>(
        PropensityModel::constant(ctx.limiting_allocation, scenario.nuisance.epsilon));
    b.f_adaptive.assign(periods, f);
    b.f_full.assign(periods, f);
    b.g_adaptive.assign(periods, g);
    b.g_full.assign(periods, g);
    return b;
  }
  if (needs.f_adaptive) b.f_adaptive = fit_outcome_sequence(data, scenario.nuisance);
  const bool frozen = std::any_of(scenario.estimators.begin(), scenario.estimators.end(),
                                  [](const EstimatorSpec& e) {
                                    return e.outcome == OutcomeSource::kFrozen;
                                  });
  const std::size_t u = freeze_index(static_cast<std::int64_t>(periods));
  if (frozen && u < periods) {
    b.f_frozen = std::make_shared<const OutcomeModel>(
        fit_outcome_model(data.prefix(u), scenario.nuisance));
  }
  if (needs.f_full) b.f_full = fit_full_outcome(data, scenario.nuisance);
  if (needs.g_adaptive) b.g_adaptive = fit_propensity_sequence(data, scenario.nuisance);
  if (needs.g_full) b.g_full = fit_full_propensity(data, scenario.nuisance);
  return b;
}

}  // namespace

TrialResult run_trial(const Scenario& scenario, const ScenarioContext& ctx, std::size_t index) {
  TrialResult result;
  result.index = index;
  result.seed = derive_seed(scenario.seed, index);
  Rng rng(result.seed);
  const History data =
      simulate_trial_data(scenario, ctx, rng, &result.outcome_bound_exceedances);
  result.actions.reserve(data.size());
  for (const auto& s : data) result.actions.push_back(s.a.value());

  const NuisanceBundle bundle = build_bundle(scenario, ctx, data);
  if (!bundle.f_adaptive.empty()) {
    result.outcome_hyperparameters = bundle.f_adaptive.back()->info().hyperparameters;
  }
  if (!bundle.g_adaptive.empty()) {
    result.propensity_hyperparameters = bundle.g_adaptive.back()->info().hyperparameters;
  }

  for (const auto& spec : scenario.estimators) {
    EstimatorOutcome out;
    out.kind = spec.kind;
    try {
      EstimateReport report = estimate(spec, data, ctx.weight, bundle, scenario.level);
      out.ok = true;
      out.estimate = report.estimate;
      out.error = ctx.truth - report.estimate;
      out.variance = report.variance;
      out.ci = report.ci;
      out.covered = report.ci.lo <= ctx.truth && ctx.truth <= report.ci.hi;
      if (std::isfinite(ctx.psi)) out.diagnostics = mds_diagnostics(report, ctx.truth, ctx.psi);
      out.scores = std::move(report.scores);
    } catch (const DeficientSupportError& e) {
      out.ok = false;
      out.failure = e.what();
    }
    result.outcomes.push_back(std::move(out));
  }
  return result;
}

std::vector<TrialResult> run_trials(const Scenario& scenario, const ScenarioContext& ctx,
                                    unsigned jobs) {
  std::vector<TrialResult> results(scenario.trials);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenario.trials)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < scenario.trials; ++i) results[i] = run_trial(scenario, ctx, i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < scenario.trials; i = next++) {
            results[i] = run_trial(scenario, ctx, i);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

ErrorSummary summarize_errors(const std::vector<double>& errors, const std::vector<bool>& covered) {
  if (errors.empty()) throw DomainError("cannot aggregate zero trials");
  if (errors.size() != covered.size()) throw DomainError("errors/coverage size mismatch");
  const auto n = static_cast<double>(errors.size());
  double mse = 0.0;
  for (double e : errors) mse += e * e;
  mse /= n;
  double var = 0.0;
  for (double e : errors) var += (e * e - mse) * (e * e - mse);
  var /= n;
  const auto hits = static_cast<double>(std::count(covered.begin(), covered.end(), true));
  return {std::sqrt(mse), std::sqrt(var), hits / n};
}

std::vector<MetricsRow> aggregate(const Scenario& scenario, const std::vector<TrialResult>& trials) {
  if (trials.empty()) throw DomainError("cannot aggregate zero trials");
  std::vector<MetricsRow> rows;
  for (std::size_t e = 0; e < scenario.estimators.size(); ++e) {
    std::vector<double> errors;
    std::vector<bool> covered;
    for (const auto& t : trials) {
      const auto& o = t.outcomes.at(e);
      if (!o.ok) continue;
      errors.push_back(o.error);
      covered.push_back(o.covered);
    }
    MetricsRow row{scenario.name, std::string(to_string(scenario.logger)), scenario.periods,
                   std::string(to_string(scenario.estimators[e].kind))};
    row.n_trials = errors.size();
    if (errors.empty()) {
      row.rmse = row.sd = row.cr = std::numeric_limits<double>::quiet_NaN();
    } else {
      const auto s = summarize_errors(errors, covered);
      row.rmse = s.rmse;
      row.sd = s.sd;
      row.cr = s.cr;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> kde_curve(const std::vector<double>& errors, double bandwidth,
                              const std::vector<double>& grid) {
  if (!(bandwidth > 0.0)) throw DomainError("KDE bandwidth must be positive");
  if (errors.empty()) throw DomainError("KDE needs at least one point");
  const double norm =
      1.0 / (static_cast<double>(errors.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    double s = 0.0;
    for (double e : errors) {
      const double u = (g - e) / bandwidth;
      s += std::exp(-0.5 * u * u);
    }
    out.push_back(norm * s);
  }
  return out;
}

double silverman_bandwidth(const std::vector<double>& errors) {
  if (errors.empty()) throw DomainError("bandwidth needs at least one point");
  const auto n = static_cast<double>(errors.size());
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= n;
  double var = 0.0;
  for (double e : errors) var += (e - mean) * (e - mean);
  const double sd = errors.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  const double h = 0.9 * spread * std::pow(n, -0.2);
  if (h > 0.0) return h;
  const double scale = std::max(std::abs(mean), 1.0);
  return 1e-3 * scale;
}

ScenarioRun run_scenario(const Scenario& scenario, unsigned jobs) {
  ScenarioContext ctx = prepare_context(scenario);
  auto trials = run_trials(scenario, ctx, jobs);
  auto metrics = aggregate(scenario, trials);
  return ScenarioRun{scenario, std::move(ctx), std::move(trials), std::move(metrics)};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

using nlohmann::json;

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

json hyper_json(const std::vector<KernelHyperparameters>& hs) {
  json arr = json::array();
  for (const auto& h : hs) {
    arr.push_back({{"lambda", h.lambda}, {"gamma", h.gamma}, {"selected_by_holdout", h.selected_by_holdout}});
  }
  return arr;
}

json nuisance_json(const NuisanceConfig& c) {
  return {{"refit", c.cadence == RefitCadence::kDoubling ? "doubling" : "every"},
          {"first_refit", c.first_refit},
          {"epsilon", c.epsilon},
          {"lambda_grid", c.lambda_grid},
          {"gamma_grid", c.gamma_grid},
          {"holdout_fraction", c.holdout_fraction},
          {"default_lambda", c.default_lambda},
          {"default_gamma", c.default_gamma},
          {"outcome_clamp", c.outcome_clamp},
          {"center_outcomes", c.center_outcomes},
          {"cross_fit", c.cross_fit}};
}

}  // namespace

void export_results(const std::vector<ScenarioRun>& runs, const std::filesystem::path& dir,
                    const std::string& config_echo) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());

  const auto metrics_path = dir / "metrics.csv";
  auto metrics = open_for_write(metrics_path);
  metrics << "scenario,logger,T,estimator,rmse,sd,cr,n_trials\n";
  for (const auto& run : runs) {
    for (const auto& r : run.metrics) {
      metrics << r.scenario << ',' << r.logger << ',' << r.periods << ',' << r.estimator << ','
              << format_double(r.rmse) << ',' << format_double(r.sd) << ','
              << format_double(r.cr) << ',' << r.n_trials << '\n';
    }
  }
  check_written(metrics, metrics_path);

  const auto errors_path = dir / "errors.csv";
  auto errors = open_for_write(errors_path);
  errors << "scenario,logger,T,estimator,trial,error,covered\n";
  for (const auto& run : runs) {
    const auto& s = run.scenario;
    for (const auto& t : run.trials) {
      for (const auto& o : t.outcomes) {
        errors << s.name << ',' << to_string(s.logger) << ',' << s.periods << ','
               << to_string(o.kind) << ',' << t.index << ',';
        if (o.ok) {
          errors << format_double(o.error) << ',' << (o.covered ? 1 : 0) << '\n';
        } else {
          errors << ",failed\n";
        }
      }
    }
  }
  check_written(errors, errors_path);

  const auto kde_path = dir / "kde.csv";
  auto kde = open_for_write(kde_path);
  kde << "scenario,logger,T,estimator,bandwidth,x,density\n";
  for (const auto& run : runs) {
    const auto& s = run.scenario;
    for (std::size_t e = 0; e < s.estimators.size(); ++e) {
      std::vector<double> errs;
      for (const auto& t : run.trials) {
        if (t.outcomes[e].ok) errs.push_back(t.outcomes[e].error);
      }
      if (errs.empty()) continue;
      const double h = silverman_bandwidth(errs);
      const auto [mn, mx] = std::minmax_element(errs.begin(), errs.end());
      constexpr int kGridPoints = 101;
      std::vector<double> grid(kGridPoints);
      const double lo = *mn - 3.0 * h;
      const double hi = *mx + 3.0 * h;
      for (int i = 0; i < kGridPoints; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (kGridPoints - 1);
      const auto dens = kde_curve(errs, h, grid);
      for (int i = 0; i < kGridPoints; ++i) {
        kde << s.name << ',' << to_string(s.logger) << ',' << s.periods << ','
            << to_string(s.estimators[e].kind) << ',' << format_double(h) << ','
            << format_double(grid[static_cast<std::size_t>(i)]) << ','
            << format_double(dens[static_cast<std::size_t>(i)]) << '\n';
      }
    }
  }
  check_written(kde, kde_path);

  json meta;
  meta["config"] = json::parse(config_echo, nullptr, false);
  if (meta["config"].is_discarded()) meta["config"] = config_echo;
  meta["scenarios"] = json::array();
  for (const auto& run : runs) {
    const auto& s = run.scenario;
    json js;
    js["scenario"] = s.name;
    js["dgp"] = to_string(s.dgp);
    js["logger"] = to_string(s.logger);
    js["T"] = s.periods;
    js["trials"] = s.trials;
    js["base_seed"] = s.seed;
    js["scenario_seed"] = run.context.scenario_seed;
    js["nuisance_mode"] = to_string(s.mode);
    js["nuisance"] = nuisance_json(s.nuisance);
    js["truth"] = run.context.truth;
    js["level"] = s.level;
    json estimators = json::array();
    for (const auto& e : s.estimators) estimators.push_back(to_string(e.kind));
    js["estimators"] = estimators;
    if (run.context.softmax) {
      std::vector<double> w(run.context.softmax->signs().data(),
                            run.context.softmax->signs().data() + run.context.softmax->signs().size());
      js["sign_vector"] = w;
      js["oracle_budget"] = s.oracle_budget;
      js["train_size"] = s.train_size;
    }
    if (std::isfinite(run.context.psi)) js["psi"] = run.context.psi;
    if (s.logger == LoggerKind::kNeyman) {
      js["policy"] = {{"forced_exploration", s.policy.neyman_forced_exploration}};
    } else if (s.logger == LoggerKind::kLinUcb) {
      js["policy"] = {{"ridge", s.policy.ucb.ridge}, {"alpha", s.policy.ucb.alpha}};
    } else if (s.logger == LoggerKind::kLinTs) {
      js["policy"] = {{"ridge", s.policy.ts.ridge}, {"variance", s.policy.ts.variance}};
    }
    json trials = json::array();
    for (const auto& t : run.trials) {
      json jt;
      jt["trial"] = t.index;
      jt["seed"] = t.seed;
      jt["outcome_hyperparameters"] = hyper_json(t.outcome_hyperparameters);
      jt["propensity_hyperparameters"] = hyper_json(t.propensity_hyperparameters);
      jt["outcome_bound_exceedances"] = t.outcome_bound_exceedances;
      json diag = json::object();
      json failures = json::object();
      for (const auto& o : t.outcomes) {
        if (!o.ok) failures[std::string(to_string(o.kind))] = o.failure;
        if (!o.diagnostics) continue;
        const auto& d = *o.diagnostics;
        diag[std::string(to_string(o.kind))] = {
            {"second_moment", d.second_moment},
            {"second_moment_minus_psi", d.second_moment_minus_psi},
            {"max_abs_score", d.max_abs_score},
            {"centered_running_mean", d.centered_running_mean},
            {"max_abs_running_mean", d.max_abs_running_mean}};
      }
      if (!diag.empty()) jt["mds_diagnostics"] = diag;
      if (!failures.empty()) jt["failures"] = failures;
      trials.push_back(std::move(jt));
    }
    js["trial_records"] = std::move(trials);
    meta["scenarios"].push_back(std::move(js));
  }
  const auto meta_path = dir / "meta.json";
  auto meta_out = open_for_write(meta_path);
  meta_out << meta.dump(2) << '\n';
  check_written(meta_out, meta_path);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "scenario,logger,T,estimator,rmse,sd,cr,n_trials") {
    throw std::runtime_error("unexpected metrics.csv header in '" + path.string() + "'");
  }
  auto parse_num = [](const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
  };
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error("malformed metrics row: " + line);
    rows.push_back({f[0], f[1], static_cast<std::size_t>(std::stoull(f[2])), f[3], parse_num(f[4]),
                    parse_num(f[5]), parse_num(f[6]), static_cast<std::size_t>(std::stoull(f[7]))});
  }
  return rows;
}

}  // namespace aope
