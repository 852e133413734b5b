#include "adaptive_ope/nuisance.hpp"

#include "adaptive_ope/kernels.hpp"

#include <cmath>
#include <map>

namespace aope {

OutcomeModel::OutcomeModel(int num_actions, Predictor predictor, double clamp, FitInfo info)
    : num_actions_(num_actions), predictor_(std::move(predictor)), clamp_(clamp),
      info_(std::move(info)) {
  if (!predictor_) throw ConfigurationError("outcome predictor is empty");
  if (!(clamp_ > 0.0)) throw ConfigurationError("outcome clamp must be positive");
}

OutcomeModel OutcomeModel::constant(const Eigen::Ref<const Eigen::VectorXd>& values) {
  Eigen::VectorXd copy = values;
  return OutcomeModel(static_cast<int>(copy.size()),
                      [copy](const Covariate&) { return copy; });
}

OutcomeModel OutcomeModel::zero(int num_actions) {
  return constant(Eigen::VectorXd::Zero(num_actions));
}

Eigen::VectorXd OutcomeModel::predict(const Covariate& x) const {
  Eigen::VectorXd out = predictor_(x);
  if (std::isfinite(clamp_)) out = out.cwiseMax(-clamp_).cwiseMin(clamp_);
  return out;
}

double OutcomeModel::predict(ActionIndex a, const Covariate& x) const {
  return predict(x)[a.zero_based()];
}

PropensityModel::PropensityModel(int num_actions, Predictor predictor, double epsilon,
                                 FitInfo info)
    : num_actions_(num_actions), predictor_(std::move(predictor)), epsilon_(epsilon),
      info_(std::move(info)) {
  if (!predictor_) throw ConfigurationError("propensity predictor is empty");
  if (!(epsilon_ > 0.0) || epsilon_ > 1.0) {
    throw ConfigurationError("propensity floor must lie in (0, 1]");
  }
}

PropensityModel PropensityModel::constant(const Eigen::Ref<const Eigen::VectorXd>& probs,
                                          double epsilon) {
  Eigen::VectorXd copy = probs;
  return PropensityModel(static_cast<int>(copy.size()),
                         [copy](const Covariate&) { return copy; }, epsilon);
}

PropensityModel PropensityModel::uniform(int num_actions, double epsilon) {
  return constant(Eigen::VectorXd::Constant(num_actions, 1.0 / num_actions), epsilon);
}

Eigen::VectorXd PropensityModel::probabilities(const Covariate& x) const {
  return predictor_(x).cwiseMax(epsilon_);
}

PropensityModel running_average_propensity(std::span<const ProbabilityVector> prefix,
                                           double epsilon) {
  if (prefix.empty()) throw DomainError("running average needs a non-empty prefix");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(prefix.front().size());
  for (const auto& p : prefix) {
    if (p.size() != sum.size()) throw DomainError("probability vectors differ in length");
    sum += p;
  }
  return PropensityModel::constant(sum / static_cast<double>(prefix.size()), epsilon);
}

std::vector<PropensitySnapshot> running_average_sequence(const History& history,
                                                         double epsilon) {
  std::vector<PropensitySnapshot> out;
  out.reserve(history.size());
  if (history.empty()) return out;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(history[0].num_actions());
  for (std::size_t t = 0; t < history.size(); ++t) {
    const auto& logged = history[t].logged_policy;
    if (!logged) {
      throw ConfigurationError("running average requires logged policies on every sample");
    }
    sum += *logged;
    out.push_back(std::make_shared<const PropensityModel>(
        PropensityModel::constant(sum / static_cast<double>(t + 1), epsilon)));
  }
  return out;
}

namespace {

Eigen::MatrixXd covariate_rows(const History& history, const std::vector<std::size_t>& idx) {
  const Eigen::Index d = history.empty() ? 0 : history[0].x.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), d);
  for (std::size_t i = 0; i < idx.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = history[idx[i]].x.transpose();
  return x;
}

Eigen::VectorXd outcomes(const History& history, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) y[static_cast<Eigen::Index>(i)] = history[idx[i]].y;
  return y;
}

std::vector<int> labels(const History& history, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(history[i].a.zero_based());
  return out;
}

int num_actions_of(const History& history) {
  if (history.empty()) throw DomainError("cannot fit a nuisance model on an empty history");
  return history[0].num_actions();
}

std::size_t covariate_dim(const History& history) {
  return history.empty() ? 0 : static_cast<std::size_t>(history[0].x.size());
}

std::vector<double> effective_gamma_grid(const History& history, const NuisanceConfig& config) {
  // The kernel is identically one without covariates, so the bandwidth is irrelevant.
  if (covariate_dim(history) == 0) return {config.default_gamma};
  return config.gamma_grid;
}

std::size_t holdout_split(std::size_t n, double holdout_fraction) {
  const auto validate = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * holdout_fraction));
  return n - validate;
}

using Ridge = KernelRidge<double>;
using Logit = KernelLogistic<double>;

OutcomeModel assemble_outcome(int k, std::vector<std::shared_ptr<const Ridge>> fits,
                              double clamp, FitInfo info) {
  auto predictor = [fits = std::move(fits), k](const Covariate& x) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
    for (int a = 0; a < k; ++a) {
      if (fits[static_cast<std::size_t>(a)]) out[a] = fits[static_cast<std::size_t>(a)]->predict(x);
    }
    return out;
  };
  return OutcomeModel(k, std::move(predictor), clamp, std::move(info));
}

std::vector<std::vector<std::size_t>> indices_by_action(const History& history,
                                                        std::size_t begin, std::size_t end,
                                                        int k) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
  for (std::size_t i = begin; i < end; ++i) {
    out[static_cast<std::size_t>(history[i].a.zero_based())].push_back(i);
  }
  return out;
}

}  // namespace

OutcomeModel fit_outcome_model(const History& history, double lambda, double gamma,
                               double clamp, bool center) {
  const int k = num_actions_of(history);
  const auto by_action = indices_by_action(history, 0, history.size(), k);
  std::vector<std::shared_ptr<const Ridge>> fits(static_cast<std::size_t>(k));
  FitInfo info{history.size(), {}};
  for (int a = 0; a < k; ++a) {
    const auto& idx = by_action[static_cast<std::size_t>(a)];
    info.hyperparameters.push_back({lambda, gamma, false});
    if (idx.empty()) continue;
    fits[static_cast<std::size_t>(a)] = std::make_shared<const Ridge>(
        covariate_rows(history, idx), outcomes(history, idx), lambda, gamma, center);
  }
  return assemble_outcome(k, std::move(fits), clamp, std::move(info));
}

OutcomeModel fit_outcome_model(const History& history, const NuisanceConfig& config) {
  const int k = num_actions_of(history);
  const std::size_t n = history.size();
  const std::size_t split = holdout_split(n, config.holdout_fraction);
  const auto train = indices_by_action(history, 0, split, k);
  const auto valid = indices_by_action(history, split, n, k);
  const auto full = indices_by_action(history, 0, n, k);
  const auto gammas = effective_gamma_grid(history, config);

  std::vector<std::shared_ptr<const Ridge>> fits(static_cast<std::size_t>(k));
  FitInfo info{n, {}};
  for (int a = 0; a < k; ++a) {
    const auto ai = static_cast<std::size_t>(a);
    KernelHyperparameters chosen{config.default_lambda, config.default_gamma, false};
    if (!train[ai].empty() && !valid[ai].empty()) {
      const Eigen::MatrixXd xt = covariate_rows(history, train[ai]);
      const Eigen::VectorXd yt = outcomes(history, train[ai]);
      const Eigen::MatrixXd xv = covariate_rows(history, valid[ai]);
      const Eigen::VectorXd yv = outcomes(history, valid[ai]);
      double best = std::numeric_limits<double>::infinity();
      for (double lambda : config.lambda_grid) {
        for (double gamma : gammas) {
          const Ridge fit(xt, yt, lambda, gamma, config.center_outcomes);
          const Eigen::VectorXd pred =
              fit.predict_rows(xv).cwiseMax(-config.outcome_clamp).cwiseMin(config.outcome_clamp);
          const double mse = (pred - yv).squaredNorm() / static_cast<double>(yv.size());
          if (mse < best) {
            best = mse;
            chosen = {lambda, gamma, true};
          }
        }
      }
    }
    info.hyperparameters.push_back(chosen);
    if (full[ai].empty()) continue;
    fits[ai] = std::make_shared<const Ridge>(covariate_rows(history, full[ai]),
                                             outcomes(history, full[ai]), chosen.lambda,
                                             chosen.gamma, config.center_outcomes);
  }
  return assemble_outcome(k, std::move(fits), config.outcome_clamp, std::move(info));
}

namespace {

PropensityModel assemble_propensity(int k, std::shared_ptr<const Logit> fit, double epsilon,
                                    FitInfo info) {
  auto predictor = [fit = std::move(fit)](const Covariate& x) { return fit->probabilities(x); };
  return PropensityModel(k, std::move(predictor), epsilon, std::move(info));
}

std::vector<std::size_t> iota_indices(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(i);
  return out;
}

}  // namespace

PropensityModel fit_propensity_model(const History& history, double lambda, double gamma,
                                     double epsilon) {
  const int k = num_actions_of(history);
  const auto idx = iota_indices(0, history.size());
  auto fit = std::make_shared<const Logit>(covariate_rows(history, idx), labels(history, idx), k,
                                           lambda, gamma);
  FitInfo info{history.size(), {{lambda, gamma, false}}};
  return assemble_propensity(k, std::move(fit), epsilon, std::move(info));
}

PropensityModel fit_propensity_model(const History& history, const NuisanceConfig& config) {
  const int k = num_actions_of(history);
  const std::size_t n = history.size();
  const std::size_t split = holdout_split(n, config.holdout_fraction);
  KernelHyperparameters chosen{config.default_lambda, config.default_gamma, false};
  if (split >= 1 && split < n) {
    const auto ti = iota_indices(0, split);
    const auto vi = iota_indices(split, n);
    const Eigen::MatrixXd xt = covariate_rows(history, ti);
    const auto yt = labels(history, ti);
    const Eigen::MatrixXd xv = covariate_rows(history, vi);
    const auto yv = labels(history, vi);
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : config.lambda_grid) {
      for (double gamma : effective_gamma_grid(history, config)) {
        const Logit fit(xt, yt, k, lambda, gamma);
        const Eigen::MatrixXd p = fit.probabilities_rows(xv);
        double loss = 0.0;
        for (std::size_t i = 0; i < yv.size(); ++i) {
          loss -= std::log(std::max(p(static_cast<Eigen::Index>(i), yv[i]), 1e-300));
        }
        loss /= static_cast<double>(yv.size());
        if (loss < best) {
          best = loss;
          chosen = {lambda, gamma, true};
        }
      }
    }
  }
  PropensityModel model = fit_propensity_model(history, chosen.lambda, chosen.gamma,
                                               config.epsilon);
  FitInfo info{n, {chosen}};
  auto raw = [model](const Covariate& x) { return model.unclipped(x); };
  return PropensityModel(k, std::move(raw), config.epsilon, std::move(info));
}

std::vector<std::size_t> refit_points(std::size_t periods, const NuisanceConfig& config) {
  std::vector<std::size_t> out;
  if (periods < 2) return out;
  if (config.cadence == RefitCadence::kEveryPeriod) {
    for (std::size_t k = 1; k < periods; ++k) out.push_back(k);
    return out;
  }
  if (config.first_refit == 0) throw ConfigurationError("first refit must be >= 1");
  for (std::size_t k = config.first_refit; k < periods; k *= 2) out.push_back(k);
  return out;
}

namespace {

template <typename Snapshot, typename Fit, typename Initial>
std::vector<Snapshot> adaptive_sequence(const History& history, const NuisanceConfig& config,
                                        Fit fit, Initial initial) {
  const std::size_t periods = history.size();
  std::vector<Snapshot> out(periods);
  const auto points = refit_points(periods, config);
  Snapshot current = initial;
  std::size_t next = 0;
  for (std::size_t k = 0; k < periods; ++k) {
    // Snapshot k may only see the first k samples.
    if (next < points.size() && points[next] == k) {
      current = fit(history.prefix(k));
      ++next;
    }
    out[k] = current;
  }
  return out;
}

}  // namespace

std::vector<OutcomeSnapshot> fit_outcome_sequence(const History& history,
                                                  const NuisanceConfig& config) {
  if (history.empty()) return {};
  const int k = num_actions_of(history);
  return adaptive_sequence<OutcomeSnapshot>(
      history, config,
      [&](const History& prefix) {
        return std::make_shared<const OutcomeModel>(fit_outcome_model(prefix, config));
      },
      std::make_shared<const OutcomeModel>(OutcomeModel::zero(k)));
}

std::vector<PropensitySnapshot> fit_propensity_sequence(const History& history,
                                                        const NuisanceConfig& config) {
  if (history.empty()) return {};
  const int k = num_actions_of(history);
  return adaptive_sequence<PropensitySnapshot>(
      history, config,
      [&](const History& prefix) {
        return std::make_shared<const PropensityModel>(fit_propensity_model(prefix, config));
      },
      std::make_shared<const PropensityModel>(PropensityModel::uniform(k, config.epsilon)));
}

namespace {

template <typename Snapshot, typename Fit>
std::vector<Snapshot> full_sequence(const History& history, const NuisanceConfig& config,
                                    Fit fit) {
  const std::size_t n = history.size();
  if (n == 0) return {};
  if (!config.cross_fit || n < 2) return std::vector<Snapshot>(n, fit(history));
  const std::size_t half = n / 2;
  History first(std::vector<Sample>(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(half)));
  History second(std::vector<Sample>(history.begin() + static_cast<std::ptrdiff_t>(half), history.end()));
  const Snapshot from_first = fit(first);
  const Snapshot from_second = fit(second);
  std::vector<Snapshot> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = t < half ? from_second : from_first;
  return out;
}

}  // namespace

std::vector<OutcomeSnapshot> fit_full_outcome(const History& history,
                                              const NuisanceConfig& config) {
  return full_sequence<OutcomeSnapshot>(history, config, [&](const History& h) {
    return std::make_shared<const OutcomeModel>(fit_outcome_model(h, config));
  });
}

std::vector<PropensitySnapshot> fit_full_propensity(const History& history,
                                                    const NuisanceConfig& config) {
  return full_sequence<PropensitySnapshot>(history, config, [&](const History& h) {
    return std::make_shared<const PropensityModel>(fit_propensity_model(h, config));
  });
}

std::size_t freeze_index(std::int64_t periods) {
  if (periods < 1) throw DomainError("freeze index needs T >= 1");
  auto u = static_cast<std::int64_t>(std::llround(std::cbrt(static_cast<double>(periods))));
  while (u * u * u < periods) ++u;
  while (u > 1 && (u - 1) * (u - 1) * (u - 1) >= periods) --u;
  return static_cast<std::size_t>(u);
}

NuisanceSequence frozen_outcome_sequence(const NuisanceSequence& seq, std::size_t u) {
  const std::size_t periods = seq.f.size();
  if (u < 1 || u > periods) {
    throw DomainError("freeze index " + std::to_string(u) + " outside [1, " +
                      std::to_string(periods) + "]");
  }
  NuisanceSequence out;
  out.g = seq.g;
  out.f.reserve(periods);
  for (std::size_t t = 1; t <= periods; ++t) out.f.push_back(t <= u ? seq.f[t - 1] : seq.f[u]);
  return out;
}

}  // namespace aope
