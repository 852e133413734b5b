#ifndef ADAPTIVE_OPE_NUISANCE_HPP
#define ADAPTIVE_OPE_NUISANCE_HPP

#include "adaptive_ope/core.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace aope {

enum class RefitCadence { kDoubling, kEveryPeriod };

struct NuisanceConfig {
  RefitCadence cadence = RefitCadence::kDoubling;
  std::size_t first_refit = 10;
  double epsilon = 0.01;
  std::vector<double> lambda_grid{0.01, 0.1, 1.0};
  std::vector<double> gamma_grid{0.01, 0.1, 1.0};
  double holdout_fraction = 0.2;
  // Used when a holdout split is impossible (too few samples).
  double default_lambda = 1.0;
  double default_gamma = 0.1;
  double outcome_clamp = 1e6;
  // Kernel ridge shrinks toward the per-action outcome mean instead of toward zero.
  bool center_outcomes = true;
  bool cross_fit = false;
};

struct KernelHyperparameters {
  double lambda = 0.0;
  double gamma = 0.0;
  bool selected_by_holdout = false;
};

struct FitInfo {
  std::size_t training_size = 0;
  // One entry per action for outcome models; a single entry for propensity models.
  std::vector<KernelHyperparameters> hyperparameters;
};

/// f(a, x) for every action, clamped to [-clamp, clamp].
class OutcomeModel {
 public:
  using Predictor = std::function<Eigen::VectorXd(const Covariate&)>;

  OutcomeModel(int num_actions, Predictor predictor,
               double clamp = std::numeric_limits<double>::infinity(), FitInfo info = {});

  static OutcomeModel constant(const Eigen::Ref<const Eigen::VectorXd>& values);
  static OutcomeModel zero(int num_actions);

  Eigen::VectorXd predict(const Covariate& x) const;
  double predict(ActionIndex a, const Covariate& x) const;

  int num_actions() const { return num_actions_; }
  double clamp() const { return clamp_; }
  const FitInfo& info() const { return info_; }

 private:
  int num_actions_;
  Predictor predictor_;
  double clamp_;
  FitInfo info_;
};

/// g(a | x) with every output lifted to at least epsilon. No renormalization after the lift.
class PropensityModel {
 public:
  using Predictor = std::function<Eigen::VectorXd(const Covariate&)>;

  PropensityModel(int num_actions, Predictor predictor, double epsilon, FitInfo info = {});

  static PropensityModel constant(const Eigen::Ref<const Eigen::VectorXd>& probs,
                                  double epsilon);
  static PropensityModel uniform(int num_actions, double epsilon);

  Eigen::VectorXd unclipped(const Covariate& x) const { return predictor_(x); }
  Eigen::VectorXd probabilities(const Covariate& x) const;

  int num_actions() const { return num_actions_; }
  double epsilon() const { return epsilon_; }
  const FitInfo& info() const { return info_; }

 private:
  int num_actions_;
  Predictor predictor_;
  double epsilon_;
  FitInfo info_;
};

using OutcomeSnapshot = std::shared_ptr<const OutcomeModel>;
using PropensitySnapshot = std::shared_ptr<const PropensityModel>;

/// Per-period nuisance snapshots. Entry t-1 is the model used at period t and is
/// trained on the first t-1 samples at most.
struct NuisanceSequence {
  std::vector<OutcomeSnapshot> f;
  std::vector<PropensitySnapshot> g;

  std::size_t periods() const { return std::max(f.size(), g.size()); }
};

/// Entrywise mean of logged probability vectors, lifted to epsilon.
PropensityModel running_average_propensity(std::span<const ProbabilityVector> prefix,
                                           double epsilon);

/// Running averages over the logged policies: entry t-1 averages periods 1..t.
std::vector<PropensitySnapshot> running_average_sequence(const History& history,
                                                         double epsilon);

/// Per-action Gaussian-kernel ridge with fixed hyperparameters.
OutcomeModel fit_outcome_model(const History& history, double lambda, double gamma,
                               double clamp = std::numeric_limits<double>::infinity(),
                               bool center = false);

/// Per-action kernel ridge with hyperparameters picked by chronological holdout.
OutcomeModel fit_outcome_model(const History& history, const NuisanceConfig& config);

/// Multiclass kernel logistic regression of A on X with fixed hyperparameters.
PropensityModel fit_propensity_model(const History& history, double lambda, double gamma,
                                     double epsilon);

PropensityModel fit_propensity_model(const History& history, const NuisanceConfig& config);

/// Prefix lengths at which snapshots are refit, all in [1, T-1].
std::vector<std::size_t> refit_points(std::size_t periods, const NuisanceConfig& config);

/// Adaptive-fitting outcome snapshots f_0, ..., f_{T-1}. Before the first refit the zero model
/// is used.
std::vector<OutcomeSnapshot> fit_outcome_sequence(const History& history,
                                                  const NuisanceConfig& config);

/// Adaptive-fitting propensity snapshots g_0, ..., g_{T-1}. Before the first refit the uniform
/// model is used.
std::vector<PropensitySnapshot> fit_propensity_sequence(const History& history,
                                                        const NuisanceConfig& config);

/// Full-sample models bound to every period. With cross_fit, periods in one half use the model
/// trained on the other half.
std::vector<OutcomeSnapshot> fit_full_outcome(const History& history,
                                              const NuisanceConfig& config);
std::vector<PropensitySnapshot> fit_full_propensity(const History& history,
                                                    const NuisanceConfig& config);

/// ceil(T^{1/3}).
std::size_t freeze_index(std::int64_t periods);

/// Snapshot at period t is f_{t-1} for t <= u and f_u afterwards. g is untouched.
/// Requires 1 <= u <= T.
NuisanceSequence frozen_outcome_sequence(const NuisanceSequence& seq, std::size_t u);

}  // namespace aope

#endif  // ADAPTIVE_OPE_NUISANCE_HPP
