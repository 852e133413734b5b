#ifndef ADAPTIVE_OPE_POLICIES_HPP
#define ADAPTIVE_OPE_POLICIES_HPP

#include "adaptive_ope/core.hpp"

#include <vector>

namespace aope {

struct PolicyDecision {
  ActionIndex action;
  ProbabilityVector probs;
};

// --- Neyman ratio keeping (two arms, no covariates) ------------------------------------------

/// pi*(1) = sd(1) / (sd(1) + sd(2)) from unbiased empirical variances in `history`.
/// Returns (0.5, 0.5) while either arm has fewer than two samples.
Eigen::Vector2d neyman_target(const History& history);

/// Target from given arm variances.
Eigen::Vector2d neyman_target_from_variances(double var1, double var2);

/// Deterministic ratio-keeping rule: arm 1 iff pulls_arm1 / decisions <= target1.
/// With no prior decisions arm 1 is chosen.
PolicyDecision neyman_rule(std::size_t pulls_arm1, std::size_t decisions, double target1);

class NeymanRatioPolicy {
 public:
  static constexpr std::size_t kWarmupPulls = 2;

  /// With forced exploration an arm whose count is below sqrt(n) - 1 is pulled first, so a tiny
  /// early variance estimate cannot starve it. The limiting ratio is unchanged.
  explicit NeymanRatioPolicy(bool forced_exploration = true)
      : forced_exploration_(forced_exploration) {}

  /// Next decision from the running statistics. During warmup the arm with fewer pulls is
  /// chosen (arm 1 on ties).
  PolicyDecision step() const;
  void update(ActionIndex a, double y);

  Eigen::Vector2d target() const;
  std::size_t pulls(int arm) const { return counts_[static_cast<std::size_t>(arm - 1)]; }
  std::size_t decisions() const { return counts_[0] + counts_[1]; }
  bool forced_exploration() const { return forced_exploration_; }

 private:
  bool forced_exploration_ = true;
  std::size_t counts_[2] = {0, 0};
  double sums_[2] = {0.0, 0.0};
  double sum_squares_[2] = {0.0, 0.0};
};

PolicyDecision neyman_step(const NeymanRatioPolicy& policy);

// --- Linear contextual bandits ---------------------------------------------------------------

/// Per-arm ridge statistics A_a = lambda I + sum x~ x~^T and b_a = sum y x~, x~ = (x, 1).
class LinearArmStatistics {
 public:
  LinearArmStatistics(int num_actions, int dim, double ridge);

  void update(ActionIndex a, const Covariate& x, double y);

  Eigen::VectorXd augment(const Covariate& x) const;
  Eigen::VectorXd theta(int arm0) const;
  const Eigen::MatrixXd& gram(int arm0) const { return gram_[static_cast<std::size_t>(arm0)]; }
  const Eigen::VectorXd& response(int arm0) const {
    return response_[static_cast<std::size_t>(arm0)];
  }
  Eigen::LLT<Eigen::MatrixXd> factor(int arm0) const { return Eigen::LLT<Eigen::MatrixXd>(gram(arm0)); }

  int num_actions() const { return num_actions_; }
  int dim() const { return dim_; }
  double ridge() const { return ridge_; }

  /// Overwrite statistics directly (used to replay or hand-set a state).
  void set(int arm0, Eigen::MatrixXd gram, Eigen::VectorXd response);

 private:
  int num_actions_;
  int dim_;
  double ridge_;
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Eigen::VectorXd> response_;
};

struct LinUcbConfig {
  double ridge = 1.0;
  double alpha = 1.0;
};

class LinUcbPolicy {
 public:
  LinUcbPolicy(int num_actions, int dim, LinUcbConfig config = {});

  /// argmax_a theta_a^T x~ + alpha sqrt(x~^T A_a^{-1} x~), lowest index on ties.
  PolicyDecision step(const Covariate& x) const;
  void update(ActionIndex a, const Covariate& x, double y) { stats_.update(a, x, y); }

  LinearArmStatistics& statistics() { return stats_; }
  const LinearArmStatistics& statistics() const { return stats_; }

 private:
  LinearArmStatistics stats_;
  LinUcbConfig config_;
};

struct LinTsConfig {
  double ridge = 1.0;
  double variance = 1.0;
};

class LinTsPolicy {
 public:
  LinTsPolicy(int num_actions, int dim, LinTsConfig config = {});

  /// Samples theta~_a ~ N(theta_a, variance A_a^{-1}) and picks argmax theta~_a^T x~.
  /// probs is the realized one-hot.
  PolicyDecision step(const Covariate& x, Rng& rng) const;
  void update(ActionIndex a, const Covariate& x, double y) { stats_.update(a, x, y); }

  LinearArmStatistics& statistics() { return stats_; }
  const LinearArmStatistics& statistics() const { return stats_; }

 private:
  LinearArmStatistics stats_;
  LinTsConfig config_;
};

PolicyDecision linucb_step(const LinUcbPolicy& policy, const Covariate& x);
PolicyDecision lints_step(const LinTsPolicy& policy, const Covariate& x, Rng& rng);

// --- Fixed stochastic policy -----------------------------------------------------------------

class FixedPolicy {
 public:
  explicit FixedPolicy(ProbabilityVector probs);
  PolicyDecision step(Rng& rng) const;
  const ProbabilityVector& probs() const { return probs_; }

 private:
  ProbabilityVector probs_;
};

// --- Evaluation policy -----------------------------------------------------------------------

/// Multinomial logistic regression with intercepts; weights carry an L2 penalty `l2`
/// (intercepts a small fixed 1e-6 one so the fit stays finite on single-class data).
class MultinomialLogit {
 public:
  MultinomialLogit(const Eigen::Ref<const Eigen::MatrixXd>& x, const std::vector<int>& labels,
                   int num_classes, double l2 = 1.0, int max_iterations = 100);

  Eigen::VectorXd probabilities(const Covariate& x) const;
  /// (dim + 1) x K: last row holds intercepts.
  const Eigen::MatrixXd& coefficients() const { return coef_; }
  int num_classes() const { return num_classes_; }

 private:
  Eigen::MatrixXd coef_;
  int num_classes_;
};

/// Trains pi^e(a|x) on (x, winner) pairs by multinomial logistic regression.
EvaluationWeight fit_evaluation_policy(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                       const std::vector<int>& winners, int num_actions,
                                       double l2 = 1.0);

}  // namespace aope

#endif  // ADAPTIVE_OPE_POLICIES_HPP
