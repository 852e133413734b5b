#ifndef ADAPTIVE_OPE_DGP_HPP
#define ADAPTIVE_OPE_DGP_HPP

#include "adaptive_ope/core.hpp"

#include <cstdint>

namespace aope {

/// All K potential outcomes of one period plus its covariate.
struct PotentialOutcomes {
  Covariate x;
  Eigen::VectorXd y;
};

/// Two arms without covariates; arm a has outcome law N(a, a).
struct GaussianTwoArmDGP {
  Eigen::Vector2d means{1.0, 2.0};
  Eigen::Vector2d variances{1.0, 2.0};

  static constexpr int kNumActions = 2;

  PotentialOutcomes draw(Rng& rng) const;
  Eigen::VectorXd conditional_mean(const Covariate&) const { return means; }
};

/// Ten-dimensional standard normal covariates, three actions and exactly one
/// latent winner per period drawn from softmax(g(., x)).
class SoftmaxContextualDGP {
 public:
  static constexpr int kDim = 10;
  static constexpr int kNumActions = 3;

  explicit SoftmaxContextualDGP(Eigen::VectorXd signs);

  /// Draws the sign vector W uniformly from {-1, +1}^10.
  static SoftmaxContextualDGP from_rng(Rng& rng);

  const Eigen::VectorXd& signs() const { return signs_; }

  Eigen::Vector3d scores(const Covariate& x) const;
  /// f*(a, x) = p(a | x).
  Eigen::VectorXd conditional_mean(const Covariate& x) const;

  Covariate draw_covariate(Rng& rng) const;
  PotentialOutcomes draw_given(const Covariate& x, Rng& rng) const;
  PotentialOutcomes draw(Rng& rng) const;

 private:
  Eigen::VectorXd signs_;
};

PotentialOutcomes draw_gaussian(const GaussianTwoArmDGP& dgp, Rng& rng);
PotentialOutcomes draw_softmax_contextual(const SoftmaxContextualDGP& dgp, Rng& rng);

/// sum_a w(a) * mean(a).
double true_value(const GaussianTwoArmDGP& dgp, const EvaluationWeight& weight);

/// Monte Carlo mean of sum_a pi^e(a|x) f*(a,x) over `oracle_budget` covariates.
double true_value(const SoftmaxContextualDGP& dgp, const EvaluationWeight& weight,
                  std::int64_t oracle_budget, Rng& rng);

inline constexpr std::int64_t kDefaultOracleBudget = 100'000;

/// Psi(alpha) = sum_a w(a)^2 v(a) / alpha(a) + (sum_a w(a) f(a) - R)^2.
double semiparametric_bound(const GaussianTwoArmDGP& dgp, const EvaluationWeight& weight,
                            const Eigen::Ref<const Eigen::VectorXd>& alpha);

/// Allocation minimizing Psi: alpha(a) proportional to |w(a)| sqrt(v(a)).
Eigen::VectorXd neyman_allocation(const GaussianTwoArmDGP& dgp,
                                  const EvaluationWeight& weight);

}  // namespace aope

#endif  // ADAPTIVE_OPE_DGP_HPP
