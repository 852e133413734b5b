#include "adaptive_ope/dgp.hpp"

#include <cmath>

namespace aope {

namespace {

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& s) {
  Eigen::VectorXd e = (s.array() - s.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

PotentialOutcomes GaussianTwoArmDGP::draw(Rng& rng) const {
  PotentialOutcomes out{Covariate(0), Eigen::VectorXd(2)};
  for (int a = 0; a < 2; ++a) {
    std::normal_distribution<double> law(means[a], std::sqrt(variances[a]));
    out.y[a] = law(rng);
  }
  return out;
}

SoftmaxContextualDGP::SoftmaxContextualDGP(Eigen::VectorXd signs) : signs_(std::move(signs)) {
  if (signs_.size() != kDim) throw ConfigurationError("sign vector must have length 10");
  for (Eigen::Index i = 0; i < signs_.size(); ++i) {
    if (signs_[i] != 1.0 && signs_[i] != -1.0) {
      throw ConfigurationError("sign vector entries must be +1 or -1");
    }
  }
}

SoftmaxContextualDGP SoftmaxContextualDGP::from_rng(Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Eigen::VectorXd w(kDim);
  for (int d = 0; d < kDim; ++d) w[d] = coin(rng) ? 1.0 : -1.0;
  return SoftmaxContextualDGP(std::move(w));
}

Eigen::Vector3d SoftmaxContextualDGP::scores(const Covariate& x) const {
  return {x.sum(), signs_.dot(x.cwiseAbs2()), signs_.dot(x.cwiseAbs())};
}

Eigen::VectorXd SoftmaxContextualDGP::conditional_mean(const Covariate& x) const {
  return softmax(scores(x));
}

Covariate SoftmaxContextualDGP::draw_covariate(Rng& rng) const {
  std::normal_distribution<double> z(0.0, 1.0);
  Covariate x(kDim);
  for (int d = 0; d < kDim; ++d) x[d] = z(rng);
  return x;
}

PotentialOutcomes SoftmaxContextualDGP::draw_given(const Covariate& x, Rng& rng) const {
  const Eigen::VectorXd p = conditional_mean(x);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  int winner = kNumActions - 1;
  double cum = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    cum += p[a];
    if (r < cum) {
      winner = a;
      break;
    }
  }
  return {x, one_hot(kNumActions, winner)};
}

PotentialOutcomes SoftmaxContextualDGP::draw(Rng& rng) const {
  Covariate x = draw_covariate(rng);
  return draw_given(x, rng);
}

PotentialOutcomes draw_gaussian(const GaussianTwoArmDGP& dgp, Rng& rng) { return dgp.draw(rng); }

PotentialOutcomes draw_softmax_contextual(const SoftmaxContextualDGP& dgp, Rng& rng) {
  return dgp.draw(rng);
}

double true_value(const GaussianTwoArmDGP& dgp, const EvaluationWeight& weight) {
  if (weight.num_actions() != 2) throw ConfigurationError("weight must have K = 2");
  return weight.values(Covariate(0)).dot(dgp.means);
}

double true_value(const SoftmaxContextualDGP& dgp, const EvaluationWeight& weight,
                  std::int64_t oracle_budget, Rng& rng) {
  if (oracle_budget < 1) throw DomainError("oracle budget must be >= 1");
  if (weight.num_actions() != SoftmaxContextualDGP::kNumActions) {
    throw ConfigurationError("weight must have K = 3");
  }
  double total = 0.0;
  for (std::int64_t i = 0; i < oracle_budget; ++i) {
    const Covariate x = dgp.draw_covariate(rng);
    total += weight.values(x).dot(dgp.conditional_mean(x));
  }
  return total / static_cast<double>(oracle_budget);
}

double semiparametric_bound(const GaussianTwoArmDGP& dgp, const EvaluationWeight& weight,
                            const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  if (alpha.size() != 2) throw DomainError("alpha must have two entries");
  if ((alpha.array() <= 0.0).any() || (alpha.array() >= 1.0).any()) {
    throw DomainError("alpha entries must lie in (0, 1)");
  }
  if (std::abs(alpha.sum() - 1.0) > kProbabilitySumTolerance) {
    throw DomainError("alpha must sum to one");
  }
  const Eigen::VectorXd w = weight.values(Covariate(0));
  const double variance_term =
      (w.array().square() * dgp.variances.array() / alpha.array()).sum();
  // Without covariates the conditional mean term equals R, so the second part vanishes
  // identically; it is kept for the general formula's shape.
  const double r = true_value(dgp, weight);
  const double shift = w.dot(dgp.means) - r;
  return variance_term + shift * shift;
}

Eigen::VectorXd neyman_allocation(const GaussianTwoArmDGP& dgp,
                                  const EvaluationWeight& weight) {
  Eigen::VectorXd raw =
      weight.values(Covariate(0)).cwiseAbs().cwiseProduct(dgp.variances.cwiseSqrt());
  return raw / raw.sum();
}

}  // namespace aope
