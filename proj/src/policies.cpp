#include "adaptive_ope/policies.hpp"

#include "adaptive_ope/kernels.hpp"

#include <cmath>
#include <limits>

namespace aope {

Eigen::Vector2d neyman_target_from_variances(double var1, double var2) {
  const double s1 = std::sqrt(std::max(var1, 0.0));
  const double s2 = std::sqrt(std::max(var2, 0.0));
  if (s1 + s2 <= 0.0) return {0.5, 0.5};
  const double p1 = s1 / (s1 + s2);
  return {p1, 1.0 - p1};
}

Eigen::Vector2d neyman_target(const History& history) {
  std::size_t n[2] = {0, 0};
  double sum[2] = {0.0, 0.0};
  for (const auto& s : history) {
    if (s.num_actions() != 2) throw ConfigurationError("Neyman target needs two arms");
    const auto a = static_cast<std::size_t>(s.a.zero_based());
    ++n[a];
    sum[a] += s.y;
  }
  if (n[0] < 2 || n[1] < 2) return {0.5, 0.5};
  const double mean[2] = {sum[0] / static_cast<double>(n[0]), sum[1] / static_cast<double>(n[1])};
  double ss[2] = {0.0, 0.0};
  for (const auto& s : history) {
    const auto a = static_cast<std::size_t>(s.a.zero_based());
    ss[a] += (s.y - mean[a]) * (s.y - mean[a]);
  }
  return neyman_target_from_variances(ss[0] / static_cast<double>(n[0] - 1),
                                      ss[1] / static_cast<double>(n[1] - 1));
}

PolicyDecision neyman_rule(std::size_t pulls_arm1, std::size_t decisions, double target1) {
  const bool arm1 = decisions == 0 || static_cast<double>(pulls_arm1) <=
                                          target1 * static_cast<double>(decisions);
  const int chosen = arm1 ? 1 : 2;
  return {ActionIndex(chosen, 2), one_hot(2, chosen - 1)};
}

Eigen::Vector2d NeymanRatioPolicy::target() const {
  if (counts_[0] < kWarmupPulls || counts_[1] < kWarmupPulls) return {0.5, 0.5};
  double var[2];
  for (int a = 0; a < 2; ++a) {
    const double n = static_cast<double>(counts_[a]);
    const double mean = sums_[a] / n;
    var[a] = std::max(0.0, (sum_squares_[a] - n * mean * mean) / (n - 1.0));
  }
  return neyman_target_from_variances(var[0], var[1]);
}

PolicyDecision NeymanRatioPolicy::step() const {
  if (counts_[0] < kWarmupPulls || counts_[1] < kWarmupPulls) {
    const int chosen = counts_[1] < counts_[0] ? 2 : 1;
    return {ActionIndex(chosen, 2), one_hot(2, chosen - 1)};
  }
  if (forced_exploration_) {
    const double floor = std::sqrt(static_cast<double>(decisions())) - 1.0;
    const int lagging = counts_[1] < counts_[0] ? 2 : 1;
    if (static_cast<double>(counts_[lagging - 1]) < floor) {
      return {ActionIndex(lagging, 2), one_hot(2, lagging - 1)};
    }
  }
  return neyman_rule(counts_[0], decisions(), target()[0]);
}

void NeymanRatioPolicy::update(ActionIndex a, double y) {
  if (a.num_actions() != 2) throw ConfigurationError("Neyman policy needs two arms");
  const auto i = static_cast<std::size_t>(a.zero_based());
  ++counts_[i];
  sums_[i] += y;
  sum_squares_[i] += y * y;
}

PolicyDecision neyman_step(const NeymanRatioPolicy& policy) { return policy.step(); }

LinearArmStatistics::LinearArmStatistics(int num_actions, int dim, double ridge)
    : num_actions_(num_actions), dim_(dim), ridge_(ridge) {
  if (num_actions < 1) throw ConfigurationError("need at least one arm");
  if (!(ridge > 0.0)) throw ConfigurationError("ridge penalty must be positive");
  for (int a = 0; a < num_actions; ++a) {
    gram_.push_back(ridge * Eigen::MatrixXd::Identity(dim + 1, dim + 1));
    response_.push_back(Eigen::VectorXd::Zero(dim + 1));
  }
}

Eigen::VectorXd LinearArmStatistics::augment(const Covariate& x) const {
  if (x.size() != dim_) {
    throw ConfigurationError("covariate dimension " + std::to_string(x.size()) +
                             " does not match policy dimension " + std::to_string(dim_));
  }
  Eigen::VectorXd out(dim_ + 1);
  out << x, 1.0;
  return out;
}

void LinearArmStatistics::update(ActionIndex a, const Covariate& x, double y) {
  const Eigen::VectorXd z = augment(x);
  const auto i = static_cast<std::size_t>(a.zero_based());
  gram_[i].selfadjointView<Eigen::Lower>().rankUpdate(z);
  gram_[i].triangularView<Eigen::StrictlyUpper>() = gram_[i].transpose();
  response_[i] += y * z;
}

Eigen::VectorXd LinearArmStatistics::theta(int arm0) const { return factor(arm0).solve(response(arm0)); }

void LinearArmStatistics::set(int arm0, Eigen::MatrixXd gram, Eigen::VectorXd response) {
  gram_.at(static_cast<std::size_t>(arm0)) = std::move(gram);
  response_.at(static_cast<std::size_t>(arm0)) = std::move(response);
}

namespace {

PolicyDecision argmax_decision(const Eigen::VectorXd& values) {
  const auto k = static_cast<int>(values.size());
  int best = 0;
  for (int a = 1; a < k; ++a) {
    if (values[a] > values[best]) best = a;
  }
  return {ActionIndex(best + 1, k), one_hot(k, best)};
}

}  // namespace

LinUcbPolicy::LinUcbPolicy(int num_actions, int dim, LinUcbConfig config)
    : stats_(num_actions, dim, config.ridge), config_(config) {
  if (config.alpha < 0.0) throw ConfigurationError("UCB width must be nonnegative");
}

PolicyDecision LinUcbPolicy::step(const Covariate& x) const {
  const Eigen::VectorXd z = stats_.augment(x);
  Eigen::VectorXd values(stats_.num_actions());
  for (int a = 0; a < stats_.num_actions(); ++a) {
    const auto llt = stats_.factor(a);
    const Eigen::VectorXd theta = llt.solve(stats_.response(a));
    const double width = std::sqrt(std::max(0.0, z.dot(llt.solve(z))));
    values[a] = theta.dot(z) + config_.alpha * width;
  }
  return argmax_decision(values);
}

LinTsPolicy::LinTsPolicy(int num_actions, int dim, LinTsConfig config)
    : stats_(num_actions, dim, config.ridge), config_(config) {
  if (config.variance < 0.0) throw ConfigurationError("posterior variance must be nonnegative");
}

PolicyDecision LinTsPolicy::step(const Covariate& x, Rng& rng) const {
  const Eigen::VectorXd z = stats_.augment(x);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(config_.variance);
  Eigen::VectorXd values(stats_.num_actions());
  for (int a = 0; a < stats_.num_actions(); ++a) {
    const auto llt = stats_.factor(a);
    Eigen::VectorXd theta = llt.solve(stats_.response(a));
    if (scale > 0.0) {
      Eigen::VectorXd noise(theta.size());
      for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = normal(rng);
      // A = L L^T, so L^{-T} noise has covariance A^{-1}.
      theta += scale * llt.matrixU().solve(noise);
    }
    values[a] = theta.dot(z);
  }
  return argmax_decision(values);
}

PolicyDecision linucb_step(const LinUcbPolicy& policy, const Covariate& x) { return policy.step(x); }

PolicyDecision lints_step(const LinTsPolicy& policy, const Covariate& x, Rng& rng) {
  return policy.step(x, rng);
}

FixedPolicy::FixedPolicy(ProbabilityVector probs) : probs_(std::move(probs)) {
  if (!is_probability_vector(probs_)) throw ConfigurationError("fixed policy is not a distribution");
}

PolicyDecision FixedPolicy::step(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  const auto k = static_cast<int>(probs_.size());
  int chosen = k - 1;
  double cum = 0.0;
  for (int a = 0; a < k; ++a) {
    cum += probs_[a];
    if (r < cum) {
      chosen = a;
      break;
    }
  }
  return {ActionIndex(chosen + 1, k), probs_};
}

MultinomialLogit::MultinomialLogit(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const std::vector<int>& labels, int num_classes, double l2,
                                   int max_iterations)
    : num_classes_(num_classes) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  const Eigen::Index k = num_classes;
  if (n != static_cast<Eigen::Index>(labels.size())) throw ConfigurationError("x/labels size mismatch");
  if (l2 < 0.0) throw ConfigurationError("penalty must be nonnegative");
  constexpr double kInterceptPenalty = 1e-6;

  Eigen::MatrixXd design(n, p);
  design << x, Eigen::VectorXd::Ones(n);
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) targets(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, l2);
  penalty[p - 1] = kInterceptPenalty;

  auto objective = [&](const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd s = design * w;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = s.row(i).maxCoeff();
      const double lse = m + std::log((s.row(i).array() - m).exp().sum());
      loss += lse - s.row(i).dot(targets.row(i));
    }
    for (Eigen::Index c = 0; c < k; ++c) loss += 0.5 * (penalty.array() * w.col(c).array().square()).sum();
    return loss;
  };

  coef_ = Eigen::MatrixXd::Zero(p, k);
  double current = objective(coef_);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXd prob = softmax_rows(design * coef_);
    Eigen::MatrixXd grad = design.transpose() * (prob - targets);
    for (Eigen::Index c = 0; c < k; ++c) grad.col(c).array() += penalty.array() * coef_.col(c).array();

    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p * k, p * k);
    for (Eigen::Index c = 0; c < k; ++c) {
      for (Eigen::Index e = c; e < k; ++e) {
        Eigen::VectorXd wts = -prob.col(c).cwiseProduct(prob.col(e));
        if (c == e) wts += prob.col(c);
        const Eigen::MatrixXd block = design.transpose() * wts.asDiagonal() * design;
        hess.block(c * p, e * p, p, p) = block;
        if (e != c) hess.block(e * p, c * p, p, p) = block;
      }
      hess.block(c * p, c * p, p, p).diagonal() += penalty;
    }
    const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(grad.data(), p * k);
    if (g.norm() < 1e-10 * std::max<double>(1.0, static_cast<double>(n))) break;
    const Eigen::VectorXd dir = hess.ldlt().solve(-g);
    const Eigen::MatrixXd step_dir = Eigen::Map<const Eigen::MatrixXd>(dir.data(), p, k);
    double t = 1.0;
    const double slope = g.dot(dir);
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      const Eigen::MatrixXd trial = coef_ + t * step_dir;
      const double value = objective(trial);
      if (value <= current + 1e-4 * t * slope) {
        coef_ = trial;
        current = value;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
}

Eigen::VectorXd MultinomialLogit::probabilities(const Covariate& x) const {
  const Eigen::Index p = coef_.rows();
  if (x.size() != p - 1) throw ConfigurationError("covariate dimension mismatch");
  Eigen::RowVectorXd s = x.transpose() * coef_.topRows(p - 1) + coef_.row(p - 1);
  return softmax_rows(s).row(0).transpose();
}

EvaluationWeight fit_evaluation_policy(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                       const std::vector<int>& winners, int num_actions,
                                       double l2) {
  auto model = std::make_shared<const MultinomialLogit>(x, winners, num_actions, l2);
  return EvaluationWeight(
      num_actions,
      EvaluationWeight::VectorFn([model](const Covariate& cx) { return model->probabilities(cx); }),
      1.0);
}

}  // namespace aope
