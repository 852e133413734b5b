#include "adaptive_ope/core.hpp"

#include <cmath>
#include <string>

namespace aope {

ActionIndex::ActionIndex(int index, int num_actions)
    : index_(index), num_actions_(num_actions) {
  if (num_actions < 1) {
    throw ConfigurationError("need at least one action, got K=" +
                             std::to_string(num_actions));
  }
  if (index < 1 || index > num_actions) {
    throw IndexError("action " + std::to_string(index) + " outside {1,...," +
                     std::to_string(num_actions) + "}");
  }
}

bool is_probability_vector(const Eigen::Ref<const Eigen::VectorXd>& p, double tol) {
  if (p.size() == 0) return false;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0 || p[i] > 1.0) return false;
  }
  return std::abs(p.sum() - 1.0) <= tol;
}

Eigen::VectorXd one_hot(int num_actions, int zero_based_index) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(num_actions);
  v[zero_based_index] = 1.0;
  return v;
}

Sample::Sample(Covariate x_, ActionIndex a_, double y_,
               std::optional<ProbabilityVector> logged)
    : x(std::move(x_)), a(a_), y(y_), logged_policy(std::move(logged)) {
  if (a.num_actions() < 2) throw ConfigurationError("samples need K >= 2 actions");
  if (!x.allFinite()) throw DomainError("covariate has non-finite entries");
  if (!std::isfinite(y)) throw DomainError("outcome is not finite");
  if (logged_policy) {
    if (logged_policy->size() != a.num_actions()) {
      throw DomainError("logged policy length does not match K");
    }
    if (!is_probability_vector(*logged_policy)) {
      throw DomainError("logged policy is not a probability vector");
    }
  }
}

void check_outcome_bound(const Sample& s, double bound) {
  if (std::abs(s.y) > bound) {
    throw DomainError("outcome " + std::to_string(s.y) + " exceeds bound " +
                      std::to_string(bound));
  }
}

History::History(std::vector<Sample> samples)
    : storage_(std::make_shared<const std::vector<Sample>>(std::move(samples))),
      length_(storage_->size()) {}

const Sample& History::at(std::size_t i) const {
  if (i >= length_) {
    throw IndexError("history index " + std::to_string(i) + " out of range (size " +
                     std::to_string(length_) + ")");
  }
  return (*storage_)[i];
}

History History::prefix(std::size_t t) const {
  if (t > length_) {
    throw IndexError("prefix length " + std::to_string(t) + " exceeds history size " +
                     std::to_string(length_));
  }
  History h;
  h.storage_ = storage_;
  h.length_ = t;
  return h;
}

History History::append(Sample s) const {
  std::vector<Sample> copy(begin(), end());
  copy.push_back(std::move(s));
  return History(std::move(copy));
}

History history_prefix(const History& history, std::size_t t) { return history.prefix(t); }

EvaluationWeight::EvaluationWeight(int num_actions, Fn fn, double bound)
    : num_actions_(num_actions), bound_(bound) {
  if (num_actions < 2) throw ConfigurationError("evaluation weight needs K >= 2");
  if (!fn) throw ConfigurationError("evaluation weight function is empty");
  vector_fn_ = [fn = std::move(fn), num_actions](const Covariate& x) {
    Eigen::VectorXd out(num_actions);
    for (int a = 1; a <= num_actions; ++a) out[a - 1] = fn(ActionIndex(a, num_actions), x);
    return out;
  };
}

EvaluationWeight::EvaluationWeight(int num_actions, VectorFn fn, double bound)
    : num_actions_(num_actions), vector_fn_(std::move(fn)), bound_(bound) {
  if (num_actions < 2) throw ConfigurationError("evaluation weight needs K >= 2");
  if (!vector_fn_) throw ConfigurationError("evaluation weight function is empty");
}

EvaluationWeight EvaluationWeight::constant(const Eigen::Ref<const Eigen::VectorXd>& w) {
  Eigen::VectorXd copy = w;
  const double bound = copy.cwiseAbs().maxCoeff();
  return EvaluationWeight(static_cast<int>(copy.size()),
                          VectorFn([copy](const Covariate&) { return copy; }), bound);
}

Eigen::VectorXd EvaluationWeight::values(const Covariate& x) const {
  Eigen::VectorXd out = vector_fn_(x);
  if (out.size() != num_actions_) throw ContractViolation("evaluation weight has wrong length");
  if (out.size() > 0 && !(out.cwiseAbs().maxCoeff() <= bound_ + 1e-12)) {
    throw ContractViolation("evaluation weight exceeds its bound " + std::to_string(bound_));
  }
  return out;
}

EvaluationWeight ate_weight(int num_actions) {
  if (num_actions != 2) {
    throw ConfigurationError("ATE weight requires K = 2, got K=" +
                             std::to_string(num_actions));
  }
  return EvaluationWeight::constant(Eigen::Vector2d(-1.0, 1.0));
}

}  // namespace aope
