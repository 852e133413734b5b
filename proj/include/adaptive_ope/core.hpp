#ifndef ADAPTIVE_OPE_CORE_HPP
#define ADAPTIVE_OPE_CORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace aope {

using Rng = std::mt19937_64;
using Covariate = Eigen::VectorXd;
using ProbabilityVector = Eigen::VectorXd;

struct ConfigurationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Raised when an estimator must invert a zero logging probability.
struct DeficientSupportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

inline constexpr double kProbabilitySumTolerance = 1e-9;

/// One-based action label in {1, ..., K}. Samples and weights additionally require K >= 2.
class ActionIndex {
 public:
  ActionIndex(int index, int num_actions);

  int value() const { return index_; }
  int zero_based() const { return index_ - 1; }
  int num_actions() const { return num_actions_; }

  friend bool operator==(const ActionIndex& l, const ActionIndex& r) {
    return l.index_ == r.index_ && l.num_actions_ == r.num_actions_;
  }

 private:
  int index_;
  int num_actions_;
};

/// Checks entries lie in [0,1] and sum to one within kProbabilitySumTolerance.
bool is_probability_vector(const Eigen::Ref<const Eigen::VectorXd>& p,
                           double tol = kProbabilitySumTolerance);

Eigen::VectorXd one_hot(int num_actions, int zero_based_index);

struct Sample {
  Covariate x;
  ActionIndex a;
  double y = 0.0;
  std::optional<ProbabilityVector> logged_policy;

  Sample(Covariate x_, ActionIndex a_, double y_,
         std::optional<ProbabilityVector> logged = std::nullopt);

  int num_actions() const { return a.num_actions(); }
};

/// Hard outcome bound |y| <= bound. Throws DomainError on violation.
void check_outcome_bound(const Sample& s, double bound);

/// Ordered, append-only sequence of samples. Prefix views share storage.
class History {
 public:
  History() = default;
  explicit History(std::vector<Sample> samples);

  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }
  const Sample& operator[](std::size_t i) const { return (*storage_)[i]; }
  const Sample& at(std::size_t i) const;

  /// First `t` samples. Throws IndexError when t > size().
  History prefix(std::size_t t) const;

  /// New history with `s` appended; this history is left untouched.
  History append(Sample s) const;

  auto begin() const { return storage_->begin(); }
  auto end() const { return storage_->begin() + static_cast<std::ptrdiff_t>(length_); }

 private:
  std::shared_ptr<const std::vector<Sample>> storage_ =
      std::make_shared<const std::vector<Sample>>();
  std::size_t length_ = 0;
};

History history_prefix(const History& history, std::size_t t);

/// Weight function pi^e(a|x) defining the target R = E[sum_a pi^e(a|x) Y(a)].
class EvaluationWeight {
 public:
  using Fn = std::function<double(ActionIndex, const Covariate&)>;
  using VectorFn = std::function<Eigen::VectorXd(const Covariate&)>;

  EvaluationWeight(int num_actions, Fn fn, double bound = 1.0);
  EvaluationWeight(int num_actions, VectorFn fn, double bound = 1.0);

  /// Covariate-free weight given as a fixed vector over actions.
  static EvaluationWeight constant(const Eigen::Ref<const Eigen::VectorXd>& w);

  double operator()(ActionIndex a, const Covariate& x) const { return values(x)[a.zero_based()]; }
  Eigen::VectorXd values(const Covariate& x) const;

  int num_actions() const { return num_actions_; }
  double bound() const { return bound_; }

 private:
  int num_actions_;
  VectorFn vector_fn_;
  double bound_;
};

/// ATE weight with pi^e(1) = -1 and pi^e(2) = +1. Requires K = 2.
EvaluationWeight ate_weight(int num_actions = 2);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct EstimateReport {
  double estimate = 0.0;
  Eigen::VectorXd scores;
  double variance = 0.0;
  Interval ci;
  double level = 0.95;
};

}  // namespace aope

#endif  // ADAPTIVE_OPE_CORE_HPP
