#ifndef ADAPTIVE_OPE_ESTIMATORS_HPP
#define ADAPTIVE_OPE_ESTIMATORS_HPP

#include "adaptive_ope/core.hpp"
#include "adaptive_ope/nuisance.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aope {

enum class EstimatorKind { kIpw, kEipw, kDm, kAipw, kDr, kA2ipw, kAdr, kMadr, kA3ipw, kMa3ipw };

inline constexpr std::array<EstimatorKind, 10> kAllEstimators = {
    EstimatorKind::kIpw,  EstimatorKind::kEipw, EstimatorKind::kDm,   EstimatorKind::kAipw,
    EstimatorKind::kDr,   EstimatorKind::kA2ipw, EstimatorKind::kAdr, EstimatorKind::kMadr,
    EstimatorKind::kA3ipw, EstimatorKind::kMa3ipw};

/// Config-file names: ipw, eipw, dm, aipw, dr, a2ipw, adr, madr, a3ipw, ma3ipw.
std::string_view to_string(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator_kind(std::string_view name);

/// Which outcome model is bound at period t.
enum class OutcomeSource {
  kNone,      // f = 0
  kAdaptive,  // f_{t-1}
  kFrozen,    // f_{t-1} for t <= u(T), f_{u(T)} afterwards
  kFull,      // one full-sample (or cross-fit) model
};

/// Which propensity is inverted at period t.
enum class PropensitySource {
  kLogged,          // true pi_t, not clipped
  kRunningAverage,  // (1/t) sum_{s<=t} pi_s, lifted to epsilon
  kAdaptive,        // fitted g_{t-1}
  kFull,            // one full-sample (or cross-fit) fitted g
};

struct EstimatorSpec {
  EstimatorKind kind;
  OutcomeSource outcome;
  PropensitySource propensity;

  /// Standard bindings of each estimator.
  static EstimatorSpec standard(EstimatorKind kind);
};

/// Throws ConfigurationError when the bindings do not match what `kind` requires.
void validate(const EstimatorSpec& spec);

/// Everything an estimator might bind to, all indexed by period (entry t-1 for period t).
struct NuisanceBundle {
  std::vector<OutcomeSnapshot> f_adaptive;
  std::vector<OutcomeSnapshot> f_full;
  std::vector<PropensitySnapshot> g_adaptive;
  std::vector<PropensitySnapshot> g_full;
  std::vector<PropensitySnapshot> g_running;
  // Freeze index for the frozen outcome source; 0 means freeze_index(T).
  std::size_t freeze = 0;
  // Model trained on exactly the first u samples, used after the freeze. When null the adaptive
  // snapshot f_adaptive[u] (the latest refit at or before u) stands in.
  OutcomeSnapshot f_frozen;
};

/// sum_a { w(a|x) 1[A=a] (y - f(a,x)) / g(a|x) + w(a|x) f(a,x) }.
/// The inverse term is evaluated only at the realized action; its propensity must be positive.
double dr_score(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& weights,
                const Eigen::Ref<const Eigen::VectorXd>& f,
                const Eigen::Ref<const Eigen::VectorXd>& g);

/// Model-based overload. Checks the realized-action propensity against the model's floor.
double dr_score(const Sample& sample, const EvaluationWeight& weight, const OutcomeModel& f,
                const PropensityModel& g);

/// Mean of w(A_t|X_t) Y_t / pi_t(A_t|X_t) over the logged true propensities.
EstimateReport ipw_estimate(const History& data, const EvaluationWeight& weight,
                            double level = 0.95);

/// Mean over t of sum_a w(a|X_t) f_{t-1}(a, X_t).
EstimateReport dm_estimate(const History& data, const EvaluationWeight& weight,
                           const std::vector<OutcomeSnapshot>& f_seq, double level = 0.95);

/// Mean over t of dr_score with the estimator's per-period bindings drawn from `nuisances`.
EstimateReport adaptive_estimate(const EstimatorSpec& spec, const History& data,
                                 const EvaluationWeight& weight, const NuisanceBundle& nuisances,
                                 double level = 0.95);

/// Dispatches to ipw_estimate, dm_estimate or adaptive_estimate.
EstimateReport estimate(const EstimatorSpec& spec, const History& data,
                        const EvaluationWeight& weight, const NuisanceBundle& nuisances,
                        double level = 0.95);

/// Which bundle members an estimator list needs.
struct NuisanceNeeds {
  bool f_adaptive = false;
  bool f_full = false;
  bool g_adaptive = false;
  bool g_full = false;
  bool g_running = false;
};

NuisanceNeeds needs_of(const std::vector<EstimatorSpec>& specs);

}  // namespace aope

#endif  // ADAPTIVE_OPE_ESTIMATORS_HPP
