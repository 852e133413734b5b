#include "adaptive_ope/estimators.hpp"

#include "adaptive_ope/inference.hpp"

#include <algorithm>
#include <cmath>

namespace aope {

namespace {

constexpr std::array<std::string_view, 10> kNames = {"ipw", "eipw",  "dm",  "aipw",  "dr",
                                                     "a2ipw", "adr", "madr", "a3ipw", "ma3ipw"};

}  // namespace

std::string_view to_string(EstimatorKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<EstimatorKind> parse_estimator_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<EstimatorKind>(i);
  }
  return std::nullopt;
}

EstimatorSpec EstimatorSpec::standard(EstimatorKind kind) {
  using K = EstimatorKind;
  using F = OutcomeSource;
  using G = PropensitySource;
  switch (kind) {
    case K::kIpw: return {kind, F::kNone, G::kLogged};
    case K::kEipw: return {kind, F::kNone, G::kAdaptive};
    case K::kDm: return {kind, F::kAdaptive, G::kAdaptive};
    case K::kAipw: return {kind, F::kFull, G::kLogged};
    case K::kDr: return {kind, F::kFull, G::kFull};
    case K::kA2ipw: return {kind, F::kAdaptive, G::kLogged};
    case K::kAdr: return {kind, F::kAdaptive, G::kAdaptive};
    case K::kMadr: return {kind, F::kFrozen, G::kAdaptive};
    case K::kA3ipw: return {kind, F::kAdaptive, G::kRunningAverage};
    case K::kMa3ipw: return {kind, F::kFrozen, G::kRunningAverage};
  }
  throw ConfigurationError("unknown estimator kind");
}

void validate(const EstimatorSpec& spec) {
  using K = EstimatorKind;
  using F = OutcomeSource;
  using G = PropensitySource;
  const auto f = spec.outcome;
  const auto g = spec.propensity;
  bool ok = false;
  switch (spec.kind) {
    case K::kIpw: ok = f == F::kNone && g == G::kLogged; break;
    case K::kEipw: ok = f == F::kNone && (g == G::kAdaptive || g == G::kFull); break;
    case K::kDm: ok = f != F::kNone; break;
    case K::kAipw: ok = f == F::kFull && g == G::kLogged; break;
    case K::kDr: ok = f == F::kFull && g == G::kFull; break;
    case K::kA2ipw: ok = f == F::kAdaptive && g == G::kLogged; break;
    case K::kAdr: ok = f == F::kAdaptive && g == G::kAdaptive; break;
    case K::kMadr: ok = f == F::kFrozen && g == G::kAdaptive; break;
    case K::kA3ipw: ok = f == F::kAdaptive && g == G::kRunningAverage; break;
    case K::kMa3ipw: ok = f == F::kFrozen && g == G::kRunningAverage; break;
  }
  if (!ok) {
    throw ConfigurationError("nuisance bindings do not match estimator " +
                             std::string(to_string(spec.kind)));
  }
}

double dr_score(const Sample& sample, const Eigen::Ref<const Eigen::VectorXd>& weights,
                const Eigen::Ref<const Eigen::VectorXd>& f,
                const Eigen::Ref<const Eigen::VectorXd>& g) {
  const int a = sample.a.zero_based();
  const double ga = g[a];
  if (!(ga > 0.0) || !std::isfinite(ga)) {
    throw DeficientSupportError("propensity of realized action " +
                                std::to_string(sample.a.value()) + " is " + std::to_string(ga));
  }
  return weights.dot(f) + weights[a] * (sample.y - f[a]) / ga;
}

double dr_score(const Sample& sample, const EvaluationWeight& weight, const OutcomeModel& f,
                const PropensityModel& g) {
  const Eigen::VectorXd gv = g.probabilities(sample.x);
  if (gv[sample.a.zero_based()] < g.epsilon()) {
    throw ContractViolation("fitted propensity below its floor");
  }
  return dr_score(sample, weight.values(sample.x), f.predict(sample.x), gv);
}

namespace {

const Eigen::VectorXd& logged_or_throw(const Sample& s) {
  if (!s.logged_policy) {
    throw ConfigurationError("estimator needs logged true propensities on every sample");
  }
  return *s.logged_policy;
}

template <typename Seq>
const Seq& require(const Seq& seq, std::size_t periods, const char* what) {
  if (seq.size() != periods) {
    throw ConfigurationError(std::string("nuisance bundle is missing ") + what + " (have " +
                             std::to_string(seq.size()) + " snapshots, need " +
                             std::to_string(periods) + ")");
  }
  return seq;
}

}  // namespace

EstimateReport ipw_estimate(const History& data, const EvaluationWeight& weight, double level) {
  Eigen::VectorXd scores(static_cast<Eigen::Index>(data.size()));
  for (std::size_t t = 0; t < data.size(); ++t) {
    const Sample& s = data[t];
    const double p = logged_or_throw(s)[s.a.zero_based()];
    if (!(p > 0.0)) {
      throw DeficientSupportError("logged probability of realized action is zero at period " +
                                  std::to_string(t + 1));
    }
    scores[static_cast<Eigen::Index>(t)] = weight(s.a, s.x) * s.y / p;
  }
  return make_report(std::move(scores), level);
}

EstimateReport dm_estimate(const History& data, const EvaluationWeight& weight,
                           const std::vector<OutcomeSnapshot>& f_seq, double level) {
  require(f_seq, data.size(), "outcome snapshots");
  Eigen::VectorXd scores(static_cast<Eigen::Index>(data.size()));
  for (std::size_t t = 0; t < data.size(); ++t) {
    const Sample& s = data[t];
    scores[static_cast<Eigen::Index>(t)] = weight.values(s.x).dot(f_seq[t]->predict(s.x));
  }
  return make_report(std::move(scores), level);
}

namespace {

std::vector<OutcomeSnapshot> outcome_binding(const EstimatorSpec& spec, const History& data,
                                             const NuisanceBundle& b) {
  const std::size_t periods = data.size();
  switch (spec.outcome) {
    case OutcomeSource::kNone: {
      const int k = data.empty() ? 2 : data[0].num_actions();
      return std::vector<OutcomeSnapshot>(
          periods, std::make_shared<const OutcomeModel>(OutcomeModel::zero(k)));
    }
    case OutcomeSource::kAdaptive: return require(b.f_adaptive, periods, "adaptive outcome snapshots");
    case OutcomeSource::kFull: return require(b.f_full, periods, "full-sample outcome models");
    case OutcomeSource::kFrozen: {
      NuisanceSequence seq;
      seq.f = require(b.f_adaptive, periods, "adaptive outcome snapshots");
      const std::size_t u = std::min(
          periods, b.freeze == 0 ? freeze_index(static_cast<std::int64_t>(periods)) : b.freeze);
      auto frozen = frozen_outcome_sequence(seq, u).f;
      if (b.f_frozen) {
        for (std::size_t t = u + 1; t <= periods; ++t) frozen[t - 1] = b.f_frozen;
      }
      return frozen;
    }
  }
  throw ConfigurationError("unknown outcome source");
}

const std::vector<PropensitySnapshot>* propensity_binding(const EstimatorSpec& spec,
                                                          std::size_t periods,
                                                          const NuisanceBundle& b) {
  switch (spec.propensity) {
    case PropensitySource::kLogged: return nullptr;
    case PropensitySource::kRunningAverage:
      return &require(b.g_running, periods, "running-average propensities");
    case PropensitySource::kAdaptive:
      return &require(b.g_adaptive, periods, "adaptive propensity snapshots");
    case PropensitySource::kFull: return &require(b.g_full, periods, "full-sample propensity models");
  }
  throw ConfigurationError("unknown propensity source");
}

}  // namespace

EstimateReport adaptive_estimate(const EstimatorSpec& spec, const History& data,
                                 const EvaluationWeight& weight, const NuisanceBundle& nuisances,
                                 double level) {
  validate(spec);
  if (spec.kind == EstimatorKind::kIpw || spec.kind == EstimatorKind::kDm) {
    throw ConfigurationError(std::string(to_string(spec.kind)) +
                             " is not a doubly robust score estimator");
  }
  const std::size_t periods = data.size();
  const auto f_seq = outcome_binding(spec, data, nuisances);
  const auto* g_seq = propensity_binding(spec, periods, nuisances);

  Eigen::VectorXd scores(static_cast<Eigen::Index>(periods));
  for (std::size_t t = 0; t < periods; ++t) {
    const Sample& s = data[t];
    const Eigen::VectorXd w = weight.values(s.x);
    const Eigen::VectorXd f = f_seq[t]->predict(s.x);
    double score;
    if (g_seq == nullptr) {
      try {
        score = dr_score(s, w, f, logged_or_throw(s));
      } catch (const DeficientSupportError&) {
        throw DeficientSupportError(std::string(to_string(spec.kind)) +
                                    ": logged probability of realized action is zero at period " +
                                    std::to_string(t + 1));
      }
    } else {
      const PropensityModel& g = *(*g_seq)[t];
      const Eigen::VectorXd gv = g.probabilities(s.x);
      if (gv[s.a.zero_based()] < g.epsilon()) {
        throw ContractViolation("propensity below its floor");
      }
      score = dr_score(s, w, f, gv);
    }
    scores[static_cast<Eigen::Index>(t)] = score;
  }
  return make_report(std::move(scores), level);
}

EstimateReport estimate(const EstimatorSpec& spec, const History& data,
                        const EvaluationWeight& weight, const NuisanceBundle& nuisances,
                        double level) {
  validate(spec);
  switch (spec.kind) {
    case EstimatorKind::kIpw: return ipw_estimate(data, weight, level);
    case EstimatorKind::kDm: {
      const std::vector<OutcomeSnapshot>& f =
          spec.outcome == OutcomeSource::kFull ? nuisances.f_full : nuisances.f_adaptive;
      if (spec.outcome == OutcomeSource::kFrozen) {
        return dm_estimate(data, weight, outcome_binding(spec, data, nuisances), level);
      }
      return dm_estimate(data, weight, f, level);
    }
    default: return adaptive_estimate(spec, data, weight, nuisances, level);
  }
}

NuisanceNeeds needs_of(const std::vector<EstimatorSpec>& specs) {
  NuisanceNeeds n;
  for (const auto& s : specs) {
    const bool uses_g = s.kind != EstimatorKind::kDm && s.kind != EstimatorKind::kIpw;
    if (s.outcome == OutcomeSource::kAdaptive || s.outcome == OutcomeSource::kFrozen) {
      n.f_adaptive = true;
    }
    if (s.outcome == OutcomeSource::kFull) n.f_full = true;
    if (uses_g && s.propensity == PropensitySource::kAdaptive) n.g_adaptive = true;
    if (uses_g && s.propensity == PropensitySource::kFull) n.g_full = true;
    if (uses_g && s.propensity == PropensitySource::kRunningAverage) n.g_running = true;
  }
  return n;
}

}  // namespace aope
