#ifndef ADAPTIVE_OPE_INFERENCE_HPP
#define ADAPTIVE_OPE_INFERENCE_HPP

#include "adaptive_ope/core.hpp"

namespace aope {

/// Inverse standard normal CDF. Acklam's rational approximation followed by one Halley
/// refinement step against erfc.
double normal_quantile(double p);

/// nu^2 = (1/T) sum_t (score_t - mean)^2. Requires T >= 2.
double score_variance(const Eigen::Ref<const Eigen::VectorXd>& scores);
double score_variance(const EstimateReport& report);

/// estimate +/- z_{(1+level)/2} sqrt(variance / T).
Interval confidence_interval(double estimate, double variance, std::int64_t periods,
                             double level = 0.95);

/// Estimate, score variance and interval from per-period scores.
EstimateReport make_report(Eigen::VectorXd scores, double level = 0.95);

struct MdsDiagnostics {
  double second_moment = 0.0;          // (1/T) sum (Z_t)^2 with Z_t = score_t - truth
  double second_moment_minus_psi = 0.0;
  double max_abs_score = 0.0;          // max_t |Z_t|
  double centered_running_mean = 0.0;  // (1/T) sum Z_t
  double max_abs_running_mean = 0.0;   // max over t of |(1/t) sum_{s<=t} Z_s|, t >= 1
  double psi = 0.0;
};

MdsDiagnostics mds_diagnostics(const EstimateReport& report, double truth, double psi);

}  // namespace aope

#endif  // ADAPTIVE_OPE_INFERENCE_HPP
