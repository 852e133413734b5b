#include "adaptive_ope/inference.hpp"

#include <cmath>
#include <numbers>

namespace aope {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley step; brings the 1e-9 relative error of the rational form to machine precision.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double score_variance(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  if (scores.size() < 2) throw DomainError("score variance needs T >= 2");
  const double mean = scores.mean();
  return (scores.array() - mean).square().sum() / static_cast<double>(scores.size());
}

double score_variance(const EstimateReport& report) { return score_variance(report.scores); }

Interval confidence_interval(double estimate, double variance, std::int64_t periods,
                             double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  if (periods < 1) throw DomainError("confidence interval needs T >= 1");
  if (!(variance >= 0.0)) throw DomainError("variance must be nonnegative");
  const double z = normal_quantile((1.0 + level) / 2.0);
  const double half = z * std::sqrt(variance / static_cast<double>(periods));
  return {estimate - half, estimate + half};
}

EstimateReport make_report(Eigen::VectorXd scores, double level) {
  if (scores.size() < 1) throw DomainError("estimate needs at least one score");
  if (!scores.allFinite()) throw DomainError("non-finite score");
  EstimateReport report;
  report.estimate = scores.mean();
  report.variance = scores.size() >= 2 ? score_variance(scores) : 0.0;
  report.level = level;
  report.ci = confidence_interval(report.estimate, report.variance, scores.size(), level);
  report.scores = std::move(scores);
  return report;
}

MdsDiagnostics mds_diagnostics(const EstimateReport& report, double truth, double psi) {
  MdsDiagnostics out;
  const Eigen::ArrayXd z = report.scores.array() - truth;
  const auto n = static_cast<double>(z.size());
  if (z.size() == 0) return out;
  out.psi = psi;
  out.second_moment = z.square().sum() / n;
  out.second_moment_minus_psi = out.second_moment - psi;
  out.max_abs_score = z.abs().maxCoeff();
  double running = 0.0;
  for (Eigen::Index t = 0; t < z.size(); ++t) {
    running += z[t];
    out.max_abs_running_mean =
        std::max(out.max_abs_running_mean, std::abs(running / static_cast<double>(t + 1)));
  }
  out.centered_running_mean = running / n;
  return out;
}

}  // namespace aope
