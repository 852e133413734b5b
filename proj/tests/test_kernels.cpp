#include "adaptive_ope/kernels.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace aope;
using namespace aope::test;

namespace {

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

// Golden-section minimizer on [lo, hi].
template <typename F>
double golden_min(F f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - r * (b - a);
    d = a + r * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("gaussian kernel entries") {
  Eigen::MatrixXd a(2, 1);
  a << 0.0, 1.0;
  Eigen::MatrixXd b(1, 1);
  b << 3.0;
  const Eigen::MatrixXd k = gaussian_kernel(a, b, 0.5);
  CHECK(k(0, 0) == doctest::Approx(std::exp(-4.5)));
  CHECK(k(1, 0) == doctest::Approx(std::exp(-2.0)));
  const Eigen::VectorXd v = gaussian_kernel_vector(a, vec({3.0}), 0.5);
  CHECK(v[0] == doctest::Approx(k(0, 0)));
  CHECK(gaussian_kernel(Eigen::MatrixXd(3, 0), Eigen::MatrixXd(2, 0), 1.0).sum() == 6.0);
}

TEST_CASE("kernel ridge single point") {
  Eigen::MatrixXd x(1, 2);
  x << 0.3, -0.2;
  Eigen::VectorXd y(1);
  y << 1.0;
  KernelRidge<> fit(x, y, 1.0, 0.1);
  CHECK(fit.predict(vec({0.3, -0.2})) == doctest::Approx(0.5));
  const double far = fit.predict(vec({1.3, -0.2}));
  CHECK(far == doctest::Approx(0.5 * std::exp(-0.1)));
}

TEST_CASE("kernel ridge two points against a 2x2 inverse") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  Eigen::VectorXd y(2);
  y << 2.0, -1.0;
  const double g = 1.0, lam = 0.5, e = std::exp(-1.0);
  KernelRidge<> fit(x, y, lam, g);
  // (K + lam I)^{-1} by the adjugate
  const double a = 1.0 + lam, det = a * a - e * e;
  const double c0 = (a * y[0] - e * y[1]) / det;
  const double c1 = (-e * y[0] + a * y[1]) / det;
  const double at = 0.4;
  const double expected = c0 * std::exp(-g * at * at) + c1 * std::exp(-g * (at - 1) * (at - 1));
  CHECK(fit.predict(vec({at})) == doctest::Approx(expected));
  Eigen::MatrixXd q(2, 1);
  q << at, 0.0;
  const Eigen::VectorXd rows = fit.predict_rows(q);
  CHECK(rows[0] == doctest::Approx(expected));
  CHECK(rows[1] == doctest::Approx(c0 + c1 * e));
}

TEST_CASE("kernel ridge is linear in y and centering shifts by the mean") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd x(12, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
  Eigen::VectorXd y1(12), y2(12);
  for (int i = 0; i < 12; ++i) {
    y1[i] = n01(rng);
    y2[i] = n01(rng);
  }
  const Covariate at = vec({0.1, 0.2, -0.4});
  const double p1 = KernelRidge<>(x, y1, 0.1, 0.1).predict(at);
  const double p2 = KernelRidge<>(x, y2, 0.1, 0.1).predict(at);
  const double p12 = KernelRidge<>(x, (2.0 * y1 - 3.0 * y2).eval(), 0.1, 0.1).predict(at);
  CHECK(p12 == doctest::Approx(2.0 * p1 - 3.0 * p2));

  const KernelRidge<> centered(x, y1, 0.1, 0.1, true);
  const double m = y1.mean();
  const double raw = KernelRidge<>(x, (y1.array() - m).matrix().eval(), 0.1, 0.1).predict(at);
  CHECK(centered.offset() == doctest::Approx(m));
  CHECK(centered.predict(at) == doctest::Approx(m + raw));
  // Far from every point the centered fit returns the mean.
  Covariate far = vec({100.0, 100.0, 100.0});
  CHECK(centered.predict(far) == doctest::Approx(m));
}

TEST_CASE("kernel ridge rejects nonpositive penalty") {
  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  CHECK_THROWS_AS(KernelRidge<>(x, y, 0.0, 1.0), std::domain_error);
}

TEST_CASE("kernel logistic without covariates matches a 1-d oracle") {
  // Without covariates every score is the same sum s_c, the penalty is (lambda/2) sum_c s_c^2
  // and the optimum is s_1 = -s_2 = beta.
  const std::vector<int> labels{0, 0, 0, 1};
  const double lambda = 1.0;
  Eigen::MatrixXd x(4, 0);
  KernelLogistic<> fit(x, labels, 2, lambda, 0.1);
  auto loss = [&](double b) {
    return -0.75 * std::log(sigmoid(2 * b)) - 0.25 * std::log(sigmoid(-2 * b)) + lambda * b * b;
  };
  const double beta = golden_min(loss, -5.0, 5.0);
  const Eigen::VectorXd p = fit.probabilities(Covariate(0));
  CHECK(p[0] == doctest::Approx(sigmoid(2 * beta)).epsilon(1e-5));
  CHECK(p.sum() == doctest::Approx(1.0));
  CHECK(fit.iterations() < 5000);
}

TEST_CASE("kernel logistic learns a separable split") {
  Eigen::MatrixXd x(40, 1);
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = -2.0 + 4.0 * i / 39.0;
    labels.push_back(x(i, 0) < 0 ? 0 : 1);
  }
  KernelLogistic<> fit(x, labels, 2, 0.01, 1.0);
  CHECK(fit.probabilities(vec({-1.5}))[0] > 0.8);
  CHECK(fit.probabilities(vec({1.5}))[1] > 0.8);
  const Eigen::MatrixXd rows = fit.probabilities_rows(x);
  CHECK(rows.rowwise().sum().isApprox(Eigen::VectorXd::Ones(40)));
  CHECK(rows(0, 0) == doctest::Approx(fit.probabilities(vec({x(0, 0)}))[0]));
}

TEST_CASE("kernel logistic on an empty sample is uniform") {
  KernelLogistic<> fit(Eigen::MatrixXd(0, 2), {}, 3, 1.0, 1.0);
  const Eigen::VectorXd p = fit.probabilities(vec({0.0, 0.0}));
  for (int c = 0; c < 3; ++c) CHECK(p[c] == doctest::Approx(1.0 / 3.0));
}

}
