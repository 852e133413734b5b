#include "adaptive_ope/inference.hpp"
#include "test_util.hpp"

#include <random>

using namespace aope;
using namespace aope::test;

TEST_SUITE("inference") {

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.01) == doctest::Approx(-2.326347874040841).epsilon(1e-12));
  for (double p : {1e-6, 0.001, 0.02, 0.3, 0.7, 0.99, 1 - 1e-6}) {
    const double x = normal_quantile(p);
    CHECK(0.5 * std::erfc(-x / std::sqrt(2.0)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
}

TEST_CASE("score variance examples") {
  CHECK(score_variance(vec({1.0, 1.0, 1.0})) == 0.0);
  CHECK(score_variance(vec({0.0, 2.0})) == 1.0);
  CHECK_THROWS_AS(score_variance(vec({1.0})), DomainError);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd s(2 + rep % 7);
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = n01(rng);
    CHECK(score_variance(s) >= 0.0);
  }
}

TEST_CASE("confidence interval examples") {
  const double z = 1.959963984540054;
  auto ci = confidence_interval(0.0, 1.0, 100, 0.95);
  CHECK(near(ci.lo, -0.1959963984540054, 1e-9));
  CHECK(near(ci.hi, 0.1959963984540054, 1e-9));
  ci = confidence_interval(5.0, 0.0, 10, 0.95);
  CHECK(ci.lo == 5.0);
  CHECK(ci.hi == 5.0);
  ci = confidence_interval(1.0, 4.0, 4, 0.95);
  CHECK(near(ci.lo, 1.0 - z, 1e-9));
  CHECK(near(ci.hi, 1.0 + z, 1e-9));
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 10, 1.0), DomainError);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, 10, 0.0), DomainError);
  CHECK_THROWS_AS(confidence_interval(0.0, -1.0, 10, 0.9), DomainError);
}

TEST_CASE("width scales as one over root T") {
  for (std::int64_t t : {1, 4, 9, 100, 12345}) {
    const auto ci = confidence_interval(0.0, 2.0, t, 0.9);
    const auto base = confidence_interval(0.0, 2.0, 1, 0.9);
    CHECK((ci.hi - ci.lo) * std::sqrt(static_cast<double>(t)) ==
          doctest::Approx(base.hi - base.lo).epsilon(1e-12));
  }
}

TEST_CASE("shift equivariance of reports") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd s(10);
    for (Eigen::Index i = 0; i < 10; ++i) s[i] = n01(rng);
    const double c = 3.0 * n01(rng);
    const auto a = make_report(s);
    const auto b = make_report((s.array() + c).matrix());
    CHECK(b.estimate == doctest::Approx(a.estimate + c).epsilon(1e-12));
    CHECK(b.variance == doctest::Approx(a.variance).epsilon(1e-9));
    CHECK(b.ci.lo == doctest::Approx(a.ci.lo + c).epsilon(1e-9));
    CHECK(b.ci.hi == doctest::Approx(a.ci.hi + c).epsilon(1e-9));
  }
}

TEST_CASE("make report rejects bad scores") {
  CHECK_THROWS_AS(make_report(Eigen::VectorXd(0)), DomainError);
  CHECK_THROWS_AS(make_report(vec({1.0, std::nan("")})), DomainError);
  const auto one = make_report(vec({4.0}));
  CHECK(one.variance == 0.0);
  CHECK(one.ci.lo == 4.0);
}

TEST_CASE("mds diagnostics on known scores") {
  const auto r = make_report(vec({1.0, 3.0, -1.0, 1.0}));
  const auto d = mds_diagnostics(r, 1.0, 2.0);
  // Z = (0, 2, -2, 0)
  CHECK(d.second_moment == 2.0);
  CHECK(d.second_moment_minus_psi == 0.0);
  CHECK(d.max_abs_score == 2.0);
  CHECK(d.centered_running_mean == 0.0);
  CHECK(d.max_abs_running_mean == 1.0);
  CHECK(d.psi == 2.0);
}

}
