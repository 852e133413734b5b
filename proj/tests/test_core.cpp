#include "adaptive_ope/core.hpp"
#include "test_util.hpp"

#include <random>

using namespace aope;
using namespace aope::test;

TEST_SUITE("core") {

TEST_CASE("action index is one based and range checked") {
  ActionIndex a(2, 3);
  CHECK(a.value() == 2);
  CHECK(a.zero_based() == 1);
  CHECK(a.num_actions() == 3);
  CHECK_THROWS_AS(ActionIndex(0, 3), IndexError);
  CHECK_THROWS_AS(ActionIndex(4, 3), IndexError);
  CHECK_THROWS_AS(Sample(no_covariate(), ActionIndex(1, 1), 0.0), ConfigurationError);
}

TEST_CASE("ate weight signs") {
  const auto w = ate_weight();
  const Covariate x = vec({0.3, -1.0});
  CHECK(w(ActionIndex(1, 2), x) == -1.0);
  CHECK(w(ActionIndex(2, 2), x) == 1.0);
  CHECK(w.values(x).sum() == 0.0);
  CHECK(w(ActionIndex(1, 2), no_covariate()) == -1.0);
  CHECK_THROWS_AS(ate_weight(3), ConfigurationError);
}

TEST_CASE("sample validates logged policy") {
  CHECK_NOTHROW(two_arm(1, 0.5, vec({0.25, 0.75})));
  CHECK_THROWS_AS(two_arm(1, 0.5, vec({0.25, 0.7})), DomainError);
  CHECK_THROWS_AS(two_arm(1, 0.5, vec({1.2, -0.2})), DomainError);
  CHECK_THROWS_AS(two_arm(1, 0.5, vec({0.2, 0.3, 0.5})), DomainError);
  CHECK_NOTHROW(two_arm(1, 0.5, vec({0.5, 0.5 + 1e-10})));
  CHECK_THROWS(two_arm(1, std::nan("")));
}

TEST_CASE("outcome bound hard check") {
  CHECK_NOTHROW(check_outcome_bound(two_arm(1, 1.0), 1.0));
  CHECK_THROWS_AS(check_outcome_bound(two_arm(1, 1.5), 1.0), DomainError);
}

TEST_CASE("history prefix examples") {
  const History h = covariate_free_history({1, 2, 1}, {0.1, 0.2, 0.3});
  CHECK(history_prefix(h, 0).size() == 0);
  const History p = history_prefix(h, 2);
  REQUIRE(p.size() == 2);
  CHECK(p[0].y == 0.1);
  CHECK(p[1].y == 0.2);
  CHECK(p[1].a.value() == 2);
  CHECK_THROWS_AS(history_prefix(h, 4), IndexError);
  CHECK_THROWS_AS(h.at(3), IndexError);
}

TEST_CASE("appending to a prefix leaves the original untouched") {
  const History h = covariate_free_history({1, 2, 1}, {0.1, 0.2, 0.3});
  const History p = h.prefix(1);
  const History grown = p.append(two_arm(2, 9.0));
  CHECK(grown.size() == 2);
  CHECK(grown[1].y == 9.0);
  CHECK(h[1].y == 0.2);
  CHECK(p.size() == 1);
  CHECK(h.size() == 3);
}

TEST_CASE("prefix monotonicity property") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Sample> s;
    const std::size_t len = 1 + rng() % 30;
    for (std::size_t i = 0; i < len; ++i) {
      s.emplace_back(vec({n01(rng)}), ActionIndex(1 + static_cast<int>(rng() % 3), 3), n01(rng));
    }
    const History h(std::move(s));
    const std::size_t t = rng() % (len + 1);
    const std::size_t u = t == 0 ? 0 : rng() % (t + 1);
    const History direct = history_prefix(h, u);
    const History nested = history_prefix(history_prefix(h, t), u);
    REQUIRE(direct.size() == nested.size());
    for (std::size_t i = 0; i < u; ++i) {
      CHECK(direct[i].y == nested[i].y);
      CHECK(direct[i].a == nested[i].a);
      CHECK(direct[i].x == nested[i].x);
    }
  }
}

TEST_CASE("logged policies sum to one") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd p(4);
    for (int i = 0; i < 4; ++i) p[i] = u(rng);
    p /= p.sum();
    const Sample s(no_covariate(), ActionIndex(1, 4), 0.0, p);
    CHECK(std::abs(s.logged_policy->sum() - 1.0) <= kProbabilitySumTolerance);
  }
}

TEST_CASE("evaluation weight bound is enforced") {
  const EvaluationWeight w(2, [](ActionIndex a, const Covariate&) { return a.value() == 1 ? 3.0 : 0.0; },
                           1.0);
  CHECK_THROWS_AS(w.values(no_covariate()), ContractViolation);
  const auto c = EvaluationWeight::constant(vec({0.25, 0.75}));
  CHECK(c(ActionIndex(2, 2), vec({5.0})) == 0.75);
}

}
