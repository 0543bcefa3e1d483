#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "mtm/families.hpp"
#include "mtm/rates.hpp"
#include "mtm/stratified.hpp"

#include "oracles.hpp"
#include "support.hpp"

using namespace mtm;
using testing::dist;
using testing::uniform_pair;

TEST_CASE("H_k on example 1")
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const HkEvaluator h2(pair, 2);
  CHECK(h2(1.8).value == doctest::Approx(oracle::example1_m5::h2_at_w_star).epsilon(1e-14));
  CHECK(h2(1.8).method == "exact-enum");
  const HkEvaluator h1(pair, 1);
  CHECK(h1(4.0).value == 0.25);
  CHECK(h1(4.0).method == "closed-form");
  CHECK_THROWS_AS(h2(0.0), DomainError);
  CHECK_THROWS_AS(h2(-1.0), DomainError);
  CHECK_THROWS_AS(HkEvaluator(pair, 0), InvalidConfiguration);
}

TEST_CASE("exact rates and the IMH^k baseline")
{
  const FinitePair pair = uniform_pair(example1_target(5));
  CHECK(exact_rate_mtm_is(pair, 2).rate == doctest::Approx(oracle::example1_m5::rate_k2).epsilon(1e-14));
  CHECK(exact_rate_mtm_is(pair, 3).rate == doctest::Approx(oracle::example1_m5::rate_k3).epsilon(1e-14));
  CHECK(rate_imh_repeated(pair, 2).rate == doctest::Approx(oracle::example1_m5::imh2_rate).epsilon(1e-14));
  CHECK(rate_imh_repeated(pair, 2).method == "closed-form");
  const FinitePair big = uniform_pair(example1_target(1000));
  CHECK(rate_imh_repeated(big, 1).rate == doctest::Approx(1.0 - 1.0 / 1.999).epsilon(1e-13));
}

TEST_CASE("H_k is strictly decreasing in z and the rate lies in [0, 1)")
{
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(8);
    Eigen::VectorXd p(static_cast<Eigen::Index>(n)), q(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      p(i) = rng.uniform() + 0.05;
      q(i) = rng.uniform() + 0.05;
    }
    const FinitePair pair{FiniteDistribution(p), FiniteDistribution(q)};
    for (std::size_t k = 1; k <= 4; ++k) {
      const HkEvaluator h(pair, k);
      double prev = h(0.1).value;
      for (double z = 0.2; z < 5.0; z += 0.3) {
        const double v = h(z).value;
        CHECK(v < prev);
        prev = v;
      }
      const double at_star = h(pair.w_star()).value;
      CHECK(at_star > 0.0);
      CHECK(at_star <= 1.0 + 1e-15);
    }
  }
}

TEST_CASE("monte carlo H_k agrees with enumeration in most replications")
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const double exact = oracle::example1_m5::h2_at_w_star;
  for (std::uint64_t n : {1000ull, 10000ull, 100000ull}) {
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Estimate e = HkEvaluator(pair, 2, MonteCarlo{n, seed})(1.8);
      CHECK(e.samples == n);
      CHECK(e.method == "monte-carlo");
      inside += std::abs(e.value - exact) <= 3.0 * e.std_error ? 1 : 0;
    }
    CHECK(inside >= 99);
  }
}

TEST_CASE("monte carlo estimates replay from a seed")
{
  const FinitePair pair = uniform_pair(example1_target(50));
  const RateReport a = exact_rate_mtm_is(pair, 4, MonteCarlo{20000, 5});
  const RateReport b = exact_rate_mtm_is(pair, 4, MonteCarlo{20000, 5});
  CHECK(a.rate == b.rate);
  CHECK(a.std_error == b.std_error);
  CHECK(a.samples_used == 20000);
}

TEST_CASE("continuous pairs refuse enumeration")
{
  const WeightedPair pair = normal_vs_scaled_t(2.0, 10.0);
  CHECK_THROWS_AS(HkEvaluator(pair, 2, Enumeration{}), InvalidConfiguration);
  const RateReport r = exact_rate_mtm_is(pair, 3, MonteCarlo{20000, 1});
  CHECK(r.method == "monte-carlo");
  CHECK(r.std_error > 0.0);
  CHECK(r.w_star_violations == 0);
  CHECK(rate_imh_repeated(pair, 1).rate == doctest::Approx(1.0 - 1.0 / oracle::example3::c2_w_star).epsilon(1e-8));
}

TEST_CASE("auto mode falls back to monte carlo above the enumeration budget")
{
  const FinitePair pair = uniform_pair(binomial_target(100, 0.5));
  CHECK(exact_rate_mtm_is(pair, 3, AutoMode{5000, 1}).method == "exact-enum");
  CHECK(exact_rate_mtm_is(pair, 6, AutoMode{5000, 1}).method == "monte-carlo");
  CHECK_THROWS_AS(exact_rate_mtm_is(pair, 3, MonteCarlo{0, 1}), InvalidConfiguration);
}

TEST_CASE("rejection probabilities")
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const Eigen::VectorXd r = rejection_values(pair, 2);
  for (State x = 0; x < 5; ++x) {
    CHECK(r(static_cast<Eigen::Index>(x)) ==
          doctest::Approx(oracle::example1_m5::rejection_k2[x]).epsilon(1e-13).scale(1.0));
    CHECK(rejection_probability(pair, 2, x).value == doctest::Approx(r(static_cast<Eigen::Index>(x))).scale(1.0));
  }
  CHECK(r(0) == doctest::Approx(oracle::example1_m5::rate_k2).epsilon(1e-14));
  CHECK(std::abs(r(4)) <= 1e-14);
}

TEST_CASE("comparison rows on example 1 and example 2")
{
  for (const FinitePair& pair : {uniform_pair(example1_target(5)), uniform_pair(binomial_target(20, 0.05))}) {
    const auto rows = verify_comparison(pair, 6);
    REQUIRE(rows.size() == 6);
    CHECK(std::abs(rows[0].gap) <= 1e-12);
    for (const auto& row : rows) {
      CHECK(row.ok);
      CHECK(row.gap >= -1e-12);
      CHECK(row.method != "monte-carlo");
    }
  }
  const auto mc = verify_comparison(uniform_pair(example1_target(200)), 5, MonteCarlo{20000, 3});
  for (const auto& row : mc)
    CHECK(row.gap >= -3.0 * row.mtm_se);
}

TEST_CASE("recursive inequality")
{
  const FinitePair e1 = uniform_pair(example1_target(5));
  const InequalityCheck r = verify_recursive_inequality(e1, 3);
  CHECK(r.left == doctest::Approx(oracle::example1_m5::rate_k3).epsilon(1e-14));
  CHECK(r.right == doctest::Approx(oracle::example1_m5::recursive_right_k3).epsilon(1e-14));
  CHECK(r.holds);
  const InequalityCheck b = verify_recursive_inequality(uniform_pair(binomial_target(20, 0.5)), 3);
  CHECK(b.left == doctest::Approx(oracle::binomial::m20_k3_left).epsilon(1e-12));
  CHECK(b.right == doctest::Approx(oracle::binomial::m20_k3_right).epsilon(1e-12));
  CHECK_THROWS_AS(verify_recursive_inequality(e1, 1), InvalidConfiguration);
}

TEST_CASE("non-identical proposals")
{
  const FiniteDistribution target = dist({0.5, 0.3, 0.2});
  const std::vector<WeightedPair> pairs = {FinitePair(target, dist({0.4, 0.3, 0.3})),
                                           FinitePair(target, FiniteDistribution::uniform(3))};
  CHECK(finite_w_star(pairs[0]) == doctest::Approx(oracle::nonidentical::w1_star));
  CHECK(finite_w_star(pairs[1]) == doctest::Approx(oracle::nonidentical::w2_star));
  const RateReport r = rate_nonidentical(pairs);
  CHECK(r.rate == doctest::Approx(oracle::nonidentical::rate).epsilon(1e-14));
  CHECK(r.rate >= oracle::nonidentical::bound);
  const RateReport mc = rate_nonidentical(pairs, MonteCarlo{100000, 4});
  CHECK(std::abs(mc.rate - oracle::nonidentical::rate) <= 4.0 * mc.std_error);
  const std::vector<WeightedPair> one = {pairs[0]};
  CHECK(rate_nonidentical(one).rate == doctest::Approx(1.0 - 1.0 / 1.25));
  const std::vector<WeightedPair> mismatched = {pairs[0], FinitePair(dist({0.2, 0.3, 0.5}), dist({1, 1, 1}))};
  CHECK_THROWS_AS(rate_nonidentical(mismatched), InvalidConfiguration);
}

TEST_CASE("identical proposals reduce to the iid rate")
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const std::vector<WeightedPair> pairs(3, pair);
  CHECK(rate_nonidentical(pairs).rate == doctest::Approx(oracle::example1_m5::rate_k3).epsilon(1e-13));
}

TEST_CASE("product bound holds for random non-identical proposals")
{
  Rng rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(8);
    const std::size_t k = 2 + rng.uniform_index(3);
    Eigen::VectorXd p(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < p.size(); ++i)
      p(i) = rng.uniform() + 0.05;
    const FiniteDistribution target(p);
    std::vector<WeightedPair> pairs;
    double bound = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      Eigen::VectorXd q(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < q.size(); ++i)
        q(i) = rng.uniform() + 0.05;
      pairs.emplace_back(FinitePair(target, FiniteDistribution(q)));
      bound *= 1.0 - 1.0 / finite_w_star(pairs.back());
    }
    CHECK(rate_nonidentical(pairs).rate >= bound - 1e-12);
  }
}

TEST_CASE("stratified rate")
{
  const FiniteDistribution four = dist({0.4, 0.3, 0.2, 0.1});
  const RateReport r = stratified_rate(four, FiniteDistribution::uniform(4), Partition({{0, 1}, {2, 3}}, 4));
  CHECK(r.rate == doctest::Approx(oracle::four_state::stratified_rate).epsilon(1e-14));
  for (std::size_t m : {2, 10, 100})
    CHECK(stratified_rate(example1_target(m), FiniteDistribution::uniform(m), Partition::pairing(m)).rate <=
          4 * std::numeric_limits<double>::epsilon());
}

TEST_CASE("balancing condition verdicts")
{
  CHECK(verify_balancing_condition(JointProposal::iid(FiniteDistribution::uniform(4), 3)).holds);
  CHECK(verify_balancing_condition(JointProposal::srswor_excluding_current(5, 2)).holds);
  const BalancingVerdict inc = verify_balancing_condition(JointProposal::srswor_including_current(5, 2));
  CHECK_FALSE(inc.holds);
  CHECK_FALSE(inc.certificate);
  CHECK(inc.max_discrepancy > 0.0);
  CHECK_THROWS_AS(verify_balancing_condition(JointProposal::iid(FiniteDistribution::uniform(30), 6), 1000),
                  BudgetExceeded);
}

TEST_CASE("w* must be finite")
{
  const FinitePair pair(dist({0.5, 0.5}), dist({1.0, 0.0}));
  CHECK_THROWS_AS(finite_w_star(pair), InsufficientSpecification);
}
