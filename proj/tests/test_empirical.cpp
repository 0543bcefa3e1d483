#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "mtm/empirical.hpp"
#include "mtm/families.hpp"
#include "mtm/linalg.hpp"
#include "mtm/rates.hpp"

#include "oracles.hpp"
#include "support.hpp"

using namespace mtm;
using testing::uniform_pair;

TEST_CASE("n-step distributions")
{
  const TransitionMatrix a = build_kernel_mtm_is(uniform_pair(example1_target(5)), 2);
  const Eigen::VectorXd p0 = n_step_distribution(a, 3, 0);
  CHECK(p0(3) == 1.0);
  const Eigen::VectorXd p1 = n_step_distribution(a, 0, 1);
  for (std::size_t y = 0; y < 5; ++y)
    CHECK(p1(static_cast<Eigen::Index>(y)) == doctest::Approx(oracle::example1_m5::kernel_k2_row0[y]).epsilon(1e-13));
  CHECK(n_step_distribution(a, 0, 200).isApprox(a.stationary.probs(), 1e-12));
}

TEST_CASE("exact finite decay from the max-weight state")
{
  // On a finite space the max-weight state keeps its own target mass:
  // d(n) = (1 - pi(x*)) (1 - H_k(w*))^n.
  for (std::size_t m : {5, 20}) {
    const FinitePair pair = uniform_pair(example1_target(m));
    for (std::size_t k = 1; k <= 3; ++k) {
      const TransitionMatrix a = build_kernel_mtm_is(pair, k);
      const double rate = exact_rate_mtm_is(pair, k).rate;
      const double pi_star = pair.target()(pair.argmax_weight());
      const DecayCurve d = variation_curve(a, 12);
      for (const auto& pt : d.points) {
        const double bound = std::pow(rate, static_cast<double>(pt.n));
        CHECK(pt.value <= bound + 1e-15);
        CHECK(pt.value == doctest::Approx((1.0 - pi_star) * bound).epsilon(1e-8).scale(1e-7));
      }
      CHECK(fit_rate(d) == doctest::Approx(rate).epsilon(1e-8));
    }
  }
}

TEST_CASE("maximal variation is non-increasing")
{
  for (const FinitePair& pair : {uniform_pair(example1_target(10)), uniform_pair(binomial_target(20, 0.05))}) {
    const DecayCurve d = variation_curve(build_kernel_mtm_is(pair, 2), 25);
    for (std::size_t i = 1; i < d.points.size(); ++i)
      CHECK(d.points[i].value <= d.points[i - 1].value + 1e-12);
  }
  CHECK_THROWS_AS(maximal_variation(build_kernel_mtm_is(uniform_pair(example1_target(5)), 2), 0), DomainError);
}

TEST_CASE("finite lower bound from the holding probability")
{
  // TV(A^n(x,.), pi) >= A^n(x,{x}) - pi(x) >= R(x)^n - pi(x).
  const FinitePair pair = uniform_pair(example1_target(5));
  const TransitionMatrix a = build_kernel_mtm_is(pair, 2);
  const Eigen::VectorXd r = rejection_values(pair, 2);
  for (State x = 0; x < 5; ++x)
    for (std::size_t n = 1; n <= 10; ++n) {
      const Eigen::VectorXd p = n_step_distribution(a, x, n);
      const auto ix = static_cast<Eigen::Index>(x);
      const double tv = tv_distance(p, pair.target().probs());
      CHECK(tv >= p(ix) - pair.target()(x) - 1e-12);
      CHECK(tv >= std::pow(r(ix), static_cast<double>(n)) - pair.target()(x) - 1e-12);
    }
}

TEST_CASE("chi-square contracts at the exact rate")
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const TransitionMatrix a = build_kernel_mtm_is(pair, 2);
  const double rate = oracle::example1_m5::rate_k2;
  const DecayCurve chi = chi_square_curve(a, 0, 20);
  CHECK(chi.kind == CurveKind::chi_square);
  CHECK(chi.points.front().n == 0);
  for (std::size_t i = 1; i < chi.points.size(); ++i)
    CHECK(chi.points[i].value <= std::pow(rate, static_cast<double>(i)) * chi.points[0].value + 1e-12);
}

TEST_CASE("rate fitting")
{
  DecayCurve c;
  c.kind = CurveKind::tv;
  for (std::size_t n = 1; n <= 20; ++n)
    c.points.push_back({n, 3.0 * std::pow(0.7, static_cast<double>(n))});
  CHECK(fit_rate(c) == doctest::Approx(0.7).epsilon(1e-12));
  DecayCurve tiny;
  tiny.points = {{1, 0.5}, {2, 0.0}};
  CHECK_THROWS_AS(fit_rate(tiny), DomainError);
}

TEST_CASE("coupling survival")
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const CouplingResult r = coupling_survival(pair, 2, 0, 15, 100000, 77);
  CHECK(r.h_star == doctest::Approx(oracle::example1_m5::h2_at_w_star).epsilon(1e-13));
  const TransitionMatrix a = build_kernel_mtm_is(pair, 2);
  REQUIRE(r.meeting.points.size() == 15);
  for (std::size_t i = 0; i < 15; ++i) {
    const double n = static_cast<double>(i + 1);
    const double bound = std::pow(1.0 - r.h_star, n);
    const double score = std::sqrt(bound * (1 - bound) / 1e5);
    CHECK(std::abs(r.coin.points[i].value - bound) <= 3.0 * score + 1e-12);
    const double tv = tv_distance(n_step_distribution(a, 0, i + 1), pair.target().probs());
    const double se = std::max(r.meeting.std_errors[i], std::sqrt(tv * (1 - tv) / 1e5));
    CHECK(r.meeting.points[i].value >= tv - 3.0 * se);
    CHECK(r.meeting.points[i].value <= r.coin.points[i].value + 1e-15);
  }
  const CouplingResult again = coupling_survival(pair, 2, 0, 15, 100000, 77);
  CHECK(again.meeting.points[3].value == r.meeting.points[3].value);
}
