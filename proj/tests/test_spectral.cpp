#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "mtm/families.hpp"
#include "mtm/linalg.hpp"
#include "mtm/rates.hpp"
#include "mtm/spectral.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>

using namespace mtm;
using testing::dist;
using testing::uniform_pair;

namespace {

Eigen::VectorXd library_eigenvalues(const TransitionMatrix& a)
{
  const Eigen::VectorXd s = a.stationary.probs().cwiseSqrt();
  const Eigen::MatrixXd sym = s.asDiagonal() * a.entries * s.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

void check_kernel(const TransitionMatrix& a)
{
  const KernelDiagnostics d = a.diagnose();
  CHECK(d.max_row_error <= 1e-12);
  CHECK(d.stationarity_error <= 1e-12);
  CHECK(d.flux_asymmetry <= 1e-12);
  CHECK(d.min_entry >= 0.0);
}

} // namespace

TEST_CASE("mtm-is kernel on example 1 matches the enumeration oracle")
{
  const TransitionMatrix a = build_kernel_mtm_is(uniform_pair(example1_target(5)), 2);
  for (std::size_t y = 0; y < 5; ++y) {
    CHECK(a.entries(0, static_cast<Eigen::Index>(y)) ==
          doctest::Approx(oracle::example1_m5::kernel_k2_row0[y]).epsilon(1e-13));
    CHECK(a.entries(2, static_cast<Eigen::Index>(y)) ==
          doctest::Approx(oracle::example1_m5::kernel_k2_row2[y]).epsilon(1e-13));
    CHECK(a.entries(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)) ==
          doctest::Approx(oracle::example1_m5::holding_k2[y]).epsilon(1e-13));
  }
  check_kernel(a);
  CHECK(a.sampler_tag == "mtm-is");
}

TEST_CASE("spectrum of the example 1 kernel is the set of rejection values")
{
  const TransitionMatrix a = build_kernel_mtm_is(uniform_pair(example1_target(5)), 2);
  const SpectrumReport s = spectrum(a);
  CHECK(s.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-13));
  for (Eigen::Index i = 1; i < 5; ++i)
    CHECK(s.eigenvalues(i) == doctest::Approx(oracle::example1_m5::rejection_k2[static_cast<std::size_t>(i - 1)])
                                .epsilon(1e-12)
                                .scale(1.0));
  CHECK(s.spectral_gap == doctest::Approx(1.0 - oracle::example1_m5::rate_k2).epsilon(1e-12));
  CHECK((s.eigenvalues - library_eigenvalues(a)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("spectral radius equals the exact rate and eigenvalues sit on rejection values")
{
  std::vector<FinitePair> pairs = {uniform_pair(example1_target(5)), uniform_pair(example1_target(20)),
                                   uniform_pair(binomial_target(20, 0.5)), uniform_pair(binomial_target(30, 0.05)),
                                   uniform_pair(FiniteDistribution::uniform(7))};
  for (const auto& pair : pairs) {
    for (std::size_t k = 1; k <= 3; ++k) {
      const TransitionMatrix a = build_kernel_mtm_is(pair, k);
      check_kernel(a);
      const SpectrumReport s = spectrum(a);
      const double radius = 1.0 - s.spectral_gap;
      CHECK(radius == doctest::Approx(exact_rate_mtm_is(pair, k).rate).epsilon(1e-8).scale(1.0));
      for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i)
        CHECK((s.rejection_values.array() - s.eigenvalues(i)).abs().minCoeff() <= 1e-8);
      CHECK((s.eigenvalues - library_eigenvalues(a)).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("example 4 closed form")
{
  const Example4ClosedForm cf = example4_closed_form(5, 0.4);
  CHECK(cf.a1 == doctest::Approx(oracle::example4::a1).epsilon(1e-14));
  CHECK(cf.a2 == doctest::Approx(oracle::example4::a2).epsilon(1e-14));
  CHECK(cf.a3 == doctest::Approx(oracle::example4::a3).epsilon(1e-14));
  CHECK(cf.a4 == doctest::Approx(oracle::example4::a4).epsilon(1e-14));
  const TransitionMatrix a = build_kernel_enumerated(SrsworConfig{example4_target(5, 0.4), 2});
  const SpectrumReport s = spectrum(a);
  for (Eigen::Index i = 0; i < 5; ++i)
    CHECK(s.eigenvalues(i) == doctest::Approx(oracle::example4::eigenvalues[static_cast<std::size_t>(i)]).epsilon(1e-12));
  REQUIRE(s.clusters.size() == 3);
  CHECK(s.clusters[2].multiplicity == 3);
}

TEST_CASE("example 4 structure across sizes and masses")
{
  for (std::size_t n : {4, 5, 8, 10, 12}) {
    const double nd = static_cast<double>(n);
    for (double p : {0.1, 0.25, 0.4, (nd - 1) / (2 * nd)}) {
      const TransitionMatrix a = build_kernel_enumerated(SrsworConfig{example4_target(n, p), 2});
      check_kernel(a);
      CHECK((a.entries - example4_matrix(n, p)).cwiseAbs().maxCoeff() <= 1e-12);
      const Example4ClosedForm cf = example4_closed_form(n, p);
      CHECK((spectrum(a).eigenvalues - cf.eigenvalues).cwiseAbs().maxCoeff() <= 1e-10);
    }
    CHECK(example4_closed_form(n, (nd - 1) / (2 * nd)).dominance);
  }
}

TEST_CASE("every enumerated sampler is reversible")
{
  const FiniteDistribution target = dist({0.4, 0.3, 0.2, 0.1});
  const FiniteDistribution proposal = dist({0.1, 0.2, 0.3, 0.4});
  const JointProposal srs = JointProposal::srswor_excluding_current(4, 2);
  const auto cert = verify_balancing_condition(srs).certificate;
  REQUIRE(cert);
  std::vector<TransitionMatrix> kernels = {
    build_kernel_enumerated(MtmIsConfig{FinitePair(target, proposal), 3}),
    build_kernel_enumerated(
      MtmGeneralConfig{target, ConditionalProposal::independent(proposal), lambda_one(), 2}),
    build_kernel_enumerated(MtmGeneralConfig{
      target, ConditionalProposal::independent(proposal), [](State, State) { return 2.0; }, 3}),
    build_kernel_enumerated(
      GmtmConfig{target, JointProposal::iid(proposal, 2), {lambda_one()}, Balancing::draw, std::nullopt}),
    build_kernel_enumerated(GmtmConfig{target, srs, {lambda_one()}, Balancing::skip, cert}),
    build_kernel_enumerated(SrsworConfig{target, 2}),
    build_kernel_enumerated(Srswor2Config{target, 3}),
    build_kernel_enumerated(StratifiedDesign(target, proposal, Partition({{0, 3}, {1, 2}}, 4)))};
  for (const auto& a : kernels)
    check_kernel(a);
}

TEST_CASE("srswor kernels agree with the enumeration oracle")
{
  const FiniteDistribution target = dist({0.4, 0.3, 0.2, 0.1});
  const TransitionMatrix s1 = build_kernel_enumerated(SrsworConfig{target, 2});
  const TransitionMatrix s2 = build_kernel_enumerated(Srswor2Config{target, 2});
  const TransitionMatrix st =
    build_kernel_enumerated(StratifiedDesign(target, FiniteDistribution::uniform(4), Partition({{0, 1}, {2, 3}}, 4)));
  for (Eigen::Index x = 0; x < 4; ++x)
    for (Eigen::Index y = 0; y < 4; ++y) {
      const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
      CHECK(s1.entries(x, y) == doctest::Approx(oracle::four_state::srswor_k2[ux][uy]).epsilon(1e-13).scale(1.0));
      CHECK(s2.entries(x, y) == doctest::Approx(oracle::four_state::srswor2_k2[ux][uy]).epsilon(1e-13).scale(1.0));
      CHECK(st.entries(x, y) == doctest::Approx(oracle::four_state::stratified[ux][uy]).epsilon(1e-13).scale(1.0));
    }
  const JointProposal srs = JointProposal::srswor_excluding_current(4, 2);
  const TransitionMatrix g = build_kernel_enumerated(
    GmtmConfig{target, srs, {lambda_one()}, Balancing::skip, verify_balancing_condition(srs).certificate});
  CHECK((g.entries - s1.entries).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("general mtm with fresh balancing trials is dominated by mtm-is")
{
  for (std::size_t k = 1; k <= 3; ++k) {
    const FinitePair pair = uniform_pair(example1_target(5));
    const TransitionMatrix gen = build_kernel_enumerated(
      MtmGeneralConfig{pair.target(), ConditionalProposal::independent(pair.proposal()), lambda_one(), k});
    const TransitionMatrix is = build_kernel_mtm_is(pair, k);
    Eigen::MatrixXd diff = is.entries - gen.entries;
    diff.diagonal().setZero();
    if (k == 1)
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12);
    else
      CHECK(diff.minCoeff() >= -1e-12);
  }
}

TEST_CASE("srswor including the current state fails balancing but stays reversible with balancing trials")
{
  const FiniteDistribution target = dist({0.4, 0.3, 0.2, 0.1});
  const JointProposal inc = JointProposal::srswor_including_current(4, 2);
  CHECK_FALSE(verify_balancing_condition(inc).holds);
  const TransitionMatrix a = build_kernel_enumerated(
    GmtmConfig{target, inc, {lambda_one()}, Balancing::draw, std::nullopt});
  CHECK(a.diagnose().flux_asymmetry <= 1e-12);
}

TEST_CASE("jacobi against the library solver on random symmetric matrices")
{
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.uniform_index(40));
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        m(i, j) = m(j, i) = rng.uniform() - 0.5;
    const JacobiResult r = jacobi_eigenvalues(m);
    CHECK(r.converged);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    CHECK((r.eigenvalues - solver.eigenvalues().reverse()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("distances")
{
  const Eigen::VectorXd pi = testing::vec({0.5, 0.5});
  CHECK(tv_distance(pi, testing::vec({1.0, 0.0})) == doctest::Approx(0.5));
  CHECK(chi_square_distance(pi, testing::vec({1.0, 0.0})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(chi_square_distance(testing::vec({1.0, 0.0}), testing::vec({0.5, 0.5})), DomainError);
  const auto clusters = cluster_eigenvalues(testing::vec({1.0, 0.5, 0.5 + 1e-12, 0.1}));
  REQUIRE(clusters.size() == 3);
  CHECK(clusters[1].multiplicity == 2);
}

TEST_CASE("non-reversible kernels are refused")
{
  TransitionMatrix a = build_kernel_mtm_is(uniform_pair(example1_target(3)), 1);
  a.entries << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0;
  a.stationary = FiniteDistribution::uniform(3);
  CHECK_THROWS_AS(spectrum(a), InvalidConfiguration);
  CHECK_THROWS_AS(build_kernel_mtm_is(uniform_pair(example1_target(30)), 2, 10), BudgetExceeded);
}
