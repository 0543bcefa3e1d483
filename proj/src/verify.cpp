#include "mtm/verify.hpp"

#include "mtm/empirical.hpp"
#include "mtm/experiment.hpp"
#include "mtm/families.hpp"
#include "mtm/linalg.hpp"
#include "mtm/rates.hpp"
#include "mtm/spectral.hpp"
#include "mtm/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtm {

namespace {

using Json = nlohmann::ordered_json;

FinitePair uniform_pair(FiniteDistribution target)
{
  const std::size_t n = target.size();
  return FinitePair(std::move(target), FiniteDistribution::uniform(n));
}

FiniteDistribution probs(std::initializer_list<double> p)
{
  Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
  Eigen::Index i = 0;
  for (double x : p)
    v(i++) = x;
  return FiniteDistribution(std::move(v));
}

VerifyCheck comparison(const std::string& name, const FinitePair& pair, std::size_t k_max, HkMode mode)
{
  VerifyCheck c{name, true, {}, Json::array()};
  for (const auto& row : verify_comparison(pair, k_max, mode)) {
    c.values.push_back({{"k", row.k}, {"mtm_rate", row.mtm_rate}, {"imh_k_rate", row.imh_k_rate}, {"gap", row.gap}});
    c.ok = c.ok && row.ok;
  }
  c.detail = c.ok ? "MTM-IS rate >= IMH^k rate, equal at k=1" : "comparison violated";
  return c;
}

VerifyCheck recursive_check()
{
  VerifyCheck c{"recursive-inequality example1 m=20", true, {}, Json::array()};
  const FinitePair pair = uniform_pair(example1_target(20));
  for (std::size_t k = 3; k <= 5; ++k) {
    const InequalityCheck r = verify_recursive_inequality(pair, k, Enumeration{});
    c.values.push_back({{"k", k}, {"left", r.left}, {"right", r.right}, {"margin", r.margin}});
    c.ok = c.ok && r.holds;
  }
  c.detail = "1-H_k(w*) >= (1-H_{k-1}(w*))(1-1/w*) for k=3..5";
  return c;
}

VerifyCheck nonidentical_check()
{
  const FiniteDistribution target = probs({0.5, 0.3, 0.2});
  const std::vector<WeightedPair> pairs = {FinitePair(target, probs({0.4, 0.3, 0.3})),
                                           FinitePair(target, FiniteDistribution::uniform(3))};
  const RateReport r = rate_nonidentical(pairs, Enumeration{});
  double bound = 1.0;
  for (const auto& p : pairs)
    bound *= 1.0 - 1.0 / finite_w_star(p);
  VerifyCheck c{"nonidentical-bound", r.rate - bound >= -1e-12, "rate >= product of (1-1/w_j*)", Json::object()};
  c.values = {{"rate", r.rate}, {"bound", bound}, {"gap", r.rate - bound}};
  return c;
}

VerifyCheck stratified_check()
{
  const FiniteDistribution target = example1_target(10);
  const FiniteDistribution proposal = FiniteDistribution::uniform(10);
  const Partition part = Partition::pairing(10);
  const TransitionMatrix a = build_kernel_enumerated(StratifiedDesign(target, proposal, part));
  double worst = 0.0;
  for (State x = 0; x < a.size(); ++x)
    worst = std::max(worst, tv_distance(n_step_distribution(a, x, 1), target.probs()));
  const double rate = stratified_rate(target, proposal, part).rate;
  VerifyCheck c{"stratified-one-step example1 m=10", worst <= 1e-12 && std::abs(rate) <= 4 * std::numeric_limits<double>::epsilon(),
                "pairing partition reaches the target in one step", Json::object()};
  c.values = {{"max_tv_after_one_step", worst}, {"rate", rate}};
  return c;
}

VerifyCheck example4_check()
{
  const std::size_t n = 5;
  const double p = 0.4;
  const TransitionMatrix a = build_kernel_enumerated(SrsworConfig{example4_target(n, p), 2});
  const Example4ClosedForm cf = example4_closed_form(n, p);
  const double entry_error = (a.entries - example4_matrix(n, p)).cwiseAbs().maxCoeff();
  const SpectrumReport s = spectrum(a);
  const double eig_error = (s.eigenvalues - cf.eigenvalues).cwiseAbs().maxCoeff();
  VerifyCheck c{"example4-closed-form N=5 p=0.4", entry_error <= 1e-12 && eig_error <= 1e-10,
                "SRSWOR kernel and spectrum match the closed form", Json::object()};
  c.values = {{"a", {cf.a1, cf.a2, cf.a3, cf.a4}}, {"entry_error", entry_error}, {"eigenvalue_error", eig_error}};
  return c;
}

VerifyCheck detailed_balance_check()
{
  const FiniteDistribution target = probs({0.4, 0.3, 0.2, 0.1});
  const FiniteDistribution proposal = probs({0.1, 0.2, 0.3, 0.4});
  const FinitePair pair(target, proposal);
  const std::size_t k = 2;
  const JointProposal srs = JointProposal::srswor_excluding_current(4, k);
  const BalancingVerdict cert = verify_balancing_condition(srs);

  std::vector<TransitionMatrix> kernels;
  kernels.push_back(build_kernel_mtm_is(pair, 1));
  kernels.push_back(build_kernel_mtm_is(pair, k));
  kernels.push_back(
    build_kernel_enumerated(MtmGeneralConfig{target, ConditionalProposal::independent(proposal), lambda_one(), k}));
  kernels.push_back(build_kernel_enumerated(GmtmConfig{target, JointProposal::iid(proposal, k), {lambda_one()}, Balancing::draw, std::nullopt}));
  kernels.push_back(build_kernel_enumerated(
    GmtmConfig{target, JointProposal::independent({proposal, FiniteDistribution::uniform(4)}), {lambda_one()},
                 Balancing::draw, std::nullopt}));
  kernels.push_back(
    build_kernel_enumerated(GmtmConfig{target, srs, {lambda_one()}, Balancing::skip, cert.certificate}));
  kernels.push_back(build_kernel_enumerated(SrsworConfig{target, k}));
  kernels.push_back(build_kernel_enumerated(Srswor2Config{target, k}));
  kernels.push_back(build_kernel_enumerated(StratifiedDesign(target, proposal, Partition::pairing(4))));

  VerifyCheck c{"detailed-balance 4-state", true, "pi(x)A(x,y) = pi(y)A(y,x) for every sampler", Json::array()};
  for (const auto& a : kernels) {
    const KernelDiagnostics d = a.diagnose();
    c.values.push_back({{"sampler", a.sampler_tag}, {"flux_asymmetry", d.flux_asymmetry}});
    c.ok = c.ok && d.flux_asymmetry <= 1e-12 && d.max_row_error <= 1e-12;
  }
  return c;
}

VerifyCheck containment_check()
{
  VerifyCheck c{"spectrum-in-rejection-values", true, "nonunit eigenvalues lie in {R(x)}", Json::array()};
  const std::vector<std::pair<std::string, FinitePair>> cases = {
    {"example1 m=5", uniform_pair(example1_target(5))},
    {"binomial m=20", uniform_pair(binomial_target(20, 0.5))}};
  for (const auto& [label, pair] : cases) {
    for (std::size_t k = 1; k <= 3; ++k) {
      const SpectrumReport s = spectrum(build_kernel_mtm_is(pair, k));
      double worst = 0.0;
      for (Eigen::Index i = 1; i < s.eigenvalues.size(); ++i)
        worst = std::max(worst, (s.rejection_values.array() - s.eigenvalues(i)).abs().minCoeff());
      c.values.push_back({{"case", label}, {"k", k}, {"max_distance", worst}});
      c.ok = c.ok && worst <= 1e-8;
    }
  }
  return c;
}

VerifyCheck decay_check()
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const std::size_t k = 2;
  const TransitionMatrix a = build_kernel_mtm_is(pair, k);
  const double rate = exact_rate_mtm_is(pair, k, Enumeration{}).rate;
  const State xs = pair.argmax_weight();
  const double pi_star = pair.target()(xs);
  const DecayCurve d = variation_curve(a, 12);
  const DecayCurve chi = chi_square_curve(a, xs, 20);
  double identity_error = 0.0;
  double chi_slack = std::numeric_limits<double>::infinity();
  for (const auto& pt : d.points) {
    const double predicted = (1.0 - pi_star) * std::pow(rate, static_cast<double>(pt.n));
    identity_error = std::max(identity_error, std::abs(pt.value - predicted) / (predicted + 1e-15));
  }
  for (std::size_t i = 1; i < chi.points.size(); ++i)
    chi_slack = std::min(chi_slack, std::pow(rate, static_cast<double>(i)) * chi.points[0].value - chi.points[i].value);
  const double fitted = fit_rate(d);
  VerifyCheck c{"decay example1 m=5 k=2",
                identity_error <= 1e-8 && chi_slack >= -1e-12 && std::abs(fitted - rate) <= 1e-8,
                "d(n) = (1-pi(x*))(1-H_k(w*))^n; chi-square contracts at rate 1-H_k(w*)", Json::object()};
  c.values = {{"rate", rate},
              {"fitted_rate", fitted},
              {"identity_relative_error", identity_error},
              {"chi_square_min_slack", chi_slack}};
  return c;
}

VerifyCheck example1_mc_check(std::uint64_t seed)
{
  const FinitePair pair = uniform_pair(example1_target(1000));
  VerifyCheck c = comparison("comparison example1 m=1000 monte-carlo", pair, 10, MonteCarlo{50000, seed});
  const double imh = rate_imh_repeated(pair, 1).rate;
  c.ok = c.ok && std::abs(imh - 0.49975) <= 1e-6;
  c.detail += "; IMH rate 1-1/w* with w*=1.999";
  return c;
}

/// Binomial standard error at the hypothesised proportion; stays positive when no replica survives.
double score_se(double p, std::uint64_t replicas) { return std::sqrt(p * (1.0 - p) / static_cast<double>(replicas)); }

VerifyCheck coupling_check(std::uint64_t seed)
{
  const FinitePair pair = uniform_pair(example1_target(5));
  const std::size_t k = 2;
  const State x0 = pair.argmax_weight();
  const std::uint64_t replicas = 20000;
  const CouplingResult r = coupling_survival(pair, k, x0, 15, replicas, seed);
  const TransitionMatrix a = build_kernel_mtm_is(pair, k);
  bool ok = true;
  Json pts = Json::array();
  for (std::size_t i = 0; i < r.meeting.points.size(); ++i) {
    const double n = static_cast<double>(r.meeting.points[i].n);
    const double se = r.meeting.std_errors[i];
    const double tv = tv_distance(n_step_distribution(a, x0, r.meeting.points[i].n), pair.target().probs());
    const double upper = std::pow(1.0 - r.h_star, n);
    const double survival = r.meeting.points[i].value;
    ok = ok && survival >= tv - 3.0 * std::max(se, score_se(tv, replicas)) &&
         survival <= upper + 3.0 * std::max(se, score_se(upper, replicas)) &&
         std::abs(r.coin.points[i].value - upper) <= 3.0 * score_se(upper, replicas) + 1e-12;
    pts.push_back({{"n", r.meeting.points[i].n}, {"survival", r.meeting.points[i].value}, {"se", se}, {"tv", tv},
                   {"upper", upper}});
  }
  VerifyCheck c{"coupling example1 m=5 k=2", ok, "TV <= P(chains apart) <= (1-H_k(w*))^n", std::move(pts)};
  return c;
}

} // namespace

bool VerifyReport::ok() const
{
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.ok; });
}

Json VerifyReport::to_json() const
{
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["seed"] = seed;
  Json arr = Json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}, {"values", c.values}});
  j["checks"] = std::move(arr);
  j["ok"] = ok();
  return j;
}

VerifyReport run_verify(std::uint64_t seed)
{
  VerifyReport r;
  r.seed = seed;
  for (std::size_t m : {5, 20, 50})
    r.checks.push_back(comparison("comparison example1 m=" + std::to_string(m), uniform_pair(example1_target(m)), 6,
                                  Enumeration{}));
  for (double theta : {0.5, 0.05})
    r.checks.push_back(comparison("comparison binomial m=20 theta=" + format_number(theta),
                                  uniform_pair(binomial_target(20, theta)), 6, Enumeration{}));
  r.checks.push_back(recursive_check());
  r.checks.push_back(nonidentical_check());
  r.checks.push_back(stratified_check());
  r.checks.push_back(example4_check());
  r.checks.push_back(detailed_balance_check());
  r.checks.push_back(containment_check());
  r.checks.push_back(decay_check());
  r.checks.push_back(example1_mc_check(Rng(seed).substream(0)()));
  r.checks.push_back(coupling_check(Rng(seed).substream(1)()));
  return r;
}

} // namespace mtm
