#pragma once

#include "mtm/compensated_sum.hpp"
#include "mtm/distributions.hpp"
#include "mtm/joint_proposal.hpp"
#include "mtm/stratified.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mtm {

template <typename S>
struct StepOutcome
{
  S next{};
  bool accepted = false;
  std::vector<S> proposal_set;
  std::size_t selected_index = 0;
  double acceptance_ratio = 0.0;
  /// All trial weights were zero; counted as a rejection.
  bool degenerate = false;
};

namespace detail {

/// Cumulative-sum inversion on nonnegative weights; ties go to the lowest index.
inline std::size_t select_index(const std::vector<double>& w, double total, Rng& rng)
{
  const double u = rng.uniform() * total;
  CompensatedSum<> running;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] <= 0.0)
      continue;
    running += w[j];
    last_positive = j;
    if (u < running.value())
      return j;
  }
  return last_positive;
}

/// Shared tail of every multiple-try step: select J proportional to w, then accept with
/// min{1, W / denominator(J, trials)}. A negative denominator forces a rejection.
template <typename S, typename Denominator>
StepOutcome<S> select_and_accept(S current, std::vector<S> trials, const std::vector<double>& w, Rng& rng,
                                 Denominator&& denominator)
{
  StepOutcome<S> out;
  out.next = current;
  CompensatedSum<> total;
  for (double v : w)
    total += v;
  const double big_w = total.value();
  if (!(big_w > 0.0)) {
    out.proposal_set = std::move(trials);
    out.degenerate = true;
    return out;
  }
  const std::size_t j = select_index(w, big_w, rng);
  const double den = denominator(j, trials);
  double ratio = 1.0;
  if (den > 0.0)
    ratio = std::min(1.0, big_w / den);
  else if (den < 0.0 || std::isnan(den))
    ratio = 0.0;
  out.selected_index = j;
  out.acceptance_ratio = ratio;
  out.accepted = rng.uniform() < ratio;
  if (out.accepted)
    out.next = trials[j];
  out.proposal_set = std::move(trials);
  return out;
}

} // namespace detail

/// Independence Metropolis-Hastings: y ~ T, accept with min{1, w(y)/w(x)}.
template <typename Pair>
StepOutcome<typename Pair::state_type> imh_step(const Pair& pair, typename Pair::state_type x, Rng& rng)
{
  using S = typename Pair::state_type;
  StepOutcome<S> out;
  out.next = x;
  const S y = pair.sample_proposal(rng);
  const double wx = pair.weight(x);
  const double wy = pair.weight(y);
  out.acceptance_ratio = wx > 0.0 ? std::min(1.0, wy / wx) : 1.0;
  out.accepted = rng.uniform() < out.acceptance_ratio;
  if (out.accepted)
    out.next = y;
  out.proposal_set = {y};
  return out;
}

/// MTM-IS(k): k iid trials from T, select J proportional to w(y_j), accept with
/// min{1, W / (W - w(y) + w(x))}.
template <typename Pair>
StepOutcome<typename Pair::state_type> mtm_is_step(const Pair& pair, std::size_t k, typename Pair::state_type x,
                                                   Rng& rng)
{
  using S = typename Pair::state_type;
  if (k == 0)
    throw InvalidConfiguration("mtm-is needs k >= 1");
  std::vector<S> trials(k);
  std::vector<double> w(k);
  for (std::size_t j = 0; j < k; ++j) {
    trials[j] = pair.sample_proposal(rng);
    w[j] = pair.weight(trials[j]);
  }
  const double wx = pair.weight(x);
  return detail::select_and_accept(x, std::move(trials), w, rng, [&](std::size_t sel, const std::vector<S>&) {
    CompensatedSum<> den;
    for (std::size_t j = 0; j < k; ++j)
      if (j != sel)
        den += w[j];
    den += wx;
    return den.value();
  });
}

/// Row-stochastic proposal T(x, y) on {0, ..., N-1}.
class ConditionalProposal
{
public:
  explicit ConditionalProposal(Eigen::MatrixXd rows);
  /// T(x, y) = T(y) for every x.
  static ConditionalProposal independent(const FiniteDistribution& proposal);

  std::size_t size() const { return rows_.size(); }
  double operator()(State x, State y) const { return rows_[x](y); }
  State sample(State x, Rng& rng) const { return rows_[x].sample(rng); }
  const FiniteDistribution& row(State x) const { return rows_[x]; }

private:
  std::vector<FiniteDistribution> rows_;
};

/// General MTM: trials from T(x, .), weights w(y, x) = pi(y) lambda(x, y) / T(x, y),
/// balancing trials from T(y, .) with x*_k = x.
StepOutcome<State> mtm_general_step(const FiniteDistribution& target, const ConditionalProposal& proposal,
                                    const SymmetricFunction& lambda, std::size_t k, State x, Rng& rng);

enum class Balancing
{
  draw,
  skip
};

/// Generalized MTM over a joint proposal, with per-trial lambdas (one shared lambda when a single one is given).
/// Balancing::skip reuses y_i as x*_i and needs a certificate issued for this joint.
StepOutcome<State> generalized_mtm_step(const FiniteDistribution& target, const JointProposal& joint,
                                        const std::vector<SymmetricFunction>& lambdas, State x, Rng& rng,
                                        Balancing balancing = Balancing::draw,
                                        const BalancingCertificate* certificate = nullptr);

/// SRSWOR trials: uniform ordered k-subset of X \ {x}, J proportional to pi; 1 <= k <= N-1.
StepOutcome<State> mtm_srswor_step(const FiniteDistribution& target, std::size_t k, State x, Rng& rng);

/// SRSWOR over all of X: uniform k-subset S; accept outright when x is in S; 1 <= k <= N.
StepOutcome<State> mtm_srswor2_step(const FiniteDistribution& target, std::size_t k, State x, Rng& rng);

/// Block IMH: propose block b proportional to T(X_b), draw y within it proportional to
/// pi, accept with min{1, w(X_b) / w(X_current)}.
StepOutcome<State> stratified_imh_step(const StratifiedDesign& design, State x, Rng& rng);

template <typename S>
struct ChainTrace
{
  std::vector<S> states;
  std::vector<bool> accepted; ///< accepted[i] refers to the move into states[i + 1]
  std::uint64_t acceptance_count = 0;
  std::uint64_t degenerate_count = 0;
  std::string sampler_tag;
  std::uint64_t seed = 0;
};

/// Iterates step(x, rng) `steps` times from x0.
template <typename S, typename Step>
ChainTrace<S> run_chain(Step&& step, S x0, std::uint64_t steps, Rng& rng, std::string sampler_tag = {})
{
  ChainTrace<S> trace;
  trace.sampler_tag = std::move(sampler_tag);
  trace.seed = rng.seed();
  trace.states.reserve(static_cast<std::size_t>(steps) + 1);
  trace.accepted.reserve(static_cast<std::size_t>(steps));
  trace.states.push_back(x0);
  S x = x0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    StepOutcome<S> out = step(x, rng);
    x = out.next;
    trace.states.push_back(x);
    trace.accepted.push_back(out.accepted);
    trace.acceptance_count += out.accepted ? 1 : 0;
    trace.degenerate_count += out.degenerate ? 1 : 0;
  }
  return trace;
}

/// CSV with columns step,state,accepted; row 0 is the start state.
template <typename S>
void write_csv(const ChainTrace<S>& trace, std::ostream& os)
{
  const auto old_precision = os.precision(17);
  os << "step,state,accepted\n";
  for (std::size_t i = 0; i < trace.states.size(); ++i)
    os << i << ',' << trace.states[i] << ',' << (i > 0 && trace.accepted[i - 1] ? 1 : 0) << '\n';
  os.precision(old_precision);
}

} // namespace mtm
