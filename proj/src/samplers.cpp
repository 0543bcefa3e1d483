#include "mtm/samplers.hpp"

#include <cmath>
#include <string>

namespace mtm {

ConditionalProposal::ConditionalProposal(Eigen::MatrixXd rows)
{
  if (rows.rows() == 0 || rows.rows() != rows.cols())
    throw InvalidConfiguration("conditional proposal must be a nonempty square matrix");
  rows_.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index x = 0; x < rows.rows(); ++x) {
    const double s = rows.row(x).sum();
    if (std::abs(s - 1.0) > 1e-12)
      throw DomainError("row " + std::to_string(x) + " of the conditional proposal sums to " + std::to_string(s));
    rows_.emplace_back(rows.row(x).transpose());
  }
}

ConditionalProposal ConditionalProposal::independent(const FiniteDistribution& proposal)
{
  const auto n = static_cast<Eigen::Index>(proposal.size());
  Eigen::MatrixXd rows(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    rows.row(x) = proposal.probs().transpose();
  return ConditionalProposal(std::move(rows));
}

namespace {

void check_in_space(std::size_t n, State x)
{
  if (x >= n)
    throw UnsupportedState("state " + std::to_string(x) + " is outside {0.." + std::to_string(n - 1) + "}");
}

/// w(to, from) = pi(to) lambda(from, to) / T(from, to).
double mtm_general_weight(const FiniteDistribution& target, const ConditionalProposal& proposal,
                          const SymmetricFunction& lambda, State from, State to)
{
  const double p = target(to);
  if (p == 0.0)
    return 0.0;
  return p * lambda(from, to) / proposal(from, to);
}

const SymmetricFunction& lambda_for(const std::vector<SymmetricFunction>& lambdas, std::size_t j)
{
  return lambdas.size() == 1 ? lambdas.front() : lambdas[j];
}

} // namespace

StepOutcome<State> mtm_general_step(const FiniteDistribution& target, const ConditionalProposal& proposal,
                                    const SymmetricFunction& lambda, std::size_t k, State x, Rng& rng)
{
  if (k == 0)
    throw InvalidConfiguration("mtm-general needs k >= 1");
  if (proposal.size() != target.size())
    throw InvalidConfiguration("target and conditional proposal live on different state spaces");
  check_in_space(target.size(), x);
  std::vector<State> trials(k);
  std::vector<double> w(k);
  for (std::size_t j = 0; j < k; ++j) {
    trials[j] = proposal.sample(x, rng);
    w[j] = mtm_general_weight(target, proposal, lambda, x, trials[j]);
  }
  return detail::select_and_accept(x, std::move(trials), w, rng, [&](std::size_t sel, const std::vector<State>& ys) {
    const State y = ys[sel];
    // The reverse move y -> x is impossible, so the forward move must be rejected.
    if (proposal(y, x) == 0.0 && target(x) > 0.0)
      return -1.0;
    CompensatedSum<> den;
    for (std::size_t j = 0; j + 1 < k; ++j)
      den += mtm_general_weight(target, proposal, lambda, y, proposal.sample(y, rng));
    den += mtm_general_weight(target, proposal, lambda, y, x);
    return den.value();
  });
}

StepOutcome<State> generalized_mtm_step(const FiniteDistribution& target, const JointProposal& joint,
                                        const std::vector<SymmetricFunction>& lambdas, State x, Rng& rng,
                                        Balancing balancing, const BalancingCertificate* certificate)
{
  const std::size_t k = joint.k();
  if (lambdas.size() != 1 && lambdas.size() != k)
    throw InvalidConfiguration("generalized mtm needs one lambda or one per trial");
  if (target.size() != joint.state_count())
    throw InvalidConfiguration("target and joint proposal live on different state spaces");
  if (balancing == Balancing::skip && (certificate == nullptr || !certificate->covers(joint)))
    throw InvalidConfiguration(std::string("skipping balancing trials needs a certificate from "
                                           "verify_balancing_condition for this ") +
                               to_string(joint.kind()) + " joint");
  check_in_space(target.size(), x);
  std::vector<State> trials = joint.sample(x, rng);
  std::vector<double> w(k);
  for (std::size_t j = 0; j < k; ++j)
    w[j] = generalized_weight(target, j, x, trials[j], joint, lambda_for(lambdas, j));
  return detail::select_and_accept(x, std::move(trials), w, rng, [&](std::size_t sel, const std::vector<State>& ys) {
    const State y = ys[sel];
    const double reverse = joint.marginal(sel, y, x);
    if (reverse == 0.0 && target(x) > 0.0)
      return -1.0;
    std::vector<State> balancing_trials = balancing == Balancing::skip ? ys : joint.sample_conditional(y, sel, x, rng);
    CompensatedSum<> den;
    for (std::size_t i = 0; i < k; ++i) {
      if (i == sel)
        den += generalized_weight(target, i, y, x, joint, lambda_for(lambdas, i));
      else
        den += generalized_weight(target, i, y, balancing_trials[i], joint, lambda_for(lambdas, i));
    }
    return den.value();
  });
}

StepOutcome<State> mtm_srswor_step(const FiniteDistribution& target, std::size_t k, State x, Rng& rng)
{
  const std::size_t n = target.size();
  if (k == 0 || k >= n)
    throw InvalidConfiguration("srswor needs 1 <= k <= N-1 (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  check_in_space(n, x);
  std::vector<State> trials = draw_distinct_states(n, k, {x}, rng);
  std::vector<double> w(k);
  for (std::size_t j = 0; j < k; ++j)
    w[j] = target(trials[j]);
  return detail::select_and_accept(x, std::move(trials), w, rng, [&](std::size_t sel, const std::vector<State>&) {
    CompensatedSum<> den;
    for (std::size_t j = 0; j < k; ++j)
      if (j != sel)
        den += w[j];
    den += target(x);
    return den.value();
  });
}

StepOutcome<State> mtm_srswor2_step(const FiniteDistribution& target, std::size_t k, State x, Rng& rng)
{
  const std::size_t n = target.size();
  if (k == 0 || k > n)
    throw InvalidConfiguration("srswor2 needs 1 <= k <= N (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  check_in_space(n, x);
  std::vector<State> trials = draw_distinct_states(n, k, {}, rng);
  std::vector<double> w(k);
  bool contains_current = false;
  for (std::size_t j = 0; j < k; ++j) {
    w[j] = target(trials[j]);
    contains_current = contains_current || trials[j] == x;
  }
  return detail::select_and_accept(x, std::move(trials), w, rng, [&](std::size_t sel, const std::vector<State>&) {
    CompensatedSum<> den;
    for (std::size_t j = 0; j < k; ++j)
      if (j != sel)
        den += w[j];
    // With x among the trials the selected state is accepted outright: use W itself.
    den += contains_current ? w[sel] : target(x);
    return den.value();
  });
}

StepOutcome<State> stratified_imh_step(const StratifiedDesign& design, State x, Rng& rng)
{
  const std::size_t current_block = design.partition().block_of(x);
  const std::size_t b = design.block_proposal().sample(rng);
  const State y = design.within_block(b).sample(rng);
  const double wx = design.block_weights()(static_cast<Eigen::Index>(current_block));
  const double wb = design.block_weights()(static_cast<Eigen::Index>(b));
  StepOutcome<State> out;
  out.next = x;
  out.proposal_set = {y};
  if (b == current_block)
    out.acceptance_ratio = 1.0;
  else
    out.acceptance_ratio = std::isinf(wx) ? 0.0 : std::min(1.0, wb / wx);
  out.accepted = rng.uniform() < out.acceptance_ratio;
  if (out.accepted)
    out.next = y;
  return out;
}

} // namespace mtm
