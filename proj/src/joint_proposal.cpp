#include "mtm/joint_proposal.hpp"

#include "mtm/compensated_sum.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <unordered_map>

namespace mtm {

namespace {

std::uint64_t next_joint_id()
{
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

double falling_factorial(std::size_t n, std::size_t k)
{
  double f = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    f *= static_cast<double>(n - i);
  return f;
}

bool all_distinct(const Trials& t)
{
  Trials s = t;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) == s.end();
}

Trials draw_distinct(std::size_t n, std::size_t k, const std::vector<State>& excluded, Rng& rng)
{
  if (excluded.size() > n || k > n - excluded.size())
    throw InvalidConfiguration("cannot draw " + std::to_string(k) + " distinct states from " +
                               std::to_string(n - std::min(n, excluded.size())));
  const std::size_t m = n - excluded.size();
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto at = [&](std::size_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  Trials out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t r = i + static_cast<std::size_t>(rng.uniform_index(m - i));
    std::size_t v = at(r);
    swapped[r] = at(i);
    for (State e : excluded)
      if (v >= e)
        ++v;
    out[i] = v;
  }
  return out;
}

std::vector<State> sorted_excluded(std::initializer_list<State> states)
{
  std::vector<State> v(states);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// All ordered tuples of length len over `pool` with distinct entries.
void distinct_tuples(const std::vector<State>& pool, std::size_t len, Trials& prefix, std::vector<bool>& used,
                     const std::function<void(const Trials&)>& emit)
{
  if (prefix.size() == len) {
    emit(prefix);
    return;
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (used[i])
      continue;
    used[i] = true;
    prefix.push_back(pool[i]);
    distinct_tuples(pool, len, prefix, used, emit);
    prefix.pop_back();
    used[i] = false;
  }
}

/// All tuples of length len over {0..n-1}.
void product_tuples(std::size_t n, std::size_t len, const std::function<void(const Trials&)>& emit)
{
  Trials t(len, 0);
  if (len == 0) {
    emit(t);
    return;
  }
  for (;;) {
    emit(t);
    std::size_t pos = 0;
    while (pos < len && ++t[pos] == n)
      t[pos++] = 0;
    if (pos == len)
      return;
  }
}

} // namespace

Trials draw_distinct_states(std::size_t n, std::size_t k, const std::vector<State>& excluded, Rng& rng)
{
  return draw_distinct(n, k, excluded, rng);
}

const char* to_string(JointKind kind)
{
  switch (kind) {
  case JointKind::iid: return "iid";
  case JointKind::independent_non_identical: return "independent-non-identical";
  case JointKind::srswor_excluding_current: return "srswor-excluding-current";
  case JointKind::srswor_including_current: return "srswor-including-current";
  case JointKind::user_correlated: return "user-correlated";
  }
  return "unknown";
}

JointProposal::JointProposal(JointKind kind, std::size_t k, std::size_t n)
  : kind_(kind), k_(k), n_(n), id_(next_joint_id())
{
  if (k_ == 0)
    throw InvalidConfiguration("a joint proposal needs k >= 1");
  if (n_ == 0)
    throw InvalidConfiguration("a joint proposal needs a nonempty state space");
}

JointProposal JointProposal::iid(FiniteDistribution proposal, std::size_t k)
{
  JointProposal j(JointKind::iid, k, proposal.size());
  j.laws_.assign(k, proposal);
  return j;
}

JointProposal JointProposal::independent(std::vector<FiniteDistribution> proposals)
{
  if (proposals.empty())
    throw InvalidConfiguration("independent joint needs at least one proposal");
  const std::size_t n = proposals.front().size();
  for (const auto& p : proposals)
    if (p.size() != n)
      throw InvalidConfiguration("independent joint proposals live on different state spaces");
  JointProposal j(JointKind::independent_non_identical, proposals.size(), n);
  j.laws_ = std::move(proposals);
  return j;
}

JointProposal JointProposal::srswor_excluding_current(std::size_t n_states, std::size_t k)
{
  if (k >= n_states)
    throw InvalidConfiguration("srswor needs k < N (k=" + std::to_string(k) + ", N=" + std::to_string(n_states) + ")");
  return JointProposal(JointKind::srswor_excluding_current, k, n_states);
}

JointProposal JointProposal::srswor_including_current(std::size_t n_states, std::size_t k)
{
  if (k >= n_states)
    throw InvalidConfiguration("srswor needs k < N (k=" + std::to_string(k) + ", N=" + std::to_string(n_states) + ")");
  return JointProposal(JointKind::srswor_including_current, k, n_states);
}

JointProposal JointProposal::user_correlated(UserJoint joint)
{
  if (!joint.sample || !joint.sample_conditional || !joint.probability)
    throw InvalidConfiguration("user-correlated joint must supply sample, sample_conditional and probability");
  JointProposal j(JointKind::user_correlated, joint.k, joint.n_states);
  j.user_ = std::move(joint);
  return j;
}

void JointProposal::check_state(State x) const
{
  if (x >= n_)
    throw UnsupportedState("state " + std::to_string(x) + " is outside the joint proposal's space");
}

Trials JointProposal::sample(State current, Rng& rng) const
{
  check_state(current);
  switch (kind_) {
  case JointKind::iid:
  case JointKind::independent_non_identical: {
    Trials t(k_);
    for (std::size_t i = 0; i < k_; ++i)
      t[i] = laws_[i].sample(rng);
    return t;
  }
  case JointKind::srswor_excluding_current: return draw_distinct(n_, k_, {current}, rng);
  case JointKind::srswor_including_current: return draw_distinct(n_, k_, {}, rng);
  case JointKind::user_correlated: return user_->sample(current, rng);
  }
  return {};
}

Trials JointProposal::sample_conditional(State current, std::size_t j, State fixed, Rng& rng) const
{
  check_state(current);
  check_state(fixed);
  if (j >= k_)
    throw InvalidConfiguration("trial index out of range");
  Trials t;
  switch (kind_) {
  case JointKind::iid:
  case JointKind::independent_non_identical:
    t.resize(k_);
    for (std::size_t i = 0; i < k_; ++i)
      t[i] = i == j ? fixed : laws_[i].sample(rng);
    return t;
  case JointKind::srswor_excluding_current:
  case JointKind::srswor_including_current: {
    std::vector<State> excluded = kind_ == JointKind::srswor_excluding_current ? sorted_excluded({current, fixed})
                                                                                 : sorted_excluded({fixed});
    if (kind_ == JointKind::srswor_excluding_current && fixed == current)
      throw UnsupportedState("srswor-excluding-current never proposes the current state");
    Trials rest = draw_distinct(n_, k_ - 1, excluded, rng);
    t.reserve(k_);
    for (std::size_t i = 0, r = 0; i < k_; ++i)
      t.push_back(i == j ? fixed : rest[r++]);
    return t;
  }
  case JointKind::user_correlated: return user_->sample_conditional(current, j, fixed, rng);
  }
  return t;
}

double JointProposal::marginal(std::size_t j, State current, State y) const
{
  check_state(current);
  check_state(y);
  switch (kind_) {
  case JointKind::iid:
  case JointKind::independent_non_identical: return laws_.at(j)(y);
  case JointKind::srswor_excluding_current: return y == current ? 0.0 : 1.0 / static_cast<double>(n_ - 1);
  case JointKind::srswor_including_current: return 1.0 / static_cast<double>(n_);
  case JointKind::user_correlated: {
    CompensatedSum<> total;
    product_tuples(n_, k_, [&](const Trials& t) {
      if (t[j] == y)
        total += user_->probability(current, t);
    });
    return total.value();
  }
  }
  return 0.0;
}

double JointProposal::probability(State current, const Trials& trials) const
{
  check_state(current);
  if (trials.size() != k_)
    throw InvalidConfiguration("trial tuple has the wrong length");
  for (State y : trials)
    check_state(y);
  switch (kind_) {
  case JointKind::iid:
  case JointKind::independent_non_identical: {
    double p = 1.0;
    for (std::size_t i = 0; i < k_; ++i)
      p *= laws_[i](trials[i]);
    return p;
  }
  case JointKind::srswor_excluding_current:
    if (!all_distinct(trials) || std::find(trials.begin(), trials.end(), current) != trials.end())
      return 0.0;
    return 1.0 / falling_factorial(n_ - 1, k_);
  case JointKind::srswor_including_current:
    return all_distinct(trials) ? 1.0 / falling_factorial(n_, k_) : 0.0;
  case JointKind::user_correlated: return user_->probability(current, trials);
  }
  return 0.0;
}

double JointProposal::conditional_probability(State current, std::size_t j, const Trials& trials) const
{
  const double m = marginal(j, current, trials.at(j));
  if (m <= 0.0)
    return 0.0;
  return probability(current, trials) / m;
}

std::vector<WeightedTrials> JointProposal::outcomes(State current) const
{
  check_state(current);
  std::vector<WeightedTrials> out;
  auto keep = [&](const Trials& t) {
    const double p = probability(current, t);
    if (p > 0.0)
      out.push_back({t, p});
  };
  if (kind_ == JointKind::srswor_excluding_current || kind_ == JointKind::srswor_including_current) {
    std::vector<State> pool;
    for (State s = 0; s < n_; ++s)
      if (kind_ == JointKind::srswor_including_current || s != current)
        pool.push_back(s);
    Trials prefix;
    std::vector<bool> used(pool.size(), false);
    distinct_tuples(pool, k_, prefix, used, keep);
  } else {
    product_tuples(n_, k_, keep);
  }
  return out;
}

std::vector<WeightedTrials> JointProposal::conditional_outcomes(State current, std::size_t j, State fixed) const
{
  check_state(current);
  check_state(fixed);
  const double m = marginal(j, current, fixed);
  std::vector<WeightedTrials> out;
  if (m <= 0.0)
    return out;
  auto keep = [&](const Trials& rest) {
    Trials t;
    t.reserve(k_);
    for (std::size_t i = 0, r = 0; i < k_; ++i)
      t.push_back(i == j ? fixed : rest[r++]);
    const double p = probability(current, t) / m;
    if (p > 0.0)
      out.push_back({std::move(t), p});
  };
  if (kind_ == JointKind::srswor_excluding_current || kind_ == JointKind::srswor_including_current) {
    std::vector<State> pool;
    for (State s = 0; s < n_; ++s)
      if (s != fixed && (kind_ == JointKind::srswor_including_current || s != current))
        pool.push_back(s);
    Trials prefix;
    std::vector<bool> used(pool.size(), false);
    distinct_tuples(pool, k_ - 1, prefix, used, keep);
  } else {
    product_tuples(n_, k_ - 1, keep);
  }
  return out;
}

double generalized_weight(const FiniteDistribution& target, std::size_t j, State x, State y,
                          const JointProposal& joint, const SymmetricFunction& lambda)
{
  if (target.size() != joint.state_count())
    throw InvalidConfiguration("target and joint proposal live on different state spaces");
  const double p = target(y);
  if (p == 0.0)
    return 0.0;
  const double t = joint.marginal(j, x, y);
  if (!(t > 0.0))
    throw UnsupportedState("trial " + std::to_string(j) + " has zero marginal at state " + std::to_string(y) +
                           " which carries target mass");
  return p * lambda(x, y) / t;
}

} // namespace mtm
