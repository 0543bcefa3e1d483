#pragma once

#include "mtm/distributions.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace mtm {

enum class JointKind
{
  iid,
  independent_non_identical,
  srswor_excluding_current,
  srswor_including_current,
  user_correlated
};

const char* to_string(JointKind kind);

/// Ordered trial tuple (y_1, ..., y_k).
using Trials = std::vector<State>;

struct WeightedTrials
{
  Trials trials;
  double probability;
};

/// Caller-supplied correlated joint T(x; y_1, ..., y_k) on a finite space.
///
/// sample_conditional(x, j, v, rng) must return a full tuple with position j equal to v,
/// drawn from T(x; . | y_j = v).
struct UserJoint
{
  std::size_t k = 0;
  std::size_t n_states = 0;
  std::function<Trials(State, Rng&)> sample;
  std::function<Trials(State, std::size_t, State, Rng&)> sample_conditional;
  std::function<double(State, const Trials&)> probability;
};

/// Joint law of the k trials drawn from the current state.
class JointProposal
{
public:
  static JointProposal iid(FiniteDistribution proposal, std::size_t k);
  static JointProposal independent(std::vector<FiniteDistribution> proposals);
  /// Uniform ordered k-subset of X \ {x}; needs k < N.
  static JointProposal srswor_excluding_current(std::size_t n_states, std::size_t k);
  /// Uniform ordered k-subset of X regardless of x; needs k < N.
  static JointProposal srswor_including_current(std::size_t n_states, std::size_t k);
  static JointProposal user_correlated(UserJoint joint);

  JointKind kind() const { return kind_; }
  std::size_t k() const { return k_; }
  std::size_t state_count() const { return n_; }
  /// Identity shared by copies; balancing certificates are bound to it.
  std::uint64_t id() const { return id_; }

  Trials sample(State current, Rng& rng) const;
  /// Full tuple drawn from T(current; . | y_j = fixed).
  Trials sample_conditional(State current, std::size_t j, State fixed, Rng& rng) const;

  /// j-th marginal T_j(current; y).
  double marginal(std::size_t j, State current, State y) const;
  double probability(State current, const Trials& trials) const;
  /// T(current; trials_{-j} | y_j = trials_j); 0 when the marginal vanishes.
  double conditional_probability(State current, std::size_t j, const Trials& trials) const;

  /// Every tuple with positive probability.
  std::vector<WeightedTrials> outcomes(State current) const;
  /// Every tuple with position j equal to fixed and positive conditional probability.
  std::vector<WeightedTrials> conditional_outcomes(State current, std::size_t j, State fixed) const;

  const std::vector<FiniteDistribution>& marginal_laws() const { return laws_; }

private:
  JointProposal(JointKind kind, std::size_t k, std::size_t n);

  void check_state(State x) const;

  JointKind kind_;
  std::size_t k_;
  std::size_t n_;
  std::uint64_t id_;
  std::vector<FiniteDistribution> laws_; ///< per-trial laws for iid / independent kinds
  std::optional<UserJoint> user_;
};

namespace detail {
struct BalancingCertifier;
}

/// Proof that a joint satisfies the balancing-skip condition
/// T(x; y_{-j} | y_j = y) = T(y; y_{-j} | y_j = x). Only verify_balancing_condition
/// issues these; a certificate is valid for the joint (and its copies) it was issued for.
class BalancingCertificate
{
public:
  std::uint64_t joint_id() const { return joint_id_; }
  JointKind kind() const { return kind_; }
  bool covers(const JointProposal& joint) const { return joint.id() == joint_id_; }

private:
  friend struct detail::BalancingCertifier;
  BalancingCertificate(std::uint64_t id, JointKind kind) : joint_id_(id), kind_(kind) {}

  std::uint64_t joint_id_;
  JointKind kind_;
};

/// k distinct states of {0, ..., n-1} minus `excluded` (sorted ascending, distinct), in
/// uniformly random order. Partial Fisher-Yates, O(k) work.
Trials draw_distinct_states(std::size_t n, std::size_t k, const std::vector<State>& excluded, Rng& rng);

/// Symmetric nonnegative lambda(x, y).
using SymmetricFunction = std::function<double(State, State)>;

inline SymmetricFunction lambda_one()
{
  return [](State, State) { return 1.0; };
}

/// pi(y) * lambda(x, y) / T_j(x; y). Zero when pi(y) = 0.
double generalized_weight(const FiniteDistribution& target, std::size_t j, State x, State y,
                          const JointProposal& joint, const SymmetricFunction& lambda);

} // namespace mtm
