#pragma once

#include "mtm/distributions.hpp"
#include "mtm/joint_proposal.hpp"
#include "mtm/stratified.hpp"
#include "mtm/weight_sum.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mtm {

struct Enumeration
{
};

struct MonteCarlo
{
  std::uint64_t samples = 50'000;
  std::uint64_t seed = 0;
};

/// Enumeration on finite pairs while the weight-law tuple count stays within 1e6 and the
/// weight-sum budget allows, Monte Carlo otherwise.
struct AutoMode
{
  std::uint64_t samples = 50'000;
  std::uint64_t seed = 0;
};

using HkMode = std::variant<Enumeration, MonteCarlo, AutoMode>;

/// A computed value with its provenance. std_error is 0 unless method is "monte-carlo".
struct Estimate
{
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::string method; ///< "exact-enum", "monte-carlo" or "closed-form"
  /// Drawn weights above the declared w* by more than a relative 1e-9.
  std::uint64_t w_star_violations = 0;
};

struct RateReport
{
  double rate = 0.0;
  std::string method;
  double std_error = 0.0;
  std::uint64_t samples_used = 0;
  std::size_t k = 0;
  std::uint64_t w_star_violations = 0;
};

/// H_k(z) = E[k / (z + sum_{i<k} w(X_i))] with X_i iid from the proposal.
class HkEvaluator
{
public:
  HkEvaluator(WeightedPair pair, std::size_t k, HkMode mode = Enumeration{});

  const WeightedPair& pair() const { return pair_; }
  std::size_t k() const { return k_; }
  /// True when values come from the exact weight-sum law (or H_1's closed form).
  bool exact() const { return k_ == 1 || sums_ != nullptr; }

  Estimate operator()(double z) const;

private:
  WeightedPair pair_;
  std::size_t k_;
  HkMode mode_;
  std::shared_ptr<const WeightSumDistribution> sums_;
};

Estimate h_k(const HkEvaluator& eval, double z);

/// 1 - H_k(w*).
RateReport exact_rate_mtm_is(const WeightedPair& pair, std::size_t k, HkMode mode = Enumeration{});

/// (1 - 1/w*)^k.
RateReport rate_imh_repeated(const WeightedPair& pair, std::size_t k);

/// 1 - sum_j E[1 / (w_j* + sum_{i != j} w_i(X_i))] with X_i ~ T_i, one pair per trial.
RateReport rate_nonidentical(std::span<const WeightedPair> proposals, HkMode mode = Enumeration{});

/// R(x) = 1 - sum_y min{H_k(w(x)), H_k(w(y))} pi(y).
Estimate rejection_probability(const FinitePair& pair, std::size_t k, State x, HkMode mode = Enumeration{});
/// Continuous case, always Monte Carlo: 1 - E_T[w(Y) H_k(max{w(x), w(Y)})].
Estimate rejection_probability(const ContinuousPair& pair, std::size_t k, double x, HkMode mode);

/// R(x) for every state, exact.
Eigen::VectorXd rejection_values(const FinitePair& pair, std::size_t k);

struct ComparisonRow
{
  std::size_t k = 0;
  double mtm_rate = 0.0;
  double mtm_se = 0.0;
  double imh_k_rate = 0.0;
  double gap = 0.0;
  bool ok = false;
  std::string method;
  std::uint64_t samples = 0;
};

/// For k = 1..k_max: 1 - H_k(w*) against (1 - 1/w*)^k. Exact rows need gap >= -1e-12
/// (|gap| <= 1e-12 at k = 1); Monte Carlo rows need gap >= -3 SE.
std::vector<ComparisonRow> verify_comparison(const WeightedPair& pair, std::size_t k_max, HkMode mode = Enumeration{});

struct InequalityCheck
{
  double left = 0.0;
  double right = 0.0;
  double margin = 0.0;
  double std_error = 0.0;
  bool holds = false;
  std::string method;
};

/// 1 - H_k(w*) >= (1 - 1/w*) (1 - H_{k-1}(w*)); k >= 2.
InequalityCheck verify_recursive_inequality(const WeightedPair& pair, std::size_t k, HkMode mode = Enumeration{});

/// 1 - 1 / max_j w(X_j) with w(X_j) = pi(X_j) / T(X_j).
RateReport stratified_rate(const FiniteDistribution& target, const FiniteDistribution& proposal,
                           const Partition& partition);

struct BalancingVerdict
{
  bool holds = false;
  double max_discrepancy = 0.0;
  std::uint64_t checked = 0;
  std::optional<BalancingCertificate> certificate;
};

/// Exhaustive check of T(x; y_{-j} | y_j = y) = T(y; y_{-j} | y_j = x) within 1e-12.
/// Throws BudgetExceeded past `budget` tuple evaluations.
BalancingVerdict verify_balancing_condition(const JointProposal& joint, std::uint64_t budget = 100'000'000);

/// w* as a finite number, or InsufficientSpecification.
double finite_w_star(const WeightedPair& pair);

} // namespace mtm
