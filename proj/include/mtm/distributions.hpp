#pragma once

#include "mtm/errors.hpp"
#include "mtm/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace mtm {

/// Index of a state in a finite space {0, ..., N-1}.
using State = std::size_t;

/// Probability mass function on {0, ..., N-1}.
///
/// Masses may be given unnormalized; they are normalized on construction and the
/// original total is kept for diagnostics.
class FiniteDistribution
{
public:
  explicit FiniteDistribution(Eigen::VectorXd masses);

  static FiniteDistribution uniform(std::size_t n);
  static FiniteDistribution point_mass(std::size_t n, State x);

  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  double operator()(State x) const { return probs_(static_cast<Eigen::Index>(x)); }
  const Eigen::VectorXd& probs() const { return probs_; }
  double original_sum() const { return original_sum_; }

  /// Inverse-CDF draw.
  State sample(Rng& rng) const;

private:
  Eigen::VectorXd probs_;
  Eigen::VectorXd cdf_;
  double original_sum_;
};

struct WeightSupremum
{
  double value;
  std::string method; ///< "exact-max", "user", or "grid-golden"
};

/// Target/proposal pair on a finite space with precomputed importance weights.
///
/// States with target mass but no proposal mass carry an infinite weight; states with
/// neither get weight 0.
class FinitePair
{
public:
  using state_type = State;

  FinitePair(FiniteDistribution target, FiniteDistribution proposal);

  const FiniteDistribution& target() const { return target_; }
  const FiniteDistribution& proposal() const { return proposal_; }
  std::size_t size() const { return target_.size(); }

  /// pi(x)/T(x); throws UnsupportedState when T(x)=0 < pi(x).
  double weight(State x) const;
  const Eigen::VectorXd& weights() const { return weights_; }
  double w_star() const { return w_star_; }
  State argmax_weight() const { return argmax_; }

  State sample_proposal(Rng& rng) const { return proposal_.sample(rng); }

private:
  FiniteDistribution target_;
  FiniteDistribution proposal_;
  Eigen::VectorXd weights_;
  double w_star_;
  State argmax_;
};

struct SearchInterval
{
  double lo;
  double hi;
};

/// One-dimensional continuous target/proposal pair given by log densities.
class ContinuousPair
{
public:
  using state_type = double;
  using LogDensity = std::function<double(double)>;
  using Sampler = std::function<double(Rng&)>;

  ContinuousPair(LogDensity target_logpdf, LogDensity proposal_logpdf, Sampler proposal_sampler,
                 std::optional<double> w_star = std::nullopt, std::optional<SearchInterval> interval = std::nullopt);

  double log_weight(double x) const;
  /// exp(log pi(x) - log T(x)); throws UnsupportedState when T(x)=0 < pi(x).
  double weight(double x) const;
  double sample_proposal(Rng& rng) const { return sampler_(rng); }

  double target_logpdf(double x) const { return target_logpdf_(x); }
  double proposal_logpdf(double x) const { return proposal_logpdf_(x); }
  const std::optional<double>& declared_w_star() const { return w_star_; }
  const std::optional<SearchInterval>& search_interval() const { return interval_; }

private:
  LogDensity target_logpdf_;
  LogDensity proposal_logpdf_;
  Sampler sampler_;
  std::optional<double> w_star_;
  std::optional<SearchInterval> interval_;
};

using WeightedPair = std::variant<FinitePair, ContinuousPair>;

inline double weight(const FinitePair& pair, State x) { return pair.weight(x); }
inline double weight(const ContinuousPair& pair, double x) { return pair.weight(x); }

WeightSupremum essential_supremum(const FinitePair& pair);
/// User value when declared; otherwise a 10,001-point grid over the search interval
/// followed by golden-section refinement of log w around the grid argmax.
WeightSupremum essential_supremum(const ContinuousPair& pair);
WeightSupremum essential_supremum(const WeightedPair& pair);

inline bool is_finite(const WeightedPair& pair) { return std::holds_alternative<FinitePair>(pair); }

} // namespace mtm
