#pragma once

#include "mtm/distributions.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>

namespace mtm {

/// pi(i) = (2m + 1 - 2i) / m^2 for i = 1..m, stored at index i-1.
FiniteDistribution example1_target(std::size_t m);

/// Binomial(m, theta) on {0, ..., m}.
FiniteDistribution binomial_target(std::size_t m, double theta);

/// pi_1 = 1 - p and pi_2 = ... = pi_N = p / (N - 1).
FiniteDistribution example4_target(std::size_t n, double p);

/// Standard normal target with proposal T(x) = c * t_df(c x).
/// Default search interval for the weight supremum is [-10, 10].
ContinuousPair normal_vs_scaled_t(double c, double df, std::optional<double> w_star = std::nullopt,
                                  std::optional<SearchInterval> interval = SearchInterval{-10.0, 10.0});

/// Parses {"probs": [...]}, {"family": "uniform", "N": n},
/// {"family": "example1", "m": m}, {"family": "binomial", "m": m, "theta": t} or
/// {"family": "example4", "N": n, "p": p}. A uniform spec without "N" takes size_hint.
FiniteDistribution load_finite_distribution(const nlohmann::json& spec,
                                            std::optional<std::size_t> size_hint = std::nullopt);

/// Builds a pair from a target spec and an optional proposal spec (uniform when null).
/// {"family": "normal-vs-scaled-t", "c": c, "df": df} yields a continuous pair and
/// takes no proposal.
WeightedPair load_pair(const nlohmann::json& target, const nlohmann::json& proposal = nullptr);

} // namespace mtm
