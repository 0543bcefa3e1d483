#pragma once

#include "mtm/distributions.hpp"
#include "mtm/samplers.hpp"

#include <doctest.h>

#include <cmath>
#include <initializer_list>

namespace testing {

inline Eigen::VectorXd vec(std::initializer_list<double> values)
{
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values)
    v(i++) = x;
  return v;
}

inline mtm::FiniteDistribution dist(std::initializer_list<double> values) { return mtm::FiniteDistribution(vec(values)); }

inline mtm::FinitePair uniform_pair(mtm::FiniteDistribution target)
{
  const std::size_t n = target.size();
  return mtm::FinitePair(std::move(target), mtm::FiniteDistribution::uniform(n));
}

/// Frequencies of next-state after `draws` independent steps from x.
template <typename Step>
Eigen::VectorXd empirical_row(Step&& step, mtm::State x, std::size_t n_states, std::uint64_t draws, std::uint64_t seed)
{
  mtm::Rng rng(seed);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_states));
  for (std::uint64_t i = 0; i < draws; ++i)
    counts(static_cast<Eigen::Index>(step(x, rng).next)) += 1.0;
  return counts / static_cast<double>(draws);
}

/// Every frequency within `z` binomial standard errors of the expected row.
template <typename Row>
void check_row(const Eigen::VectorXd& freq, const Row& expected, std::uint64_t draws, double z = 4.0)
{
  for (Eigen::Index y = 0; y < freq.size(); ++y) {
    const double p = expected[static_cast<std::size_t>(y)];
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / static_cast<double>(draws));
    CHECK(std::abs(freq(y) - p) <= z * se + 1e-12);
  }
}

} // namespace testing
