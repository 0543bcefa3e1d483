#pragma once

#include "mtm/distributions.hpp"

#include <cstddef>
#include <vector>

namespace mtm {

/// Law of w(X) for X ~ T: distinct weight values with their proposal mass.
/// States with T(x) = 0 are left out.
struct WeightLaw
{
  std::vector<double> values;
  std::vector<double> probs;
};

WeightLaw weight_law(const FinitePair& pair);

struct WeightSumBudget
{
  /// Tuples enumerated one by one (no merging) up to this count.
  std::size_t direct = 1'000'000;
  /// Largest support kept after a convolution step.
  std::size_t support = 4'000'000;
  /// Largest number of (support point x law point) products in one convolution step.
  std::size_t products = 64'000'000;
};

/// Exact law of S = sum_i w_i(X_i) for independent X_i, one law per summand.
///
/// Small products of support sizes are enumerated tuple by tuple. Larger ones are built
/// by iterated convolution, merging sums closer than 1e-12; BudgetExceeded is raised
/// when the support or the per-step work outgrows the budget.
class WeightSumDistribution
{
public:
  explicit WeightSumDistribution(const std::vector<WeightLaw>& laws, WeightSumBudget budget = {});

  /// E[1 / (z + S)].
  double expectation_of_inverse(double z) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  bool merged() const { return merged_; }

private:
  std::vector<double> values_;
  std::vector<double> probs_;
  bool merged_ = false;
};

} // namespace mtm
