#include "mtm/weight_sum.hpp"

#include "mtm/compensated_sum.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace mtm {

WeightLaw weight_law(const FinitePair& pair)
{
  std::vector<std::pair<double, double>> points;
  for (State x = 0; x < pair.size(); ++x) {
    const double t = pair.proposal()(x);
    if (t > 0.0)
      points.emplace_back(pair.weights()(static_cast<Eigen::Index>(x)), t);
  }
  std::sort(points.begin(), points.end());
  WeightLaw law;
  for (std::size_t i = 0; i < points.size();) {
    CompensatedSum<> mass;
    std::size_t j = i;
    while (j < points.size() && points[j].first == points[i].first)
      mass += points[j++].second;
    law.values.push_back(points[i].first);
    law.probs.push_back(mass.value());
    i = j;
  }
  return law;
}

namespace {

constexpr double kMergeTolerance = 1e-12;

/// Sorts (value, prob) points and merges runs spanning at most the tolerance into their
/// probability-weighted mean.
void merge_support(std::vector<std::pair<double, double>>& points, std::vector<double>& values,
                   std::vector<double>& probs)
{
  std::sort(points.begin(), points.end());
  values.clear();
  probs.clear();
  for (std::size_t i = 0; i < points.size();) {
    CompensatedSum<> mass;
    CompensatedSum<> moment;
    std::size_t j = i;
    while (j < points.size() && points[j].first - points[i].first <= kMergeTolerance) {
      mass += points[j].second;
      moment += points[j].first * points[j].second;
      ++j;
    }
    const double m = mass.value();
    values.push_back(m > 0.0 ? moment.value() / m : points[i].first);
    probs.push_back(m);
    i = j;
  }
}

} // namespace

WeightSumDistribution::WeightSumDistribution(const std::vector<WeightLaw>& laws, WeightSumBudget budget)
{
  double tuples = 1.0;
  for (const auto& law : laws)
    tuples *= static_cast<double>(law.values.size());

  if (tuples <= static_cast<double>(budget.direct)) {
    const auto count = static_cast<std::size_t>(tuples);
    values_.reserve(count);
    probs_.reserve(count);
    std::vector<std::size_t> idx(laws.size(), 0);
    for (;;) {
      CompensatedSum<> s;
      double p = 1.0;
      for (std::size_t i = 0; i < laws.size(); ++i) {
        s += laws[i].values[idx[i]];
        p *= laws[i].probs[idx[i]];
      }
      values_.push_back(s.value());
      probs_.push_back(p);
      std::size_t pos = 0;
      while (pos < laws.size() && ++idx[pos] == laws[pos].values.size())
        idx[pos++] = 0;
      if (pos == laws.size())
        break;
    }
    return;
  }

  merged_ = true;
  values_ = {0.0};
  probs_ = {1.0};
  std::vector<std::pair<double, double>> points;
  for (const auto& law : laws) {
    const std::size_t work = values_.size() * law.values.size();
    if (work > budget.products)
      throw BudgetExceeded("weight-sum convolution needs " + std::to_string(work) +
                           " products in one step (budget " + std::to_string(budget.products) + ")");
    points.clear();
    points.reserve(work);
    for (std::size_t a = 0; a < values_.size(); ++a)
      for (std::size_t b = 0; b < law.values.size(); ++b)
        points.emplace_back(values_[a] + law.values[b], probs_[a] * law.probs[b]);
    merge_support(points, values_, probs_);
    if (values_.size() > budget.support)
      throw BudgetExceeded("weight-sum support grew to " + std::to_string(values_.size()) + " points (budget " +
                           std::to_string(budget.support) + ")");
  }
}

double WeightSumDistribution::expectation_of_inverse(double z) const
{
  CompensatedSum<> total;
  for (std::size_t i = 0; i < values_.size(); ++i)
    total += probs_[i] / (z + values_[i]);
  return total.value();
}

} // namespace mtm
