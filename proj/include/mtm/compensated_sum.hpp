#pragma once

#include <cmath>

namespace mtm {

/// Neumaier-compensated running sum.
///
/// Tracks the low-order bits lost by each addition and folds them back in when the
/// value is read, so long sums of mixed magnitudes keep near-full precision.
template <typename Real = double>
struct CompensatedSum
{
  Real sum = Real{0};
  Real compensation = Real{0};

  CompensatedSum& operator+=(Real value)
  {
    const Real t = sum + value;
    if (std::abs(sum) >= std::abs(value))
      compensation += (sum - t) + value;
    else
      compensation += (value - t) + sum;
    sum = t;
    return *this;
  }

  CompensatedSum& operator+=(const CompensatedSum& other)
  {
    *this += other.sum;
    *this += other.compensation;
    return *this;
  }

  Real value() const { return sum + compensation; }
};

template <typename Range>
double compensated_total(const Range& values)
{
  CompensatedSum<double> acc;
  for (const double v : values)
    acc += v;
  return acc.value();
}

} // namespace mtm
