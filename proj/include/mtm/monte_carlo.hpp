#pragma once

#include "mtm/parallel.hpp"
#include "mtm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace mtm {

/// Streaming mean/variance (Welford), mergeable with pooled moments.
struct RunningMoments
{
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x)
  {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningMoments& other)
  {
    if (other.count == 0)
      return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double n_a = static_cast<double>(count);
    const double n_b = static_cast<double>(other.count);
    const double n = n_a + n_b;
    const double delta = other.mean - mean;
    mean += delta * n_b / n;
    m2 += other.m2 + delta * delta * n_a * n_b / n;
    count += other.count;
  }

  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

struct McEstimate
{
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

/// Number of substreams a sample budget is split into. Fixed so results do not depend
/// on the worker count.
inline constexpr std::uint64_t kMonteCarloChunks = 64;

/// Sample mean of draw(rng) over n draws with its standard error (sample SD / sqrt(n)).
///
/// Chunk c uses Rng(seed).substream(c); chunks are merged in index order.
template <typename Draw>
McEstimate monte_carlo_mean(std::uint64_t n, std::uint64_t seed, Draw&& draw)
{
  const std::uint64_t chunks = std::max<std::uint64_t>(1, std::min(kMonteCarloChunks, n));
  std::vector<RunningMoments> partial(chunks);
  const Rng root(seed);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = root.substream(c);
    const std::uint64_t begin = n * c / chunks;
    const std::uint64_t end = n * (c + 1) / chunks;
    RunningMoments m;
    for (std::uint64_t i = begin; i < end; ++i)
      m.add(draw(rng));
    partial[c] = m;
  });
  RunningMoments total;
  for (const auto& m : partial)
    total.merge(m);
  return {total.mean, total.standard_error(), total.count};
}

} // namespace mtm
