#include "mtm/empirical.hpp"

#include "mtm/linalg.hpp"
#include "mtm/monte_carlo.hpp"
#include "mtm/parallel.hpp"
#include "mtm/rates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mtm {

namespace {

void check_start(const TransitionMatrix& a, State x0)
{
  if (x0 >= a.size())
    throw UnsupportedState("start state " + std::to_string(x0) + " is outside the kernel");
}

} // namespace

const char* to_string(CurveKind kind)
{
  switch (kind) {
  case CurveKind::tv: return "tv";
  case CurveKind::chi_square: return "chi-square";
  case CurveKind::coupling_survival: return "coupling-survival";
  }
  return "unknown";
}

Eigen::VectorXd n_step_distribution(const TransitionMatrix& a, State x0, std::size_t n)
{
  check_start(a, x0);
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(a.entries.rows());
  p(static_cast<Eigen::Index>(x0)) = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    p = p * a.entries;
  return p.transpose();
}

DecayCurve variation_curve(const TransitionMatrix& a, std::size_t n_max)
{
  const Eigen::Index size = a.entries.rows();
  const Eigen::VectorXd& pi = a.stationary.probs();
  DecayCurve curve;
  curve.kind = CurveKind::tv;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(size, size);
  for (std::size_t n = 1; n <= n_max; ++n) {
    power = power * a.entries;
    double worst = 0.0;
    for (Eigen::Index x = 0; x < size; ++x)
      worst = std::max(worst, tv_distance(power.row(x).transpose(), pi));
    curve.points.push_back({n, worst});
  }
  return curve;
}

double maximal_variation(const TransitionMatrix& a, std::size_t n)
{
  if (n == 0)
    throw DomainError("maximal variation needs n >= 1");
  return variation_curve(a, n).points.back().value;
}

DecayCurve tv_curve(const TransitionMatrix& a, State x0, std::size_t n_max)
{
  check_start(a, x0);
  DecayCurve curve;
  curve.kind = CurveKind::tv;
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(a.entries.rows());
  p(static_cast<Eigen::Index>(x0)) = 1.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (n > 0)
      p = p * a.entries;
    curve.points.push_back({n, tv_distance(p.transpose(), a.stationary.probs())});
  }
  return curve;
}

DecayCurve chi_square_curve(const TransitionMatrix& a, State x0, std::size_t n_max)
{
  check_start(a, x0);
  DecayCurve curve;
  curve.kind = CurveKind::chi_square;
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(a.entries.rows());
  p(static_cast<Eigen::Index>(x0)) = 1.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (n > 0)
      p = p * a.entries;
    curve.points.push_back({n, chi_square_distance(a.stationary.probs(), p.transpose())});
  }
  return curve;
}

double fit_rate(const DecayCurve& curve)
{
  std::vector<CurvePoint> usable;
  for (const auto& pt : curve.points)
    if (pt.value > 1e-14)
      usable.push_back(pt);
  if (usable.size() < 3)
    throw DomainError("fit_rate needs at least 3 points above 1e-14, got " + std::to_string(usable.size()));
  const std::size_t keep = std::max<std::size_t>(3, (usable.size() + 1) / 2);
  const auto first = usable.end() - static_cast<std::ptrdiff_t>(keep);
  double mean_n = 0.0;
  double mean_y = 0.0;
  for (auto it = first; it != usable.end(); ++it) {
    mean_n += static_cast<double>(it->n);
    mean_y += std::log(it->value);
  }
  mean_n /= static_cast<double>(keep);
  mean_y /= static_cast<double>(keep);
  double sxy = 0.0;
  double sxx = 0.0;
  for (auto it = first; it != usable.end(); ++it) {
    const double dn = static_cast<double>(it->n) - mean_n;
    sxy += dn * (std::log(it->value) - mean_y);
    sxx += dn * dn;
  }
  return std::exp(sxy / sxx);
}

CouplingResult coupling_survival(const FinitePair& pair, std::size_t k, State x0, std::size_t n_max,
                                 std::uint64_t replicas, std::uint64_t seed)
{
  if (x0 >= pair.size())
    throw UnsupportedState("start state " + std::to_string(x0) + " is outside the pair's space");
  if (replicas == 0)
    throw InvalidConfiguration("coupling needs at least one replica");
  const double w_star = finite_w_star(pair);
  const TransitionMatrix a = build_kernel_mtm_is(pair, k);
  const double h = HkEvaluator(pair, k, Enumeration{})(w_star).value;
  const FiniteDistribution& pi = pair.target();

  CouplingResult result;
  result.h_star = h;
  result.meeting.kind = CurveKind::coupling_survival;
  result.coin.kind = CurveKind::coupling_survival;
  const auto n = static_cast<Eigen::Index>(pair.size());

  // Residual rows q_res(x, .) = (A(x, .) - H pi) / (1 - H).
  const bool always_coalesce = h >= 1.0;
  std::vector<FiniteDistribution> residual;
  if (!always_coalesce) {
    for (Eigen::Index x = 0; x < n; ++x) {
      Eigen::VectorXd q = (a.entries.row(x).transpose() - h * pi.probs()) / (1.0 - h);
      for (Eigen::Index y = 0; y < n; ++y) {
        if (q(y) < -1e-12)
          throw ConstructionError("residual kernel has mass " + std::to_string(q(y)) + " at (" + std::to_string(x) +
                                  ", " + std::to_string(y) + "); H_k(w*) does not lower-bound the kernel");
        q(y) = std::max(q(y), 0.0);
      }
      residual.emplace_back(std::move(q));
    }
  }

  const std::uint64_t chunks = std::max<std::uint64_t>(1, std::min(kMonteCarloChunks, replicas));
  std::vector<std::vector<std::uint64_t>> apart(chunks, std::vector<std::uint64_t>(n_max, 0));
  std::vector<std::vector<std::uint64_t>> no_coin(chunks, std::vector<std::uint64_t>(n_max, 0));
  const Rng root(seed);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = root.substream(c);
    const std::uint64_t begin = replicas * c / chunks;
    const std::uint64_t end = replicas * (c + 1) / chunks;
    for (std::uint64_t r = begin; r < end; ++r) {
      State x = x0;
      State y = pi.sample(rng);
      bool coin_seen = false;
      for (std::size_t step = 0; step < n_max; ++step) {
        // The coin is tossed every step, merged or not, so each chain still moves by A.
        if (always_coalesce || rng.uniform() < h) {
          coin_seen = true;
          x = y = pi.sample(rng);
        } else if (x == y) {
          x = y = residual[x].sample(rng);
        } else {
          x = residual[x].sample(rng);
          y = residual[y].sample(rng);
        }
        apart[c][step] += x != y ? 1 : 0;
        no_coin[c][step] += coin_seen ? 0 : 1;
      }
    }
  });

  const double total = static_cast<double>(replicas);
  for (std::size_t step = 0; step < n_max; ++step) {
    std::uint64_t a_count = 0;
    std::uint64_t c_count = 0;
    for (std::uint64_t c = 0; c < chunks; ++c) {
      a_count += apart[c][step];
      c_count += no_coin[c][step];
    }
    const double pa = static_cast<double>(a_count) / total;
    const double pc = static_cast<double>(c_count) / total;
    result.meeting.points.push_back({step + 1, pa});
    result.meeting.std_errors.push_back(std::sqrt(pa * (1.0 - pa) / total));
    result.coin.points.push_back({step + 1, pc});
    result.coin.std_errors.push_back(std::sqrt(pc * (1.0 - pc) / total));
  }
  return result;
}

} // namespace mtm
