#include "mtm/distributions.hpp"

#include "mtm/compensated_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mtm {

FiniteDistribution::FiniteDistribution(Eigen::VectorXd masses)
{
  if (masses.size() == 0)
    throw DomainError("finite distribution needs at least one state");
  CompensatedSum<double> total;
  for (Eigen::Index i = 0; i < masses.size(); ++i) {
    const double m = masses(i);
    if (!std::isfinite(m) || m < 0.0) {
      std::ostringstream msg;
      msg << "mass of state " << i << " is " << m << "; masses must be finite and nonnegative";
      throw DomainError(msg.str());
    }
    total += m;
  }
  original_sum_ = total.value();
  if (!(original_sum_ > 0.0))
    throw DomainError("finite distribution has zero total mass");

  probs_ = masses / original_sum_;
  cdf_.resize(probs_.size());
  CompensatedSum<double> running;
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    running += probs_(i);
    cdf_(i) = running.value();
  }
}

FiniteDistribution FiniteDistribution::uniform(std::size_t n)
{
  if (n == 0)
    throw DomainError("uniform distribution needs at least one state");
  return FiniteDistribution(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t n, State x)
{
  if (x >= n)
    throw DomainError("point mass outside the state space");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  m(static_cast<Eigen::Index>(x)) = 1.0;
  return FiniteDistribution(std::move(m));
}

State FiniteDistribution::sample(Rng& rng) const
{
  const double u = rng.uniform() * cdf_(cdf_.size() - 1);
  const double* begin = cdf_.data();
  const double* end = begin + cdf_.size();
  const double* it = std::upper_bound(begin, end, u);
  auto idx = static_cast<std::size_t>(it - begin);
  if (idx >= size())
    idx = size() - 1;
  // Never return a zero-mass state when rounding lands on a flat stretch of the CDF.
  while (probs_(static_cast<Eigen::Index>(idx)) == 0.0 && idx > 0)
    --idx;
  return idx;
}

FinitePair::FinitePair(FiniteDistribution target, FiniteDistribution proposal)
  : target_(std::move(target)), proposal_(std::move(proposal))
{
  if (target_.size() != proposal_.size())
    throw InvalidConfiguration("target and proposal live on state spaces of different sizes");
  const auto n = static_cast<Eigen::Index>(target_.size());
  weights_.resize(n);
  w_star_ = 0.0;
  argmax_ = 0;
  for (Eigen::Index x = 0; x < n; ++x) {
    const double p = target_.probs()(x);
    const double t = proposal_.probs()(x);
    double w;
    if (t > 0.0)
      w = p / t;
    else
      w = p > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    weights_(x) = w;
    if (w > w_star_) {
      w_star_ = w;
      argmax_ = static_cast<State>(x);
    }
  }
}

double FinitePair::weight(State x) const
{
  if (x >= size())
    throw DomainError("state outside the finite space");
  const double w = weights_(static_cast<Eigen::Index>(x));
  if (std::isinf(w)) {
    std::ostringstream msg;
    msg << "state " << x << " has target mass but zero proposal mass";
    throw UnsupportedState(msg.str());
  }
  return w;
}

ContinuousPair::ContinuousPair(LogDensity target_logpdf, LogDensity proposal_logpdf, Sampler proposal_sampler,
                               std::optional<double> w_star, std::optional<SearchInterval> interval)
  : target_logpdf_(std::move(target_logpdf))
  , proposal_logpdf_(std::move(proposal_logpdf))
  , sampler_(std::move(proposal_sampler))
  , w_star_(w_star)
  , interval_(interval)
{
  if (w_star_ && !(*w_star_ > 0.0))
    throw DomainError("declared w* must be positive");
  if (interval_ && !(interval_->lo < interval_->hi))
    throw DomainError("search interval must have lo < hi");
}

double ContinuousPair::log_weight(double x) const
{
  const double lt = target_logpdf_(x);
  const double lp = proposal_logpdf_(x);
  if (lp == -std::numeric_limits<double>::infinity()) {
    if (lt == -std::numeric_limits<double>::infinity())
      return -std::numeric_limits<double>::infinity();
    std::ostringstream msg;
    msg << "x = " << x << " has target density but zero proposal density";
    throw UnsupportedState(msg.str());
  }
  return lt - lp;
}

double ContinuousPair::weight(double x) const { return std::exp(log_weight(x)); }

WeightSupremum essential_supremum(const FinitePair& pair) { return {pair.w_star(), "exact-max"}; }

namespace {

double golden_section_max(const ContinuousPair& pair, double a, double b)
{
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = pair.log_weight(c);
  double fd = pair.log_weight(d);
  for (int iter = 0; iter < 500; ++iter) {
    const double mid = 0.5 * (a + b);
    if (b - a <= 1e-10 * std::max(1.0, std::abs(mid)))
      break;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = pair.log_weight(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = pair.log_weight(d);
    }
  }
  return std::max(fc, fd);
}

} // namespace

WeightSupremum essential_supremum(const ContinuousPair& pair)
{
  if (pair.declared_w_star())
    return {*pair.declared_w_star(), "user"};
  if (!pair.search_interval())
    throw InsufficientSpecification("continuous pair has neither a declared w* nor a search interval");

  constexpr int kGridPoints = 10001;
  const auto [lo, hi] = *pair.search_interval();
  const double step = (hi - lo) / (kGridPoints - 1);
  int best = 0;
  double best_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGridPoints; ++i) {
    const double x = lo + step * i;
    const double lw = pair.log_weight(x);
    if (lw > best_log) {
      best_log = lw;
      best = i;
    }
  }
  const double a = lo + step * std::max(0, best - 1);
  const double b = lo + step * std::min(kGridPoints - 1, best + 1);
  const double refined = golden_section_max(pair, a, b);
  return {std::exp(std::max(best_log, refined)), "grid-golden"};
}

WeightSupremum essential_supremum(const WeightedPair& pair)
{
  return std::visit([](const auto& p) { return essential_supremum(p); }, pair);
}

} // namespace mtm
