#include "mtm/rates.hpp"

#include "mtm/compensated_sum.hpp"
#include "mtm/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace mtm {

namespace detail {

struct BalancingCertifier
{
  static BalancingCertificate issue(const JointProposal& joint) { return BalancingCertificate(joint.id(), joint.kind()); }
};

} // namespace detail

namespace {

constexpr double kExactTolerance = 1e-12;

double clamp_unit(double r) { return std::clamp(r, 0.0, 1.0); }

/// Seed for the k-th cell of a sweep, so each k has its own reproducible stream.
std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t k) { return Rng(seed).substream(k)(); }

HkMode with_seed(const HkMode& mode, std::uint64_t seed)
{
  if (const auto* mc = std::get_if<MonteCarlo>(&mode))
    return MonteCarlo{mc->samples, seed};
  if (const auto* a = std::get_if<AutoMode>(&mode))
    return AutoMode{a->samples, seed};
  return mode;
}

std::uint64_t mode_samples(const HkMode& mode)
{
  if (const auto* mc = std::get_if<MonteCarlo>(&mode))
    return mc->samples;
  if (const auto* a = std::get_if<AutoMode>(&mode))
    return a->samples;
  return 0;
}

std::uint64_t mode_seed(const HkMode& mode)
{
  if (const auto* mc = std::get_if<MonteCarlo>(&mode))
    return mc->seed;
  if (const auto* a = std::get_if<AutoMode>(&mode))
    return a->seed;
  return 0;
}

void require_samples(const HkMode& mode)
{
  if (mode_samples(mode) == 0)
    throw InvalidConfiguration("monte-carlo mode needs a positive sample count");
}

/// Weight of one proposal draw; counts draws above a declared w*.
struct WeightDrawer
{
  const WeightedPair* pair;
  std::atomic<std::uint64_t>* violations;

  double operator()(Rng& rng) const
  {
    return std::visit(
      [&](const auto& p) {
        const double w = p.weight(p.sample_proposal(rng));
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ContinuousPair>) {
          const auto& ws = p.declared_w_star();
          if (ws && w > *ws * (1.0 + 1e-9))
            violations->fetch_add(1, std::memory_order_relaxed);
        }
        return w;
      },
      *pair);
  }
};

constexpr double kAutoEnumerationTuples = 1e6;

std::shared_ptr<const WeightSumDistribution> exact_sums(const std::vector<WeightLaw>& laws, bool allow_fallback)
{
  if (allow_fallback) {
    double tuples = 1.0;
    for (const auto& law : laws)
      tuples *= static_cast<double>(law.values.size());
    if (tuples > kAutoEnumerationTuples)
      return nullptr;
  }
  try {
    return std::make_shared<const WeightSumDistribution>(laws);
  } catch (const BudgetExceeded&) {
    if (!allow_fallback)
      throw;
    return nullptr;
  }
}

} // namespace

double finite_w_star(const WeightedPair& pair)
{
  const double w = essential_supremum(pair).value;
  if (!std::isfinite(w) || !(w > 0.0))
    throw InsufficientSpecification("w* is infinite or unknown; the proposal does not dominate the target");
  return w;
}

HkEvaluator::HkEvaluator(WeightedPair pair, std::size_t k, HkMode mode)
  : pair_(std::move(pair)), k_(k), mode_(std::move(mode))
{
  if (k_ == 0)
    throw InvalidConfiguration("H_k needs k >= 1");
  const bool enumerate = std::holds_alternative<Enumeration>(mode_);
  if (enumerate && !is_finite(pair_))
    throw InvalidConfiguration("enumeration mode needs a finite pair; use monte-carlo for continuous targets");
  if (!enumerate)
    require_samples(mode_);
  if (k_ == 1 || !is_finite(pair_) || std::holds_alternative<MonteCarlo>(mode_))
    return;
  const WeightLaw law = weight_law(std::get<FinitePair>(pair_));
  sums_ = exact_sums(std::vector<WeightLaw>(k_ - 1, law), !enumerate);
}

Estimate HkEvaluator::operator()(double z) const
{
  if (!(z > 0.0))
    throw DomainError("H_k is defined for z > 0");
  const double kd = static_cast<double>(k_);
  if (k_ == 1)
    return {1.0 / z, 0.0, 0, "closed-form", 0};
  if (sums_)
    return {kd * sums_->expectation_of_inverse(z), 0.0, 0, "exact-enum", 0};

  std::atomic<std::uint64_t> violations{0};
  const WeightDrawer draw_weight{&pair_, &violations};
  const McEstimate est = monte_carlo_mean(mode_samples(mode_), mode_seed(mode_), [&](Rng& rng) {
    CompensatedSum<> s;
    for (std::size_t i = 0; i + 1 < k_; ++i)
      s += draw_weight(rng);
    return kd / (z + s.value());
  });
  return {est.mean, est.std_error, est.samples, "monte-carlo", violations.load()};
}

Estimate h_k(const HkEvaluator& eval, double z) { return eval(z); }

RateReport exact_rate_mtm_is(const WeightedPair& pair, std::size_t k, HkMode mode)
{
  const double w_star = finite_w_star(pair);
  const Estimate h = HkEvaluator(pair, k, std::move(mode))(w_star);
  return {clamp_unit(1.0 - h.value), h.method, h.std_error, h.samples, k, h.w_star_violations};
}

RateReport rate_imh_repeated(const WeightedPair& pair, std::size_t k)
{
  const double w_star = finite_w_star(pair);
  return {clamp_unit(std::pow(1.0 - 1.0 / w_star, static_cast<double>(k))), "closed-form", 0.0, 0, k, 0};
}

RateReport rate_nonidentical(std::span<const WeightedPair> proposals, HkMode mode)
{
  const std::size_t k = proposals.size();
  if (k == 0)
    throw InvalidConfiguration("rate_nonidentical needs at least one proposal");
  const bool all_finite = std::all_of(proposals.begin(), proposals.end(), [](const auto& p) { return is_finite(p); });
  const bool none_finite = std::none_of(proposals.begin(), proposals.end(), [](const auto& p) { return is_finite(p); });
  if (!all_finite && !none_finite)
    throw InvalidConfiguration("proposals mix finite and continuous spaces");
  if (all_finite) {
    const auto& first = std::get<FinitePair>(proposals[0]).target();
    for (const auto& p : proposals) {
      const auto& t = std::get<FinitePair>(p).target();
      if (t.size() != first.size() || (t.probs() - first.probs()).cwiseAbs().maxCoeff() > kExactTolerance)
        throw InvalidConfiguration("rate_nonidentical: proposals do not share one target");
    }
  }
  std::vector<double> w_star(k);
  for (std::size_t j = 0; j < k; ++j)
    w_star[j] = finite_w_star(proposals[j]);
  if (k == 1)
    return {clamp_unit(1.0 - 1.0 / w_star[0]), "closed-form", 0.0, 0, 1, 0};

  const bool enumerate = std::holds_alternative<Enumeration>(mode);
  if (enumerate && !all_finite)
    throw InvalidConfiguration("enumeration mode needs finite pairs");
  if (all_finite && !std::holds_alternative<MonteCarlo>(mode)) {
    std::vector<WeightLaw> laws;
    for (const auto& p : proposals)
      laws.push_back(weight_law(std::get<FinitePair>(p)));
    CompensatedSum<> total;
    bool exact = true;
    for (std::size_t j = 0; j < k && exact; ++j) {
      std::vector<WeightLaw> others;
      for (std::size_t i = 0; i < k; ++i)
        if (i != j)
          others.push_back(laws[i]);
      const auto sums = exact_sums(others, !enumerate);
      if (!sums)
        exact = false;
      else
        total += sums->expectation_of_inverse(w_star[j]);
    }
    if (exact)
      return {clamp_unit(1.0 - total.value()), "exact-enum", 0.0, 0, k, 0};
  }

  require_samples(mode);
  std::atomic<std::uint64_t> violations{0};
  const McEstimate est = monte_carlo_mean(mode_samples(mode), mode_seed(mode), [&](Rng& rng) {
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i)
      w[i] = WeightDrawer{&proposals[i], &violations}(rng);
    CompensatedSum<> value;
    for (std::size_t j = 0; j < k; ++j) {
      CompensatedSum<> others;
      for (std::size_t i = 0; i < k; ++i)
        if (i != j)
          others += w[i];
      value += 1.0 / (w_star[j] + others.value());
    }
    return value.value();
  });
  return {clamp_unit(1.0 - est.mean), "monte-carlo", est.std_error, est.samples, k, violations.load()};
}

namespace {

/// H_k(w(y)) for every state; states without target mass get 0.
Eigen::VectorXd h_at_weights(const FinitePair& pair, const HkEvaluator& eval)
{
  const auto n = static_cast<Eigen::Index>(pair.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  for (Eigen::Index y = 0; y < n; ++y) {
    const double w = pair.weights()(y);
    if (w > 0.0)
      h(y) = std::isinf(w) ? 0.0 : eval(w).value;
  }
  return h;
}

double rejection_from_table(const FinitePair& pair, const Eigen::VectorXd& h, State x)
{
  const double hx = h(static_cast<Eigen::Index>(x));
  const bool x_off_support = pair.weights()(static_cast<Eigen::Index>(x)) == 0.0;
  CompensatedSum<> s;
  for (Eigen::Index y = 0; y < h.size(); ++y) {
    const double p = pair.target().probs()(y);
    if (p > 0.0)
      s += (x_off_support ? h(y) : std::min(hx, h(y))) * p;
  }
  return clamp_unit(1.0 - s.value());
}

template <typename Pair, typename S>
Estimate rejection_monte_carlo(const Pair& pair, const WeightedPair& wrapped, std::size_t k, S x, const HkMode& mode)
{
  require_samples(mode);
  const double wx = pair.weight(x);
  const double kd = static_cast<double>(k);
  std::atomic<std::uint64_t> violations{0};
  const WeightDrawer draw_weight{&wrapped, &violations};
  const McEstimate est = monte_carlo_mean(mode_samples(mode), mode_seed(mode), [&](Rng& rng) {
    const double wy = draw_weight(rng);
    if (wy == 0.0)
      return 0.0;
    CompensatedSum<> s;
    for (std::size_t i = 0; i + 1 < k; ++i)
      s += draw_weight(rng);
    return wy * kd / (std::max(wx, wy) + s.value());
  });
  return {clamp_unit(1.0 - est.mean), est.std_error, est.samples, "monte-carlo", violations.load()};
}

} // namespace

Estimate rejection_probability(const FinitePair& pair, std::size_t k, State x, HkMode mode)
{
  if (x >= pair.size())
    throw UnsupportedState("state " + std::to_string(x) + " is outside the pair's space");
  const HkEvaluator eval(pair, k, mode);
  if (eval.exact())
    return {rejection_from_table(pair, h_at_weights(pair, eval), x), 0.0, 0, k == 1 ? "closed-form" : "exact-enum", 0};
  const WeightedPair wrapped = pair;
  return rejection_monte_carlo(pair, wrapped, k, x, mode);
}

Estimate rejection_probability(const ContinuousPair& pair, std::size_t k, double x, HkMode mode)
{
  if (std::holds_alternative<Enumeration>(mode))
    throw InvalidConfiguration("enumeration mode needs a finite pair; use monte-carlo for continuous targets");
  if (k == 0)
    throw InvalidConfiguration("H_k needs k >= 1");
  const WeightedPair wrapped = pair;
  return rejection_monte_carlo(pair, wrapped, k, x, mode);
}

Eigen::VectorXd rejection_values(const FinitePair& pair, std::size_t k)
{
  const HkEvaluator eval(pair, k, Enumeration{});
  const Eigen::VectorXd h = h_at_weights(pair, eval);
  Eigen::VectorXd r(h.size());
  for (State x = 0; x < pair.size(); ++x)
    r(static_cast<Eigen::Index>(x)) = rejection_from_table(pair, h, x);
  return r;
}

std::vector<ComparisonRow> verify_comparison(const WeightedPair& pair, std::size_t k_max, HkMode mode)
{
  if (k_max == 0)
    throw InvalidConfiguration("verify_comparison needs k_max >= 1");
  std::vector<ComparisonRow> rows;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const RateReport mtm = exact_rate_mtm_is(pair, k, with_seed(mode, cell_seed(mode_seed(mode), k)));
    const RateReport imh = rate_imh_repeated(pair, k);
    ComparisonRow row;
    row.k = k;
    row.mtm_rate = mtm.rate;
    row.mtm_se = mtm.std_error;
    row.imh_k_rate = imh.rate;
    row.gap = mtm.rate - imh.rate;
    row.method = mtm.method;
    row.samples = mtm.samples_used;
    if (mtm.method == "monte-carlo")
      row.ok = row.gap >= -3.0 * mtm.std_error;
    else if (k == 1)
      row.ok = std::abs(row.gap) <= kExactTolerance;
    else
      row.ok = row.gap >= -kExactTolerance;
    rows.push_back(row);
  }
  return rows;
}

InequalityCheck verify_recursive_inequality(const WeightedPair& pair, std::size_t k, HkMode mode)
{
  if (k < 2)
    throw InvalidConfiguration("the recursive inequality needs k >= 2");
  const double w_star = finite_w_star(pair);
  const double c = 1.0 - 1.0 / w_star;
  const Estimate hk = HkEvaluator(pair, k, mode)(w_star);
  const Estimate hk1 = HkEvaluator(pair, k - 1, mode)(w_star);
  InequalityCheck check;
  check.left = 1.0 - hk.value;
  check.right = c * (1.0 - hk1.value);
  check.margin = check.left - check.right;
  check.std_error = std::sqrt(hk.std_error * hk.std_error + c * c * hk1.std_error * hk1.std_error);
  const bool mc = hk.method == "monte-carlo" || hk1.method == "monte-carlo";
  check.method = mc ? "monte-carlo" : "exact-enum";
  check.holds = mc ? check.margin >= -3.0 * check.std_error : check.margin >= -kExactTolerance;
  return check;
}

RateReport stratified_rate(const FiniteDistribution& target, const FiniteDistribution& proposal,
                           const Partition& partition)
{
  if (target.size() != proposal.size() || partition.state_count() != target.size())
    throw InvalidConfiguration("stratified rate: target, proposal and partition sizes differ");
  double w_max = 0.0;
  for (const auto& block : partition.blocks()) {
    CompensatedSum<> p;
    CompensatedSum<> t;
    for (State x : block) {
      p += target(x);
      t += proposal(x);
    }
    if (p.value() == 0.0)
      continue;
    w_max = std::max(w_max, t.value() > 0.0 ? p.value() / t.value() : std::numeric_limits<double>::infinity());
  }
  return {clamp_unit(1.0 - 1.0 / w_max), "closed-form", 0.0, 0, 1, 0};
}

BalancingVerdict verify_balancing_condition(const JointProposal& joint, std::uint64_t budget)
{
  const std::size_t n = joint.state_count();
  const std::size_t k = joint.k();
  double work = static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(k);
  for (std::size_t i = 0; i + 1 < k; ++i)
    work *= static_cast<double>(n);
  if (work > static_cast<double>(budget))
    throw BudgetExceeded("balancing-condition check needs " + std::to_string(work) + " evaluations (budget " +
                         std::to_string(budget) + ")");

  BalancingVerdict verdict;
  verdict.holds = true;
  Trials rest(k - 1);
  Trials left(k);
  Trials right(k);
  for (State x = 0; x < n; ++x) {
    for (State y = 0; y < n; ++y) {
      for (std::size_t j = 0; j < k; ++j) {
        const double mx = joint.marginal(j, x, y);
        const double my = joint.marginal(j, y, x);
        if (mx == 0.0 && my == 0.0)
          continue;
        if (mx == 0.0 || my == 0.0) {
          verdict.holds = false;
          verdict.max_discrepancy = std::max(verdict.max_discrepancy, 1.0);
          continue;
        }
        std::fill(rest.begin(), rest.end(), 0);
        for (;;) {
          for (std::size_t i = 0, r = 0; i < k; ++i) {
            left[i] = i == j ? y : rest[r];
            right[i] = i == j ? x : rest[r];
            if (i != j)
              ++r;
          }
          const double a = joint.probability(x, left) / mx;
          const double b = joint.probability(y, right) / my;
          const double d = std::abs(a - b);
          verdict.max_discrepancy = std::max(verdict.max_discrepancy, d);
          if (d > kExactTolerance)
            verdict.holds = false;
          ++verdict.checked;
          std::size_t pos = 0;
          while (pos < rest.size() && ++rest[pos] == n)
            rest[pos++] = 0;
          if (pos == rest.size())
            break;
        }
      }
    }
  }
  if (verdict.holds)
    verdict.certificate = detail::BalancingCertifier::issue(joint);
  return verdict;
}

} // namespace mtm
