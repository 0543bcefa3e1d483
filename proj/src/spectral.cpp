#include "mtm/spectral.hpp"

#include "mtm/compensated_sum.hpp"
#include "mtm/parallel.hpp"
#include "mtm/rates.hpp"
#include "mtm/weight_sum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace mtm {

KernelDiagnostics TransitionMatrix::diagnose() const
{
  KernelDiagnostics d;
  const Eigen::VectorXd& pi = stationary.probs();
  d.max_row_error = (entries.rowwise().sum().array() - 1.0).abs().maxCoeff();
  d.stationarity_error = (entries.transpose() * pi - pi).cwiseAbs().maxCoeff();
  d.flux_asymmetry = flux_asymmetry(entries, pi);
  d.min_entry = entries.minCoeff();
  return d;
}

namespace {

constexpr double kClampFloor = -1e-15;

double choose(std::size_t n, std::size_t k)
{
  if (k > n)
    return 0.0;
  double c = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return std::round(c);
}

void check_budget(double terms, double budget, const char* what)
{
  if (terms > budget)
    throw BudgetExceeded(std::string(what) + " enumeration needs about " + std::to_string(terms) +
                         " terms (budget " + std::to_string(budget) + ")");
}

/// Calls emit for every r-element subset of pool (as a sorted index list into pool).
void for_each_combination(std::size_t pool_size, std::size_t r, const std::function<void(const std::vector<std::size_t>&)>& emit)
{
  if (r > pool_size)
    return;
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i)
    idx[i] = i;
  for (;;) {
    emit(idx);
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == pool_size - r + i - 1)
      --i;
    if (i == 0)
      return;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j)
      idx[j] = idx[j - 1] + 1;
  }
}

/// Every tuple of length len over `support`, with the product of `probs` at its entries.
void for_each_tuple(const std::vector<State>& support, std::size_t len,
                    const std::function<void(const Trials&)>& emit)
{
  Trials t(len);
  std::vector<std::size_t> idx(len, 0);
  if (support.empty() && len > 0)
    return;
  for (;;) {
    for (std::size_t i = 0; i < len; ++i)
      t[i] = support[idx[i]];
    emit(t);
    std::size_t pos = 0;
    while (pos < len && ++idx[pos] == support.size())
      idx[pos++] = 0;
    if (pos == len)
      return;
  }
}

std::vector<State> support_of(const Eigen::VectorXd& probs)
{
  std::vector<State> s;
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs(i) > 0.0)
      s.push_back(static_cast<State>(i));
  return s;
}

/// Sets the diagonal to the mass the off-diagonal leaves over and clamps round-off.
TransitionMatrix finish(Eigen::MatrixXd entries, const FiniteDistribution& stationary, std::string tag,
                        Eigen::VectorXd rejection)
{
  TransitionMatrix a{std::move(entries), stationary, std::move(tag), std::move(rejection), 0};
  for (Eigen::Index x = 0; x < a.entries.rows(); ++x) {
    CompensatedSum<> off;
    for (Eigen::Index y = 0; y < a.entries.cols(); ++y)
      if (y != x)
        off += a.entries(x, y);
    double d = 1.0 - off.value();
    if (d < 0.0 && d >= kClampFloor) {
      d = 0.0;
      ++a.clamped_entries;
    }
    a.entries(x, x) = d;
  }
  return a;
}

/// Per-row accumulators for enumerated kernels.
struct RowMass
{
  std::vector<CompensatedSum<>> to;
  CompensatedSum<> rejected;

  explicit RowMass(std::size_t n) : to(n) {}
};

void store_row(Eigen::MatrixXd& entries, Eigen::VectorXd& rejection, Eigen::Index x, const RowMass& row)
{
  for (std::size_t y = 0; y < row.to.size(); ++y)
    entries(x, static_cast<Eigen::Index>(y)) = row.to[y].value();
  rejection(x) = row.rejected.value();
}

/// Selection J proportional to w and acceptance min{1, W / den(J)} for one trial tuple
/// of probability p; den < 0 means the move is impossible to reverse.
template <typename Den>
void spread_selection(RowMass& row, const Trials& trials, const std::vector<double>& w, double p, Den&& den)
{
  CompensatedSum<> total;
  for (double v : w)
    total += v;
  const double big_w = total.value();
  if (!(big_w > 0.0)) {
    row.rejected += p;
    return;
  }
  for (std::size_t j = 0; j < trials.size(); ++j) {
    if (w[j] <= 0.0)
      continue;
    const double sel = p * w[j] / big_w;
    // den(j) returns the probability-weighted acceptance over any balancing draws.
    const double accept = den(j, big_w);
    row.to[trials[j]] += sel * accept;
    row.rejected += sel * (1.0 - accept);
  }
}

double acceptance(double big_w, double den)
{
  if (den < 0.0)
    return 0.0;
  if (den == 0.0)
    return 1.0;
  return std::min(1.0, big_w / den);
}

TransitionMatrix enumerate(const MtmIsConfig& c, double budget)
{
  const FinitePair& pair = c.pair;
  const std::size_t n = pair.size();
  const std::vector<State> support = support_of(pair.proposal().probs());
  check_budget(static_cast<double>(n) * std::pow(static_cast<double>(support.size()), static_cast<double>(c.k)) *
                 static_cast<double>(c.k),
               budget, "mtm-is");
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rejection(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t x) {
    RowMass row(n);
    const double wx = pair.weight(x);
    std::vector<double> w(c.k);
    for_each_tuple(support, c.k, [&](const Trials& t) {
      double p = 1.0;
      for (std::size_t j = 0; j < c.k; ++j) {
        p *= pair.proposal()(t[j]);
        w[j] = pair.weights()(static_cast<Eigen::Index>(t[j]));
      }
      spread_selection(row, t, w, p, [&](std::size_t sel, double big_w) {
        CompensatedSum<> den;
        for (std::size_t j = 0; j < c.k; ++j)
          if (j != sel)
            den += w[j];
        den += wx;
        return acceptance(big_w, den.value());
      });
    });
    store_row(entries, rejection, static_cast<Eigen::Index>(x), row);
  });
  return finish(std::move(entries), pair.target(), c.k == 1 ? "imh" : "mtm-is", std::move(rejection));
}

TransitionMatrix enumerate(const MtmGeneralConfig& c, double budget)
{
  const std::size_t n = c.target.size();
  if (c.proposal.size() != n)
    throw InvalidConfiguration("target and conditional proposal live on different state spaces");
  if (c.k == 0)
    throw InvalidConfiguration("mtm-general needs k >= 1");
  const double nd = static_cast<double>(n);
  check_budget(nd * std::pow(nd, static_cast<double>(c.k)) * static_cast<double>(c.k) *
                 std::pow(nd, static_cast<double>(c.k - 1)),
               budget, "mtm-general");
  auto weight = [&](State from, State to) {
    const double p = c.target(to);
    return p == 0.0 ? 0.0 : p * c.lambda(from, to) / c.proposal(from, to);
  };
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rejection(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t x) {
    RowMass row(n);
    const std::vector<State> forward = support_of(c.proposal.row(x).probs());
    std::vector<double> w(c.k);
    for_each_tuple(forward, c.k, [&](const Trials& t) {
      double p = 1.0;
      for (std::size_t j = 0; j < c.k; ++j) {
        p *= c.proposal(x, t[j]);
        w[j] = weight(x, t[j]);
      }
      spread_selection(row, t, w, p, [&](std::size_t sel, double big_w) {
        const State y = t[sel];
        if (c.proposal(y, x) == 0.0 && c.target(x) > 0.0)
          return 0.0;
        const double wxy = weight(y, x);
        const std::vector<State> backward = support_of(c.proposal.row(y).probs());
        CompensatedSum<> accept;
        for_each_tuple(backward, c.k - 1, [&](const Trials& b) {
          double pb = 1.0;
          CompensatedSum<> den;
          for (State s : b) {
            pb *= c.proposal(y, s);
            den += weight(y, s);
          }
          den += wxy;
          accept += pb * acceptance(big_w, den.value());
        });
        return accept.value();
      });
    });
    store_row(entries, rejection, static_cast<Eigen::Index>(x), row);
  });
  return finish(std::move(entries), c.target, "mtm-general", std::move(rejection));
}

TransitionMatrix enumerate(const GmtmConfig& c, double budget)
{
  const JointProposal& joint = c.joint;
  const std::size_t n = c.target.size();
  const std::size_t k = joint.k();
  if (joint.state_count() != n)
    throw InvalidConfiguration("target and joint proposal live on different state spaces");
  if (c.lambdas.size() != 1 && c.lambdas.size() != k)
    throw InvalidConfiguration("generalized mtm needs one lambda or one per trial");
  const bool skip = c.balancing == Balancing::skip;
  if (skip && (!c.certificate || !c.certificate->covers(joint)))
    throw InvalidConfiguration("skipping balancing trials needs a certificate for this joint");
  const double nd = static_cast<double>(n);
  check_budget(nd * std::pow(nd, static_cast<double>(k)) * static_cast<double>(k) *
                 (skip ? 1.0 : std::pow(nd, static_cast<double>(k - 1))),
               budget, "gmtm");
  auto lambda = [&](std::size_t j) -> const SymmetricFunction& { return c.lambdas.size() == 1 ? c.lambdas[0] : c.lambdas[j]; };
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rejection(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t x) {
    RowMass row(n);
    std::vector<double> w(k);
    for (const WeightedTrials& out : joint.outcomes(x)) {
      const Trials& t = out.trials;
      for (std::size_t j = 0; j < k; ++j)
        w[j] = generalized_weight(c.target, j, x, t[j], joint, lambda(j));
      spread_selection(row, t, w, out.probability, [&](std::size_t sel, double big_w) {
        const State y = t[sel];
        if (joint.marginal(sel, y, x) == 0.0 && c.target(x) > 0.0)
          return 0.0;
        const double wxy = generalized_weight(c.target, sel, y, x, joint, lambda(sel));
        auto den_for = [&](const Trials& b) {
          CompensatedSum<> den;
          for (std::size_t i = 0; i < k; ++i)
            den += i == sel ? wxy : generalized_weight(c.target, i, y, b[i], joint, lambda(i));
          return den.value();
        };
        if (skip)
          return acceptance(big_w, den_for(t));
        CompensatedSum<> accept;
        for (const WeightedTrials& b : joint.conditional_outcomes(y, sel, x))
          accept += b.probability * acceptance(big_w, den_for(b.trials));
        return accept.value();
      });
    }
    store_row(entries, rejection, static_cast<Eigen::Index>(x), row);
  });
  return finish(std::move(entries), c.target, "gmtm", std::move(rejection));
}

TransitionMatrix enumerate(const SrsworConfig& c, double budget)
{
  const std::size_t n = c.target.size();
  if (c.k == 0 || c.k >= n)
    throw InvalidConfiguration("srswor needs 1 <= k <= N-1");
  check_budget(static_cast<double>(n) * static_cast<double>(n) * choose(n - 2, c.k - 1), budget, "srswor");
  const double subsets = choose(n - 1, c.k);
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rejection(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t x) {
    const double px = c.target(x);
    CompensatedSum<> moved;
    for (State y = 0; y < n; ++y) {
      const double py = c.target(y);
      if (y == x || py == 0.0)
        continue;
      std::vector<State> pool;
      for (State s = 0; s < n; ++s)
        if (s != x && s != y)
          pool.push_back(s);
      CompensatedSum<> a;
      for_each_combination(pool.size(), c.k - 1, [&](const std::vector<std::size_t>& idx) {
        CompensatedSum<> rest;
        for (std::size_t i : idx)
          rest += c.target(pool[i]);
        a += py * std::min(1.0 / (py + rest.value()), 1.0 / (px + rest.value()));
      });
      const double v = a.value() / subsets;
      entries(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = v;
      moved += v;
    }
    rejection(static_cast<Eigen::Index>(x)) = 1.0 - moved.value();
  });
  return finish(std::move(entries), c.target, "srswor", std::move(rejection));
}

TransitionMatrix enumerate(const Srswor2Config& c, double budget)
{
  const std::size_t n = c.target.size();
  if (c.k == 0 || c.k > n)
    throw InvalidConfiguration("srswor2 needs 1 <= k <= N");
  check_budget(static_cast<double>(n) * choose(n, c.k) * static_cast<double>(c.k), budget, "srswor2");
  const double p_subset = 1.0 / choose(n, c.k);
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rejection(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t x) {
    RowMass row(n);
    const double px = c.target(x);
    for_each_combination(n, c.k, [&](const std::vector<std::size_t>& s) {
      CompensatedSum<> mass;
      bool has_x = false;
      for (State v : s) {
        mass += c.target(v);
        has_x = has_x || v == x;
      }
      const double ps = mass.value();
      if (!(ps > 0.0)) {
        row.rejected += p_subset;
        return;
      }
      for (State y : s) {
        const double py = c.target(y);
        if (py == 0.0)
          continue;
        const double sel = p_subset * py / ps;
        const double accept = has_x ? 1.0 : std::min(1.0, ps / (px + ps - py));
        row.to[y] += sel * accept;
        row.rejected += sel * (1.0 - accept);
      }
    });
    store_row(entries, rejection, static_cast<Eigen::Index>(x), row);
  });
  return finish(std::move(entries), c.target, "srswor2", std::move(rejection));
}

TransitionMatrix enumerate(const StratifiedDesign& d, double budget)
{
  const std::size_t n = d.target().size();
  check_budget(static_cast<double>(n) * static_cast<double>(n), budget, "stratified");
  const Partition& part = d.partition();
  Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rejection(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t x) {
    const std::size_t bx = part.block_of(x);
    const double wx = d.block_weights()(static_cast<Eigen::Index>(bx));
    CompensatedSum<> rejected;
    for (std::size_t b = 0; b < part.block_count(); ++b) {
      const double pb = d.block_proposal()(b);
      if (pb == 0.0)
        continue;
      const double wb = d.block_weights()(static_cast<Eigen::Index>(b));
      const double accept = b == bx ? 1.0 : (std::isinf(wx) ? 0.0 : std::min(1.0, wb / wx));
      rejected += pb * (1.0 - accept);
      for (State y : part.block(b))
        if (y != x)
          entries(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = pb * d.within_block(b)(y) * accept;
    }
    rejection(static_cast<Eigen::Index>(x)) = rejected.value();
  });
  return finish(std::move(entries), d.target(), "stratified", std::move(rejection));
}

} // namespace

TransitionMatrix build_kernel_mtm_is(const FinitePair& pair, std::size_t k, std::size_t budget)
{
  const std::size_t n = pair.size();
  if (n > budget)
    throw BudgetExceeded("kernel of " + std::to_string(n) + " states exceeds the matrix budget of " +
                         std::to_string(budget));
  const HkEvaluator eval(pair, k, Enumeration{});
  Eigen::VectorXd h(static_cast<Eigen::Index>(n));
  for (State y = 0; y < n; ++y) {
    const double w = pair.weights()(static_cast<Eigen::Index>(y));
    // A state outside the target's support accepts every move: treat H there as +inf.
    h(static_cast<Eigen::Index>(y)) = w == 0.0 ? std::numeric_limits<double>::infinity()
                                               : (std::isinf(w) ? 0.0 : eval(w).value);
  }
  const Eigen::VectorXd& pi = pair.target().probs();
  Eigen::MatrixXd entries(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rejection(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t xs) {
    const auto x = static_cast<Eigen::Index>(xs);
    CompensatedSum<> accepted;
    for (Eigen::Index y = 0; y < static_cast<Eigen::Index>(n); ++y) {
      const double v = pi(y) == 0.0 ? 0.0 : std::min(h(x), h(y)) * pi(y);
      entries(x, y) = v;
      accepted += v;
    }
    rejection(x) = std::clamp(1.0 - accepted.value(), 0.0, 1.0);
  });
  return finish(std::move(entries), pair.target(), k == 1 ? "imh" : "mtm-is", std::move(rejection));
}

TransitionMatrix build_kernel_enumerated(const EnumeratedSampler& sampler, double budget)
{
  return std::visit([&](const auto& config) { return enumerate(config, budget); }, sampler);
}

SpectrumReport spectrum(const TransitionMatrix& a)
{
  const Eigen::VectorXd& pi = a.stationary.probs();
  if (a.entries.rows() != pi.size() || a.entries.cols() != pi.size())
    throw InvalidConfiguration("kernel and stationary law have different sizes");
  const double asym = flux_asymmetry(a.entries, pi);
  if (asym > 1e-10)
    throw InvalidConfiguration("kernel is not reversible (flux asymmetry " + std::to_string(asym) +
                               "); its spectrum need not be real");
  const std::vector<State> support = support_of(pi);
  const auto m = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd s(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto x = static_cast<Eigen::Index>(support[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto y = static_cast<Eigen::Index>(support[static_cast<std::size_t>(j)]);
      s(i, j) = std::sqrt(pi(x)) * a.entries(x, y) / std::sqrt(pi(y));
    }
  }
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  const JacobiResult eig = jacobi_eigenvalues(sym);

  SpectrumReport report;
  report.eigenvalues = eig.eigenvalues;
  report.jacobi_sweeps = eig.sweeps;
  double radius = 0.0;
  for (Eigen::Index i = 1; i < report.eigenvalues.size(); ++i)
    radius = std::max(radius, std::abs(report.eigenvalues(i)));
  report.spectral_gap = 1.0 - radius;
  report.rejection_values = a.rejection.size() == a.entries.rows() ? a.rejection : Eigen::VectorXd(a.entries.diagonal());
  report.clusters = cluster_eigenvalues(report.eigenvalues);
  return report;
}

Example4ClosedForm example4_closed_form(std::size_t n, double p)
{
  if (n < 4)
    throw DomainError("example 4 closed form needs N >= 4");
  const double nd = static_cast<double>(n);
  if (!(p >= 0.0 && p <= (nd - 1.0) / nd))
    throw DomainError("example 4 needs 0 <= p <= (N-1)/N");
  const double pi1 = 1.0 - p;
  const double pi2 = p / (nd - 1.0);
  Example4ClosedForm f;
  f.a1 = 2.0 * pi2 / ((nd - 1.0) * (pi1 + pi2));
  f.a2 = (pi1 - pi2) / (pi1 + pi2);
  f.a3 = 2.0 * pi1 / ((nd - 1.0) * (pi1 + pi2));
  f.a4 = (nd - 3.0) / ((nd - 1.0) * (nd - 2.0)) + 2.0 * pi2 / ((nd - 1.0) * (nd - 2.0) * (pi1 + pi2));
  f.eigenvalues.resize(static_cast<Eigen::Index>(n));
  f.eigenvalues(0) = 1.0;
  f.eigenvalues(1) = f.a2 - f.a3;
  for (Eigen::Index i = 2; i < f.eigenvalues.size(); ++i)
    f.eigenvalues(i) = -f.a4;
  std::sort(f.eigenvalues.data(), f.eigenvalues.data() + f.eigenvalues.size(), std::greater<double>());
  const double imh = 1.0 - 1.0 / (nd * pi1);
  f.imh2_rate = imh * imh;
  f.dominance = std::abs(f.a2 - f.a3) <= f.imh2_rate && f.a4 <= f.imh2_rate;
  return f;
}

Eigen::MatrixXd example4_matrix(std::size_t n, double p)
{
  const Example4ClosedForm f = example4_closed_form(n, p);
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Constant(m, m, f.a4);
  a.diagonal().setZero();
  a(0, 0) = f.a2;
  a.row(0).tail(m - 1).setConstant(f.a1);
  a.col(0).tail(m - 1).setConstant(f.a3);
  return a;
}

} // namespace mtm
