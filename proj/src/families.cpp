#include "mtm/families.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace mtm {

FiniteDistribution example1_target(std::size_t m)
{
  if (m == 0)
    throw DomainError("example1 needs m >= 1");
  Eigen::VectorXd probs(static_cast<Eigen::Index>(m));
  const double denom = static_cast<double>(m) * static_cast<double>(m);
  for (std::size_t i = 1; i <= m; ++i)
    probs(static_cast<Eigen::Index>(i - 1)) = static_cast<double>(2 * m + 1 - 2 * i) / denom;
  return FiniteDistribution(std::move(probs));
}

FiniteDistribution binomial_target(std::size_t m, double theta)
{
  if (!(theta >= 0.0 && theta <= 1.0))
    throw DomainError("binomial theta must lie in [0, 1]");
  Eigen::VectorXd probs(static_cast<Eigen::Index>(m + 1));
  const double md = static_cast<double>(m);
  for (std::size_t x = 0; x <= m; ++x) {
    const double xd = static_cast<double>(x);
    const double log_choose = std::lgamma(md + 1.0) - std::lgamma(xd + 1.0) - std::lgamma(md - xd + 1.0);
    const double a = x == 0 ? 0.0 : xd * std::log(theta);
    const double b = x == m ? 0.0 : (md - xd) * std::log1p(-theta);
    probs(static_cast<Eigen::Index>(x)) = std::exp(log_choose + a + b);
  }
  return FiniteDistribution(std::move(probs));
}

FiniteDistribution example4_target(std::size_t n, double p)
{
  if (n < 2)
    throw DomainError("example4 needs N >= 2");
  const double nd = static_cast<double>(n);
  if (!(p >= 0.0 && p <= (nd - 1.0) / nd))
    throw DomainError("example4 needs 0 <= p <= (N-1)/N");
  Eigen::VectorXd probs = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), p / (nd - 1.0));
  probs(0) = 1.0 - p;
  return FiniteDistribution(std::move(probs));
}

ContinuousPair normal_vs_scaled_t(double c, double df, std::optional<double> w_star,
                                  std::optional<SearchInterval> interval)
{
  if (!(c > 0.0) || !(df > 0.0))
    throw DomainError("normal-vs-scaled-t needs c > 0 and df > 0");
  const double log_norm_const = -0.5 * std::log(2.0 * std::numbers::pi);
  const double log_t_const =
    std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
  auto target = [log_norm_const](double x) { return log_norm_const - 0.5 * x * x; };
  auto proposal = [c, df, log_t_const](double x) {
    const double u = c * x;
    return std::log(c) + log_t_const - 0.5 * (df + 1.0) * std::log1p(u * u / df);
  };
  auto sampler = [c, df](Rng& rng) {
    std::student_t_distribution<double> t(df);
    return t(rng) / c;
  };
  return ContinuousPair(target, proposal, sampler, w_star, interval);
}

namespace {

std::size_t require_size(const nlohmann::json& spec, const char* key)
{
  if (!spec.contains(key))
    throw InvalidConfiguration(std::string("distribution spec is missing \"") + key + "\"");
  const auto v = spec.at(key).get<long long>();
  if (v < 1)
    throw InvalidConfiguration(std::string("\"") + key + "\" must be positive");
  return static_cast<std::size_t>(v);
}

double require_real(const nlohmann::json& spec, const char* key)
{
  if (!spec.contains(key))
    throw InvalidConfiguration(std::string("distribution spec is missing \"") + key + "\"");
  return spec.at(key).get<double>();
}

} // namespace

FiniteDistribution load_finite_distribution(const nlohmann::json& spec, std::optional<std::size_t> size_hint)
{
  if (!spec.is_object())
    throw InvalidConfiguration("distribution spec must be a JSON object");
  if (spec.contains("probs")) {
    const auto values = spec.at("probs").get<std::vector<double>>();
    return FiniteDistribution(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  if (!spec.contains("family"))
    throw InvalidConfiguration("distribution spec needs \"probs\" or \"family\"");
  const auto family = spec.at("family").get<std::string>();
  if (family == "uniform") {
    if (spec.contains("N"))
      return FiniteDistribution::uniform(require_size(spec, "N"));
    if (!size_hint)
      throw InvalidConfiguration("uniform spec without \"N\" needs a target to take its size from");
    return FiniteDistribution::uniform(*size_hint);
  }
  if (family == "example1")
    return example1_target(require_size(spec, "m"));
  if (family == "binomial")
    return binomial_target(require_size(spec, "m"), require_real(spec, "theta"));
  if (family == "example4")
    return example4_target(require_size(spec, "N"), require_real(spec, "p"));
  throw InvalidConfiguration("unknown finite distribution family \"" + family + "\"");
}

WeightedPair load_pair(const nlohmann::json& target, const nlohmann::json& proposal)
{
  if (target.is_object() && target.value("family", std::string{}) == "normal-vs-scaled-t") {
    if (!proposal.is_null())
      throw InvalidConfiguration("normal-vs-scaled-t fixes its own proposal");
    std::optional<double> w_star;
    if (target.contains("w_star"))
      w_star = target.at("w_star").get<double>();
    std::optional<SearchInterval> interval = SearchInterval{-10.0, 10.0};
    if (target.contains("interval")) {
      const auto iv = target.at("interval").get<std::vector<double>>();
      if (iv.size() != 2)
        throw InvalidConfiguration("\"interval\" must be [lo, hi]");
      interval = SearchInterval{iv[0], iv[1]};
    }
    return normal_vs_scaled_t(require_real(target, "c"), target.value("df", 10.0), w_star, interval);
  }
  FiniteDistribution pi = load_finite_distribution(target);
  FiniteDistribution t = proposal.is_null() ? FiniteDistribution::uniform(pi.size())
                                            : load_finite_distribution(proposal, pi.size());
  return FinitePair(std::move(pi), std::move(t));
}

} // namespace mtm
