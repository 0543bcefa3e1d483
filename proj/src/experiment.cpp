#include "mtm/experiment.hpp"

#include "mtm/empirical.hpp"
#include "mtm/families.hpp"
#include "mtm/samplers.hpp"
#include "mtm/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mtm {

namespace {

const std::set<std::string> kSamplers = {"imh", "mtm-is", "mtm-general", "gmtm", "srswor", "srswor2", "stratified"};
const std::set<std::string> kAnalyses = {"rates", "recursive", "spectrum", "decay", "chain"};
const std::set<std::string> kFormats = {"csv", "json", "svg"};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
  return Rng(seed).substream(a).substream(b)();
}

enum SeedSlot : std::uint64_t
{
  slot_rates = 0,
  slot_recursive = 1,
  slot_chain = 2
};

struct CaseData
{
  const ExperimentCase* spec = nullptr;
  std::size_t index = 0;
  std::optional<WeightedPair> pair;
  std::vector<WeightedPair> per_trial;
};

const FinitePair& finite_pair(const CaseData& c, const char* analysis)
{
  if (!c.pair || !is_finite(*c.pair))
    throw InvalidConfiguration(std::string(analysis) + " needs a finite target (case \"" + c.spec->label + "\")");
  return std::get<FinitePair>(*c.pair);
}

Partition make_partition(const nlohmann::json& spec, std::size_t n)
{
  if (spec.is_null() || spec == "singletons")
    return Partition::singletons(n);
  if (spec == "pairing")
    return Partition::pairing(n);
  if (spec.is_array())
    return Partition(spec.get<std::vector<std::vector<State>>>(), n);
  throw InvalidConfiguration("partition must be \"pairing\", \"singletons\" or a list of blocks");
}

State start_state(const ExperimentConfig& cfg, const FinitePair& pair)
{
  const State x0 = cfg.start_state.value_or(pair.argmax_weight());
  if (x0 >= pair.size())
    throw InvalidConfiguration("start_state " + std::to_string(x0) + " is outside the state space");
  return x0;
}

std::optional<BalancingCertificate> certify(const ExperimentConfig& cfg, const JointProposal& joint)
{
  if (cfg.balancing != "skip")
    return std::nullopt;
  BalancingVerdict v = verify_balancing_condition(joint);
  if (!v.holds)
    throw InvalidConfiguration(std::string("balancing trials cannot be skipped: the ") + to_string(joint.kind()) +
                               " joint fails the balancing condition (discrepancy " +
                               format_number(v.max_discrepancy) + ")");
  return v.certificate;
}

JointProposal make_joint(const CaseData& c, const FinitePair& pair, std::size_t k)
{
  if (!c.per_trial.empty()) {
    std::vector<FiniteDistribution> laws;
    for (const auto& p : c.per_trial)
      laws.push_back(std::get<FinitePair>(p).proposal());
    return JointProposal::independent(std::move(laws));
  }
  return JointProposal::iid(pair.proposal(), k);
}

TransitionMatrix build_kernel(const ExperimentConfig& cfg, const CaseData& c, std::size_t k)
{
  const FinitePair& pair = finite_pair(c, "a kernel");
  const std::string& s = cfg.sampler;
  if (s == "imh")
    return build_kernel_mtm_is(pair, 1);
  if (s == "mtm-is")
    return build_kernel_mtm_is(pair, k);
  if (s == "mtm-general")
    return build_kernel_enumerated(
      MtmGeneralConfig{pair.target(), ConditionalProposal::independent(pair.proposal()), lambda_one(), k});
  if (s == "gmtm") {
    JointProposal joint = make_joint(c, pair, k);
    auto cert = certify(cfg, joint);
    return build_kernel_enumerated(GmtmConfig{pair.target(), joint, {lambda_one()},
                                              cert ? Balancing::skip : Balancing::draw, cert});
  }
  if (s == "srswor")
    return build_kernel_enumerated(SrsworConfig{pair.target(), k});
  if (s == "srswor2")
    return build_kernel_enumerated(Srswor2Config{pair.target(), k});
  return build_kernel_enumerated(
    StratifiedDesign(pair.target(), pair.proposal(), make_partition(cfg.partition, pair.size())));
}

void add_row(Table& t, std::vector<std::string> row) { t.rows.push_back(std::move(row)); }

std::string fmt(double v) { return format_number(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

class Runner
{
public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg) {}

  ExperimentReport run()
  {
    cfg_.validate();
    report_.results["schema_version"] = kReportSchemaVersion;
    report_.results["config"] = cfg_.to_json();
    report_.results["cases"] = nlohmann::ordered_json::array();
    const bool many_cases = cfg_.cases.size() > 1;
    prefix_ = many_cases ? std::vector<std::string>{"case"} : std::vector<std::string>{};

    for (std::size_t i = 0; i < cfg_.cases.size(); ++i) {
      CaseData c;
      c.spec = &cfg_.cases[i];
      c.index = i;
      load(c);
      nlohmann::ordered_json out;
      out["label"] = c.spec->label;
      describe_pair(c, out);
      for (const auto& analysis : cfg_.analyses) {
        const auto start = std::chrono::steady_clock::now();
        if (analysis == "rates")
          rates(c, out);
        else if (analysis == "recursive")
          recursive(c, out);
        else if (analysis == "spectrum")
          spectrum_analysis(c, out);
        else if (analysis == "decay")
          decay(c, out);
        else if (analysis == "chain")
          chain(c, out);
        const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        report_.timings[c.spec->label + "/" + analysis + "_ms"] = ms;
      }
      report_.results["cases"].push_back(std::move(out));
    }
    gap_ratio();
    nlohmann::ordered_json verdicts = nlohmann::ordered_json::array();
    for (const auto& v : report_.verdicts)
      verdicts.push_back({{"name", v.name}, {"ok", v.ok}, {"detail", v.detail}});
    report_.results["verdicts"] = std::move(verdicts);
    report_.results["ok"] = report_.ok();
    return std::move(report_);
  }

private:
  void load(CaseData& c)
  {
    const auto& spec = *c.spec;
    if (spec.proposals.is_array()) {
      for (const auto& p : spec.proposals)
        c.per_trial.push_back(load_pair(spec.target, p));
      if (c.per_trial.empty())
        throw InvalidConfiguration("\"proposals\" must not be empty");
      c.pair = c.per_trial.front();
    } else {
      c.pair = load_pair(spec.target, spec.proposal);
    }
  }

  std::vector<std::string> cells(const CaseData& c, std::vector<std::string> rest) const
  {
    std::vector<std::string> row;
    if (!prefix_.empty())
      row.push_back(c.spec->label);
    row.insert(row.end(), rest.begin(), rest.end());
    return row;
  }

  Table& table(const std::string& name, std::vector<std::string> columns)
  {
    auto [it, inserted] = report_.tables.try_emplace(name);
    if (inserted) {
      it->second.columns = prefix_;
      it->second.columns.insert(it->second.columns.end(), columns.begin(), columns.end());
    }
    return it->second;
  }

  std::vector<Series>& chart(const std::string& name, ChartLabels labels)
  {
    report_.chart_labels.try_emplace(name, std::move(labels));
    return report_.charts[name];
  }

  void verdict(std::string name, bool ok, std::string detail = {})
  {
    report_.verdicts.push_back({std::move(name), ok, std::move(detail)});
  }

  HkMode mode_for(const CaseData& c, SeedSlot slot) const
  {
    const auto seed = cfg_.seed ? std::optional<std::uint64_t>(derive_seed(*cfg_.seed, c.index, slot)) : std::nullopt;
    return parse_mode(cfg_.mode, cfg_.mc_samples, seed);
  }

  void describe_pair(const CaseData& c, nlohmann::ordered_json& out)
  {
    const WeightSupremum ws = essential_supremum(*c.pair);
    out["w_star"] = ws.value;
    out["w_star_method"] = ws.method;
    out["finite"] = is_finite(*c.pair);
    if (is_finite(*c.pair))
      out["states"] = std::get<FinitePair>(*c.pair).size();
  }

  void rates(const CaseData& c, nlohmann::ordered_json& out)
  {
    const std::string& s = cfg_.sampler;
    if (s == "stratified") {
      const FinitePair& pair = finite_pair(c, "stratified rates");
      const Partition part = make_partition(cfg_.partition, pair.size());
      const RateReport r = stratified_rate(pair.target(), pair.proposal(), part);
      const RateReport imh = rate_imh_repeated(*c.pair, 1);
      out["stratified_rate"] = {{"rate", r.rate}, {"method", r.method}, {"imh_rate", imh.rate}};
      add_row(table("rates", {"blocks", "stratified_rate", "imh_rate"}),
              cells(c, {fmt(std::uint64_t{part.block_count()}), fmt(r.rate), fmt(imh.rate)}));
      return;
    }
    if (!c.per_trial.empty()) {
      const RateReport r = rate_nonidentical(c.per_trial, mode_for(c, slot_rates));
      double bound = 1.0;
      for (const auto& p : c.per_trial)
        bound *= 1.0 - 1.0 / finite_w_star(p);
      const double gap = r.rate - bound;
      const bool ok = r.method == "monte-carlo" ? gap >= -3.0 * r.std_error : gap >= -1e-12;
      out["nonidentical_rate"] = {{"k", r.k},         {"rate", r.rate},   {"std_error", r.std_error},
                                  {"method", r.method}, {"samples", r.samples_used}, {"product_bound", bound},
                                  {"gap", gap}};
      add_row(table("rates", {"k", "rate", "se", "product_bound", "gap"}),
              cells(c, {fmt(std::uint64_t{r.k}), fmt(r.rate), fmt(r.std_error), fmt(bound), fmt(gap)}));
      verdict("nonidentical-bound " + c.spec->label, ok, "gap " + fmt(gap));
      return;
    }
    if (s != "imh" && s != "mtm-is")
      throw InvalidConfiguration("rates are available for imh, mtm-is, stratified and per-trial proposals; \"" + s +
                                 "\" has no rate theory");
    const auto rows = verify_comparison(*c.pair, cfg_.k_max, mode_for(c, slot_rates));
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    Table& t = table("rates", {"k", "mtm_rate", "mtm_se", "imh_k_rate", "gap"});
    Series mtm{"MTM-IS(k) " + c.spec->label, {}};
    Series imh{"IMH^k " + c.spec->label, {}};
    std::string failed;
    double max_gap = 0.0;
    for (const auto& row : rows) {
      if (row.k < cfg_.k_min)
        continue;
      arr.push_back({{"k", row.k},
                     {"mtm_rate", row.mtm_rate},
                     {"mtm_se", row.mtm_se},
                     {"imh_k_rate", row.imh_k_rate},
                     {"gap", row.gap},
                     {"ok", row.ok},
                     {"method", row.method},
                     {"samples", row.samples}});
      add_row(t, cells(c, {fmt(std::uint64_t{row.k}), fmt(row.mtm_rate), fmt(row.mtm_se), fmt(row.imh_k_rate),
                           fmt(row.gap)}));
      mtm.points.emplace_back(static_cast<double>(row.k), row.mtm_rate);
      imh.points.emplace_back(static_cast<double>(row.k), row.imh_k_rate);
      if (!row.ok)
        failed += (failed.empty() ? "k=" : ",") + std::to_string(row.k);
      max_gap = std::max(max_gap, row.gap);
    }
    out["rates"] = std::move(arr);
    out["max_gap"] = max_gap;
    max_gaps_.push_back(max_gap);
    auto& ch = chart("rates", {cfg_.name + ": convergence rates", "k", "rate"});
    ch.push_back(std::move(mtm));
    ch.push_back(std::move(imh));
    verdict("comparison " + c.spec->label, failed.empty(), failed.empty() ? "MTM-IS >= IMH^k for every k" : failed);
  }

  void recursive(const CaseData& c, nlohmann::ordered_json& out)
  {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    Table& t = table("recursive", {"k", "left", "right", "margin", "se"});
    std::string failed;
    for (std::size_t k = std::max<std::size_t>(3, cfg_.k_min); k <= cfg_.k_max; ++k) {
      const InequalityCheck r = verify_recursive_inequality(*c.pair, k, mode_for(c, slot_recursive));
      arr.push_back({{"k", k},
                     {"left", r.left},
                     {"right", r.right},
                     {"margin", r.margin},
                     {"std_error", r.std_error},
                     {"holds", r.holds},
                     {"method", r.method}});
      add_row(t, cells(c, {fmt(std::uint64_t{k}), fmt(r.left), fmt(r.right), fmt(r.margin), fmt(r.std_error)}));
      if (!r.holds)
        failed += (failed.empty() ? "k=" : ",") + std::to_string(k);
    }
    out["recursive"] = std::move(arr);
    verdict("recursive " + c.spec->label, failed.empty(), failed);
  }

  void spectrum_analysis(const CaseData& c, nlohmann::ordered_json& out)
  {
    const bool mtm_family = cfg_.sampler == "imh" || cfg_.sampler == "mtm-is";
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    Table& t = table("spectrum", {"k", "index", "eigenvalue"});
    auto& ch = chart("spectrum", {cfg_.name + ": spectrum", "index", "eigenvalue"});
    for (std::size_t k = cfg_.k_min; k <= cfg_.k_max; ++k) {
      const TransitionMatrix a = build_kernel(cfg_, c, k);
      const KernelDiagnostics d = a.diagnose();
      const SpectrumReport sr = spectrum(a);
      std::vector<double> ev(sr.eigenvalues.data(), sr.eigenvalues.data() + sr.eigenvalues.size());
      std::vector<double> rv(sr.rejection_values.data(), sr.rejection_values.data() + sr.rejection_values.size());
      nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
      for (const auto& cl : sr.clusters)
        clusters.push_back({{"value", cl.value}, {"multiplicity", cl.multiplicity}});
      arr.push_back({{"k", k},
                     {"eigenvalues", ev},
                     {"rejection_values", rv},
                     {"gap", sr.spectral_gap},
                     {"clusters", std::move(clusters)},
                     {"flux_asymmetry", d.flux_asymmetry},
                     {"row_error", d.max_row_error}});
      Series s{a.sampler_tag + " k=" + std::to_string(k) + " " + c.spec->label, {}};
      for (std::size_t i = 0; i < ev.size(); ++i) {
        add_row(t, cells(c, {fmt(std::uint64_t{k}), fmt(std::uint64_t{i}), fmt(ev[i])}));
        s.points.emplace_back(static_cast<double>(i), ev[i]);
      }
      ch.push_back(std::move(s));
      const std::string tag = c.spec->label + " k=" + std::to_string(k);
      verdict("reversible " + tag, d.flux_asymmetry <= 1e-12, "flux asymmetry " + fmt(d.flux_asymmetry));
      if (mtm_family) {
        double worst = 0.0;
        for (std::size_t i = 1; i < ev.size(); ++i) {
          double best = std::numeric_limits<double>::infinity();
          for (double r : rv)
            best = std::min(best, std::abs(ev[i] - r));
          worst = std::max(worst, best);
        }
        verdict("containment " + tag, worst <= 1e-8, "max distance to R values " + fmt(worst));
      }
      if (cfg_.sampler == "imh")
        break;
    }
    out["spectra"] = std::move(arr);
  }

  void decay(const CaseData& c, nlohmann::ordered_json& out)
  {
    const FinitePair& pair = finite_pair(c, "decay");
    const bool mtm_family = cfg_.sampler == "imh" || cfg_.sampler == "mtm-is";
    const State x0 = start_state(cfg_, pair);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    Table& t = table("decay", {"k", "n", "tv", "bound", "chi_square"});
    auto& ch = chart("decay", {cfg_.name + ": distance to target", "n", "distance"});
    for (std::size_t k = cfg_.k_min; k <= cfg_.k_max; ++k) {
      const std::size_t kk = cfg_.sampler == "imh" ? 1 : k;
      const TransitionMatrix a = build_kernel(cfg_, c, kk);
      const DecayCurve tv = tv_curve(a, x0, cfg_.decay_steps);
      const DecayCurve chi = chi_square_curve(a, x0, cfg_.decay_steps);
      std::optional<double> rate;
      if (mtm_family)
        rate = exact_rate_mtm_is(*c.pair, kk, Enumeration{}).rate;
      nlohmann::ordered_json pts = nlohmann::ordered_json::array();
      Series tv_series{"TV k=" + std::to_string(kk) + " " + c.spec->label, {}};
      Series bound_series{"bound k=" + std::to_string(kk) + " " + c.spec->label, {}};
      bool ok = true;
      const double chi0 = chi.points.front().value;
      for (std::size_t i = 1; i < tv.points.size(); ++i) {
        const auto n = static_cast<double>(tv.points[i].n);
        nlohmann::ordered_json p = {{"n", tv.points[i].n}, {"tv", tv.points[i].value}};
        std::string bound_cell;
        if (rate) {
          const double b = std::pow(*rate, n);
          p["bound"] = b;
          bound_cell = fmt(b);
          bound_series.points.emplace_back(n, b);
          ok = ok && tv.points[i].value <= b + 1e-12 && chi.points[i].value <= b * chi0 + 1e-12;
        } else {
          p["bound"] = nullptr;
        }
        p["chi_square"] = chi.points[i].value;
        pts.push_back(std::move(p));
        tv_series.points.emplace_back(n, tv.points[i].value);
        add_row(t, cells(c, {fmt(std::uint64_t{kk}), fmt(std::uint64_t{tv.points[i].n}), fmt(tv.points[i].value),
                             bound_cell, fmt(chi.points[i].value)}));
      }
      arr.push_back({{"k", kk}, {"start_state", x0}, {"points", std::move(pts)}});
      ch.push_back(std::move(tv_series));
      if (rate) {
        ch.push_back(std::move(bound_series));
        verdict("decay-bound " + c.spec->label + " k=" + std::to_string(kk), ok,
                "TV and chi-square below the geometric bound");
      }
      if (cfg_.sampler == "imh")
        break;
    }
    out["decay"] = std::move(arr);
  }

  template <typename S, typename Step>
  void record_chain(const CaseData& c, nlohmann::ordered_json& out, Step&& step, S x0, const FinitePair* finite)
  {
    Rng rng(derive_seed(cfg_.seed.value_or(0), c.index, slot_chain));
    const ChainTrace<S> trace = run_chain(step, x0, cfg_.chain_steps, rng, cfg_.sampler);
    nlohmann::ordered_json summary = {{"steps", cfg_.chain_steps},
                                      {"start_state", x0},
                                      {"acceptance_count", trace.acceptance_count},
                                      {"degenerate_count", trace.degenerate_count},
                                      {"acceptance_rate", cfg_.chain_steps ? static_cast<double>(trace.acceptance_count) /
                                                                               static_cast<double>(cfg_.chain_steps)
                                                                           : 0.0}};
    if (finite) {
      Eigen::VectorXd freq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(finite->size()));
      for (std::size_t i = 1; i < trace.states.size(); ++i)
        freq(static_cast<Eigen::Index>(trace.states[i])) += 1.0;
      if (cfg_.chain_steps > 0) {
        freq /= static_cast<double>(cfg_.chain_steps);
        summary["max_frequency_error"] = (freq - finite->target().probs()).cwiseAbs().maxCoeff();
      }
    }
    out["chain"] = std::move(summary);
    Table& t = table("chain", {"step", "state", "accepted"});
    Series s{"chain " + c.spec->label, {}};
    for (std::size_t i = 0; i < trace.states.size(); ++i) {
      const double v = static_cast<double>(trace.states[i]);
      add_row(t, cells(c, {std::to_string(i), fmt(v), (i > 0 && trace.accepted[i - 1]) ? "1" : "0"}));
      s.points.emplace_back(static_cast<double>(i), v);
    }
    chart("chain", {cfg_.name + ": trace", "step", "state"}).push_back(std::move(s));
  }

  void chain(const CaseData& c, nlohmann::ordered_json& out)
  {
    const std::size_t k = cfg_.k_max;
    const std::string& s = cfg_.sampler;
    if (!is_finite(*c.pair)) {
      const auto& pair = std::get<ContinuousPair>(*c.pair);
      const double x0 = 0.0;
      if (s == "imh")
        record_chain(c, out, [&](double x, Rng& r) { return imh_step(pair, x, r); }, x0, nullptr);
      else if (s == "mtm-is")
        record_chain(c, out, [&](double x, Rng& r) { return mtm_is_step(pair, k, x, r); }, x0, nullptr);
      else
        throw InvalidConfiguration("continuous chains support imh and mtm-is only");
      return;
    }
    const FinitePair& pair = std::get<FinitePair>(*c.pair);
    const State x0 = start_state(cfg_, pair);
    if (s == "imh") {
      record_chain(c, out, [&](State x, Rng& r) { return imh_step(pair, x, r); }, x0, &pair);
    } else if (s == "mtm-is") {
      record_chain(c, out, [&](State x, Rng& r) { return mtm_is_step(pair, k, x, r); }, x0, &pair);
    } else if (s == "mtm-general") {
      const ConditionalProposal t = ConditionalProposal::independent(pair.proposal());
      const SymmetricFunction one = lambda_one();
      record_chain(c, out, [&](State x, Rng& r) { return mtm_general_step(pair.target(), t, one, k, x, r); }, x0,
                   &pair);
    } else if (s == "gmtm") {
      const JointProposal joint = make_joint(c, pair, k);
      const auto cert = certify(cfg_, joint);
      const std::vector<SymmetricFunction> lambdas = {lambda_one()};
      record_chain(
        c, out,
        [&](State x, Rng& r) {
          return generalized_mtm_step(pair.target(), joint, lambdas, x, r, cert ? Balancing::skip : Balancing::draw,
                                      cert ? &*cert : nullptr);
        },
        x0, &pair);
    } else if (s == "srswor") {
      record_chain(c, out, [&](State x, Rng& r) { return mtm_srswor_step(pair.target(), k, x, r); }, x0, &pair);
    } else if (s == "srswor2") {
      record_chain(c, out, [&](State x, Rng& r) { return mtm_srswor2_step(pair.target(), k, x, r); }, x0, &pair);
    } else {
      const StratifiedDesign design(pair.target(), pair.proposal(), make_partition(cfg_.partition, pair.size()));
      record_chain(c, out, [&](State x, Rng& r) { return stratified_imh_step(design, x, r); }, x0, &pair);
    }
  }

  void gap_ratio()
  {
    if (!cfg_.gap_ratio_check)
      return;
    if (max_gaps_.size() < 2)
      throw InvalidConfiguration("gap_ratio_check needs at least two cases with a rates analysis");
    nlohmann::ordered_json ratios = nlohmann::ordered_json::array();
    bool ok = max_gaps_[0] > 0.0;
    for (std::size_t i = 1; i < max_gaps_.size(); ++i) {
      const double r = max_gaps_[0] > 0.0 ? max_gaps_[i] / max_gaps_[0] : std::numeric_limits<double>::infinity();
      ratios.push_back(r);
      ok = ok && r < 1.0;
    }
    report_.results["max_gap_ratios"] = ratios;
    std::string detail = "max_k gap relative to \"" + cfg_.cases[0].label + "\":";
    for (const auto& r : ratios)
      detail += " " + fmt(r.get<double>());
    verdict("gap-ratio", ok, detail);
  }

  ExperimentConfig cfg_;
  ExperimentReport report_;
  std::vector<std::string> prefix_;
  std::vector<double> max_gaps_;
};

} // namespace

std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

HkMode parse_mode(const std::string& mode, std::uint64_t samples, std::optional<std::uint64_t> seed)
{
  if (mode == "enum")
    return Enumeration{};
  if (mode != "mc" && mode != "auto")
    throw InvalidConfiguration("mode must be enum, mc or auto (got \"" + mode + "\")");
  if (!seed)
    throw InvalidConfiguration("mode \"" + mode + "\" may use Monte Carlo and needs a seed");
  if (mode == "mc")
    return MonteCarlo{samples, *seed};
  return AutoMode{samples, *seed};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j)
{
  if (!j.is_object())
    throw InvalidConfiguration("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    c.sampler = j.value("sampler", c.sampler);
    if (j.contains("k_range")) {
      const auto& kr = j.at("k_range");
      if (kr.is_array() && kr.size() == 2) {
        c.k_min = kr[0].get<std::size_t>();
        c.k_max = kr[1].get<std::size_t>();
      } else if (kr.is_number_unsigned()) {
        c.k_min = c.k_max = kr.get<std::size_t>();
      } else {
        throw InvalidConfiguration("k_range must be [k_min, k_max] or a single k");
      }
    }
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    if (j.contains("seed"))
      c.seed = j.at("seed").get<std::uint64_t>();
    c.mode = j.value("mode", c.mode);
    if (j.contains("analyses"))
      c.analyses = j.at("analyses").get<std::vector<std::string>>();
    if (j.contains("outputs")) {
      for (const auto& o : j.at("outputs")) {
        OutputSpec spec;
        spec.format = o.at("format").get<std::string>();
        spec.path = o.at("path").get<std::string>();
        spec.table = o.value("table", std::string{});
        c.outputs.push_back(std::move(spec));
      }
    }
    c.decay_steps = j.value("decay_steps", c.decay_steps);
    c.chain_steps = j.value("chain_steps", c.chain_steps);
    if (j.contains("start_state"))
      c.start_state = j.at("start_state").get<std::size_t>();
    c.gap_ratio_check = j.value("gap_ratio_check", false);
    if (j.contains("partition"))
      c.partition = j.at("partition");
    c.balancing = j.value("balancing", c.balancing);

    if (j.contains("cases")) {
      for (const auto& cj : j.at("cases")) {
        ExperimentCase ec;
        ec.label = cj.value("label", "case" + std::to_string(c.cases.size()));
        ec.target = cj.at("target");
        ec.proposal = cj.value("proposal", nlohmann::json());
        ec.proposals = cj.value("proposals", nlohmann::json());
        c.cases.push_back(std::move(ec));
      }
    } else if (j.contains("target")) {
      ExperimentCase ec;
      ec.label = j.value("label", c.name);
      ec.target = j.at("target");
      ec.proposal = j.value("proposal", nlohmann::json());
      ec.proposals = j.value("proposals", nlohmann::json());
      c.cases.push_back(std::move(ec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfiguration(std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const
{
  if (cases.empty())
    throw InvalidConfiguration("experiment config needs a \"target\" or a nonempty \"cases\" list");
  if (!kSamplers.count(sampler))
    throw InvalidConfiguration("unknown sampler tag \"" + sampler + "\"");
  if (k_min == 0 || k_min > k_max)
    throw InvalidConfiguration("k_range must satisfy 1 <= k_min <= k_max");
  for (const auto& a : analyses)
    if (!kAnalyses.count(a))
      throw InvalidConfiguration("unknown analysis \"" + a + "\"");
  for (const auto& o : outputs)
    if (!kFormats.count(o.format))
      throw InvalidConfiguration("unknown output format \"" + o.format + "\"");
  if (mode != "enum" && mode != "mc" && mode != "auto")
    throw InvalidConfiguration("mode must be enum, mc or auto (got \"" + mode + "\")");
  if (mode != "enum" && !seed)
    throw InvalidConfiguration("mode \"" + mode + "\" may use Monte Carlo and needs a seed");
  if (std::find(analyses.begin(), analyses.end(), "chain") != analyses.end() && !seed)
    throw InvalidConfiguration("a chain analysis needs a seed");
  if (balancing != "draw" && balancing != "skip")
    throw InvalidConfiguration("balancing must be draw or skip");
}

nlohmann::ordered_json ExperimentConfig::to_json() const
{
  nlohmann::ordered_json j;
  j["name"] = name;
  j["sampler"] = sampler;
  j["k_range"] = {k_min, k_max};
  j["mc_samples"] = mc_samples;
  if (seed)
    j["seed"] = *seed;
  j["mode"] = mode;
  j["analyses"] = analyses;
  j["decay_steps"] = decay_steps;
  j["chain_steps"] = chain_steps;
  if (start_state)
    j["start_state"] = *start_state;
  j["gap_ratio_check"] = gap_ratio_check;
  if (!partition.is_null())
    j["partition"] = nlohmann::ordered_json::parse(partition.dump());
  j["balancing"] = balancing;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const auto& c : cases) {
    nlohmann::ordered_json cj;
    cj["label"] = c.label;
    cj["target"] = nlohmann::ordered_json::parse(c.target.dump());
    if (!c.proposal.is_null())
      cj["proposal"] = nlohmann::ordered_json::parse(c.proposal.dump());
    if (!c.proposals.is_null())
      cj["proposals"] = nlohmann::ordered_json::parse(c.proposals.dump());
    cs.push_back(std::move(cj));
  }
  j["cases"] = std::move(cs);
  nlohmann::ordered_json outs = nlohmann::ordered_json::array();
  for (const auto& o : outputs)
    outs.push_back({{"format", o.format}, {"path", o.path}, {"table", o.table}});
  j["outputs"] = std::move(outs);
  return j;
}

bool ExperimentReport::ok() const
{
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.ok; });
}

nlohmann::ordered_json ExperimentReport::to_json(bool with_timings) const
{
  nlohmann::ordered_json j = results;
  if (with_timings)
    j["timings"] = timings;
  return j;
}

ExperimentReport run_experiment(const ExperimentConfig& config) { return Runner(config).run(); }

std::string render_csv(const Table& table)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

std::string render_table(const ExperimentReport& report, const std::string& table, const std::string& format)
{
  if (format == "json")
    return report.to_json().dump(2) + "\n";
  if (format == "csv") {
    auto it = report.tables.find(table);
    if (it == report.tables.end())
      throw InvalidConfiguration("report has no \"" + table + "\" table");
    return render_csv(it->second);
  }
  if (format == "svg") {
    auto it = report.charts.find(table);
    if (it == report.charts.end() || it->second.empty())
      throw InvalidConfiguration("report has no \"" + table + "\" chart");
    return render_svg(it->second, report.chart_labels.at(table));
  }
  throw InvalidConfiguration("unknown output format \"" + format + "\"");
}

void write_outputs(const ExperimentReport& report, const ExperimentConfig& config, const std::filesystem::path& out_dir)
{
  if (config.outputs.empty())
    return;
  std::filesystem::create_directories(out_dir);
  for (const auto& o : config.outputs) {
    const std::string table = o.table.empty() ? config.analyses.front() : o.table;
    const std::string content = render_table(report, table, o.format);
    const std::filesystem::path path = out_dir / o.path;
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw Error("cannot write " + path.string());
    out << content;
  }
}

} // namespace mtm
