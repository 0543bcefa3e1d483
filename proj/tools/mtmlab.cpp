#include "mtm/experiment.hpp"
#include "mtm/verify.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct CommonArgs
{
  std::string target;
  std::string proposal;
  std::string sampler = "mtm-is";
  std::size_t k_min = 1;
  std::size_t k_max = 1;
  std::uint64_t samples = 50000;
  std::string partition;
  std::string balancing = "draw";
  std::size_t steps = 0;
  std::optional<std::size_t> start;
};

struct GlobalArgs
{
  std::optional<std::uint64_t> seed;
  std::string mode = "auto";
  std::string out_dir;
  std::string format = "csv";
};

nlohmann::json read_json_arg(const std::string& text)
{
  std::string body = text;
  if (!text.empty() && text.front() == '@') {
    std::ifstream in(text.substr(1));
    if (!in)
      throw mtm::InvalidConfiguration("cannot read " + text.substr(1));
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw mtm::InvalidConfiguration("invalid JSON \"" + text + "\": " + e.what());
  }
}

void add_common(CLI::App* cmd, CommonArgs& a)
{
  cmd->add_option("--target", a.target, "target spec as JSON or @file")->required();
  cmd->add_option("--proposal", a.proposal, "proposal spec; a JSON list gives one proposal per trial");
  cmd->add_option("--sampler", a.sampler, "imh, mtm-is, mtm-general, gmtm, srswor, srswor2, stratified");
  cmd->add_option("--k-min", a.k_min);
  cmd->add_option("--k-max,-k", a.k_max);
  cmd->add_option("--samples", a.samples, "Monte Carlo sample size");
  cmd->add_option("--partition", a.partition, "\"pairing\" or a JSON list of blocks");
  cmd->add_option("--balancing", a.balancing, "draw or skip");
}

mtm::ExperimentConfig make_config(const std::string& analysis, const CommonArgs& a, const GlobalArgs& g)
{
  nlohmann::json j;
  j["name"] = analysis;
  j["target"] = read_json_arg(a.target);
  if (!a.proposal.empty()) {
    nlohmann::json p = read_json_arg(a.proposal);
    if (p.is_array())
      j["proposals"] = std::move(p);
    else
      j["proposal"] = std::move(p);
  }
  j["sampler"] = a.sampler;
  j["k_range"] = {a.k_min, std::max(a.k_min, a.k_max)};
  j["mc_samples"] = a.samples;
  if (g.seed)
    j["seed"] = *g.seed;
  j["mode"] = g.mode;
  j["analyses"] = {analysis};
  if (!a.partition.empty())
    j["partition"] = a.partition == "pairing" ? nlohmann::json("pairing") : read_json_arg(a.partition);
  j["balancing"] = a.balancing;
  if (a.steps > 0)
    j[analysis == "chain" ? "chain_steps" : "decay_steps"] = a.steps;
  if (a.start)
    j["start_state"] = *a.start;
  return mtm::ExperimentConfig::from_json(j);
}

void emit(const std::string& content, const GlobalArgs& g, const std::string& stem)
{
  if (g.out_dir.empty()) {
    std::cout << content;
    return;
  }
  std::filesystem::create_directories(g.out_dir);
  const auto path = std::filesystem::path(g.out_dir) / (stem + "." + g.format);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw mtm::Error("cannot write " + path.string());
  out << content;
}

int report_verdicts(const mtm::ExperimentReport& report)
{
  for (const auto& v : report.verdicts)
    if (!v.ok)
      std::cerr << "FAIL " << v.name << ": " << v.detail << '\n';
  return report.ok() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"mtmlab: multiple-try Metropolis rates, spectra and decay"};
  app.require_subcommand(1);
  GlobalArgs g;
  std::uint64_t seed_value = 0;

  CommonArgs rates_args, spectrum_args, decay_args, chain_args;
  auto* rates = app.add_subcommand("rates", "MTM-IS(k) and IMH^k convergence rates");
  add_common(rates, rates_args);
  auto* spec = app.add_subcommand("spectrum", "eigenvalues of the enumerated kernel");
  add_common(spec, spectrum_args);
  auto* decay = app.add_subcommand("decay", "TV and chi-square distance to the target");
  add_common(decay, decay_args);
  decay->add_option("--steps", decay_args.steps, "largest n");
  decay->add_option("--start", decay_args.start, "start state (default: argmax weight)");
  auto* chain = app.add_subcommand("chain", "simulate a chain and write its trace");
  add_common(chain, chain_args);
  chain->add_option("--steps", chain_args.steps, "number of steps");
  chain->add_option("--start", chain_args.start, "start state (default: argmax weight)");

  std::string config_path;
  auto* experiment = app.add_subcommand("experiment", "run a JSON experiment config");
  experiment->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  auto* verify = app.add_subcommand("verify", "run the bundled inequality and identity checks");

  for (auto* sub : {rates, spec, decay, chain, experiment, verify}) {
    sub->add_option("--seed", seed_value, "RNG seed");
    sub->add_option("--mode", g.mode, "enum, mc or auto")->check(CLI::IsMember({"enum", "mc", "auto"}));
    sub->add_option("--out-dir", g.out_dir, "write outputs here instead of stdout");
    sub->add_option("--format", g.format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
  }

  CLI11_PARSE(app, argc, argv);
  bool seeded = false;
  for (auto* sub : app.get_subcommands())
    seeded = seeded || sub->get_option("--seed")->count() > 0;
  if (seeded)
    g.seed = seed_value;

  try {
    if (verify->parsed()) {
      const mtm::VerifyReport r = mtm::run_verify(g.seed.value_or(1));
      emit(r.to_json().dump(2) + "\n", GlobalArgs{g.seed, g.mode, g.out_dir, "json"}, "verify");
      for (const auto& c : r.checks)
        std::cerr << (c.ok ? "ok   " : "FAIL ") << c.name << '\n';
      return r.ok() ? 0 : 2;
    }
    if (experiment->parsed()) {
      mtm::ExperimentConfig cfg = mtm::ExperimentConfig::from_json(read_json_arg("@" + config_path));
      if (g.seed)
        cfg.seed = g.seed;
      const mtm::ExperimentReport report = mtm::run_experiment(cfg);
      if (cfg.outputs.empty() || g.out_dir.empty()) {
        const std::string table = cfg.analyses.front();
        emit(mtm::render_table(report, table, g.format), g, cfg.name);
      }
      mtm::write_outputs(report, cfg, g.out_dir.empty() ? "." : g.out_dir);
      return report_verdicts(report);
    }
    const std::pair<CLI::App*, std::pair<const char*, CommonArgs*>> subs[] = {
      {rates, {"rates", &rates_args}},
      {spec, {"spectrum", &spectrum_args}},
      {decay, {"decay", &decay_args}},
      {chain, {"chain", &chain_args}}};
    for (const auto& [cmd, what] : subs) {
      if (!cmd->parsed())
        continue;
      const mtm::ExperimentConfig cfg = make_config(what.first, *what.second, g);
      const mtm::ExperimentReport report = mtm::run_experiment(cfg);
      emit(mtm::render_table(report, what.first, g.format), g, what.first);
      return report_verdicts(report);
    }
  } catch (const mtm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
