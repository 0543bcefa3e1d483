#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "mtm/experiment.hpp"
#include "mtm/svg.hpp"
#include "mtm/verify.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mtm;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_config()
{
  return json::parse(R"({
    "name": "small",
    "target": {"family": "example1", "m": 5},
    "sampler": "mtm-is",
    "k_range": [1, 3],
    "mode": "enum",
    "analyses": ["rates", "recursive", "spectrum", "decay"]
  })");
}

} // namespace

TEST_CASE("config validation")
{
  CHECK_NOTHROW(ExperimentConfig::from_json(small_config()));
  json bad = small_config();
  bad["sampler"] = "hmc";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), InvalidConfiguration);
  bad = small_config();
  bad["k_range"] = {3, 2};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), InvalidConfiguration);
  bad = small_config();
  bad["mode"] = "mc";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), InvalidConfiguration);
  bad = small_config();
  bad.erase("target");
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), InvalidConfiguration);
  bad = small_config();
  bad["analyses"] = {"rates", "plots"};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), InvalidConfiguration);
  bad = small_config();
  bad["k_range"] = "many";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), InvalidConfiguration);
  bad = small_config();
  bad["target"] = {{"family", "zipf"}};
  CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(bad)), InvalidConfiguration);
}

TEST_CASE("enumeration on a continuous target fails fast")
{
  json c = small_config();
  c["target"] = {{"family", "normal-vs-scaled-t"}, {"c", 2}};
  c["analyses"] = {"rates"};
  CHECK_THROWS_WITH_AS(run_experiment(ExperimentConfig::from_json(c)),
                       doctest::Contains("enumeration mode needs a finite pair"), InvalidConfiguration);
}

TEST_CASE("small enumerated experiment")
{
  const ExperimentReport r = run_experiment(ExperimentConfig::from_json(small_config()));
  CHECK(r.ok());
  CHECK(r.results["schema_version"] == kReportSchemaVersion);
  const auto& rates = r.tables.at("rates");
  CHECK(rates.columns == std::vector<std::string>{"k", "mtm_rate", "mtm_se", "imh_k_rate", "gap"});
  REQUIRE(rates.rows.size() == 3);
  CHECK(std::stod(rates.rows[1][1]) == doctest::Approx(oracle::example1_m5::rate_k2).epsilon(1e-14));
  CHECK(r.results["cases"][0]["rates"][1]["method"] == "exact-enum");
  CHECK(r.tables.at("recursive").rows.size() == 1);
  CHECK(r.tables.at("spectrum").rows.size() == 15);
  CHECK(r.tables.count("decay") == 1);
  CHECK(r.charts.at("rates").size() == 2);
  CHECK(render_csv(rates).rfind("k,mtm_rate,mtm_se,imh_k_rate,gap\n1,", 0) == 0);
}

TEST_CASE("replaying an echoed config reproduces every cell")
{
  json c = json::parse(R"({
    "name": "mc",
    "cases": [{"label": "a", "target": {"family": "binomial", "m": 60, "theta": 0.5}},
              {"label": "b", "target": {"family": "binomial", "m": 60, "theta": 0.05}}],
    "k_range": [1, 6], "mc_samples": 5000, "seed": 17, "mode": "mc",
    "analyses": ["rates", "chain"], "chain_steps": 500, "gap_ratio_check": true
  })");
  const ExperimentReport first = run_experiment(ExperimentConfig::from_json(c));
  const json echoed = json::parse(first.results["config"].dump());
  const ExperimentReport second = run_experiment(ExperimentConfig::from_json(echoed));
  CHECK(first.to_json(false).dump() == second.to_json(false).dump());
  CHECK(render_csv(first.tables.at("rates")) == render_csv(second.tables.at("rates")));
  CHECK(first.tables.at("rates").columns.front() == "case");
  for (const auto& row : first.results["cases"][0]["rates"]) {
    if (row["k"] == 1)
      continue;
    CHECK(row["method"] == "monte-carlo");
    CHECK(row["samples"] == 5000);
    CHECK(row["mtm_se"].get<double>() > 0.0);
  }
  CHECK(first.ok());
}

TEST_CASE("samplers without rate theory are refused for rates but run elsewhere")
{
  json c = small_config();
  c["sampler"] = "srswor";
  c["k_range"] = {2, 2};
  c["analyses"] = {"rates"};
  CHECK_THROWS_AS(run_experiment(ExperimentConfig::from_json(c)), InvalidConfiguration);
  c["analyses"] = {"spectrum", "decay"};
  const ExperimentReport r = run_experiment(ExperimentConfig::from_json(c));
  CHECK(r.ok());
  CHECK(r.results["cases"][0]["spectra"][0]["eigenvalues"].size() == 5);
}

TEST_CASE("skipping balancing trials through a config")
{
  json c = small_config();
  c["sampler"] = "gmtm";
  c["balancing"] = "skip";
  c["analyses"] = {"spectrum"};
  c["k_range"] = {2, 2};
  CHECK(run_experiment(ExperimentConfig::from_json(c)).ok());
}

TEST_CASE("non-identical proposals through a config")
{
  json c = json::parse(R"({
    "target": {"probs": [0.5, 0.3, 0.2]},
    "proposals": [{"probs": [0.4, 0.3, 0.3]}, {"family": "uniform"}],
    "mode": "enum", "analyses": ["rates"]
  })");
  const ExperimentReport r = run_experiment(ExperimentConfig::from_json(c));
  CHECK(r.ok());
  CHECK(r.results["cases"][0]["nonidentical_rate"]["rate"].get<double>() ==
        doctest::Approx(oracle::nonidentical::rate).epsilon(1e-14));
}

TEST_CASE("outputs are written where the config asks")
{
  json c = small_config();
  c["outputs"] = json::parse(R"([{"format": "csv", "path": "r.csv", "table": "rates"},
                                  {"format": "json", "path": "r.json"},
                                  {"format": "svg", "path": "r.svg", "table": "rates"}])");
  const ExperimentConfig cfg = ExperimentConfig::from_json(c);
  const ExperimentReport r = run_experiment(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "mtmlab_cli_test";
  std::filesystem::remove_all(dir);
  write_outputs(r, cfg, dir);
  CHECK(slurp(dir / "r.csv") == render_csv(r.tables.at("rates")));
  CHECK(json::parse(slurp(dir / "r.json"))["ok"] == true);
  const std::string svg = slurp(dir / "r.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("viewBox=\"0 0 800 600\"") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("svg charts")
{
  const ChartLabels labels{"t", "x", "y"};
  const std::vector<Series> flat = {{"flat", {{0.0, 1.0}, {1.0, 1.0}, {2.0, 1.0}}}};
  const std::string a = render_svg(flat, labels);
  CHECK(a == render_svg(flat, labels));
  CHECK(a.find("<polyline") != std::string::npos);
  const auto path = std::filesystem::temp_directory_path() / "mtmlab_empty.svg";
  std::filesystem::remove(path);
  CHECK_THROWS_AS(emit_svg({{"none", {}}}, labels, path), InvalidConfiguration);
  CHECK_FALSE(std::filesystem::exists(path));
  CHECK_THROWS_AS(emit_svg(flat, labels, "/nonexistent-dir/x.svg"), Error);
}

TEST_CASE("numbers round-trip")
{
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(oracle::example1_m5::rate_k2)) == oracle::example1_m5::rate_k2);
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("verify bundle passes and is deterministic")
{
  const VerifyReport a = run_verify(3);
  const VerifyReport b = run_verify(3);
  for (const auto& c : a.checks)
    CHECK_MESSAGE(c.ok, c.name);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK_FALSE(a.to_json().contains("timings"));
}
