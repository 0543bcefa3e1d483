#pragma once

#include "mtm/rates.hpp"
#include "mtm/svg.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mtm {

inline constexpr int kReportSchemaVersion = 1;

struct OutputSpec
{
  std::string format; ///< csv, json or svg
  std::string path;   ///< relative to the output directory
  std::string table;  ///< which table csv/svg outputs render; defaults to the first analysis
};

/// One target/proposal setting. `proposals` (a list) gives per-trial proposals.
struct ExperimentCase
{
  std::string label;
  nlohmann::json target;
  nlohmann::json proposal;
  nlohmann::json proposals;
};

struct ExperimentConfig
{
  std::string name = "experiment";
  std::vector<ExperimentCase> cases;
  std::string sampler = "mtm-is";
  std::size_t k_min = 1;
  std::size_t k_max = 1;
  std::uint64_t mc_samples = 50'000;
  std::optional<std::uint64_t> seed;
  std::string mode = "auto"; ///< enum, mc or auto
  std::vector<std::string> analyses = {"rates"};
  std::vector<OutputSpec> outputs;
  std::size_t decay_steps = 20;
  std::uint64_t chain_steps = 10'000;
  std::optional<std::size_t> start_state;
  /// Requires max_k gap of every later case to be below that of the first case.
  bool gap_ratio_check = false;
  /// "pairing", "singletons" or a list of blocks; stratified sampler only.
  nlohmann::json partition;
  std::string balancing = "draw"; ///< gmtm only: draw or skip

  /// Parses and validates. A single "target"/"proposal" pair becomes one case.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
  /// Throws InvalidConfiguration on unknown tags, empty k ranges or a missing seed.
  void validate() const;
};

HkMode parse_mode(const std::string& mode, std::uint64_t samples, std::optional<std::uint64_t> seed);

struct Verdict
{
  std::string name;
  bool ok = false;
  std::string detail;
};

struct Table
{
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentReport
{
  nlohmann::ordered_json results;
  nlohmann::ordered_json timings;
  std::vector<Verdict> verdicts;
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Series>> charts;
  std::map<std::string, ChartLabels> chart_labels;

  bool ok() const;
  /// Self-describing report; timings are left out when with_timings is false.
  nlohmann::ordered_json to_json(bool with_timings = true) const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Shortest round-trip decimal form.
std::string format_number(double v);

std::string render_csv(const Table& table);
/// One table in csv, json or svg form.
std::string render_table(const ExperimentReport& report, const std::string& table, const std::string& format);

/// Writes every requested output under out_dir (created when missing).
void write_outputs(const ExperimentReport& report, const ExperimentConfig& config, const std::filesystem::path& out_dir);

} // namespace mtm
