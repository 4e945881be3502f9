#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "infoseek/engine.hpp"
#include "infoseek/llm.hpp"
#include "infoseek/metrics.hpp"

namespace infoseek {

inline constexpr int kConfigSchemaVersion = 1;

enum class AgentKind { Greedy, Random, Rule, Llm };

struct AgentSpec {
  AgentKind kind = AgentKind::Rule;
  std::optional<EndpointConfig> endpoint;  // required for Llm
};

enum class FailurePolicy {
  CountAsLoss,  // agent_failure games enter aggregates as losses at max_turns
  Exclude,      // agent_failure games are left out of aggregates
};

struct ExperimentConfig {
  std::string label = "unnamed";
  std::string dataset_path;
  std::optional<std::size_t> top_n;
  std::vector<std::string> targets;  // city ids or names; empty = every city
  std::size_t runs_per_target = 3;
  std::size_t max_turns = kDefaultMaxTurns;
  Observability observability = Observability::PO;
  AgentSpec seeker{AgentKind::Greedy, std::nullopt};
  AgentSpec oracle{AgentKind::Rule, std::nullopt};
  AgentSpec pruner{AgentKind::Rule, std::nullopt};
  bool reasoning_enabled = false;  // applied to the seeker endpoint
  std::uint64_t base_seed = 0;
  std::size_t parallelism = 1;
  std::size_t max_inflight_requests = 8;
  std::string output_dir;  // empty: keep everything in memory
  bool audit = false;
  FailurePolicy failure_policy = FailurePolicy::CountAsLoss;
  SeGrouping se_grouping = SeGrouping::PerGame;

  // Throws ConfigError.
  void validate() const;
};

// Throws ConfigError. Relative dataset/output paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::string& base_dir = "");
ExperimentConfig load_experiment_config(const std::string& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// Per-game seed from (base seed, target, run); independent of target order.
std::uint64_t derive_seed(std::uint64_t base_seed, const NodeId& target, std::size_t run);

struct GameSummary {
  NodeId target;
  std::size_t run = 1;
  std::uint64_t seed = 0;
  std::string transcript_file;  // relative to the output dir; empty when not persisted
  Outcome outcome = Outcome::TurnLimit;
  std::size_t turns = 0;
  double total_ig = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<GameSummary> per_game;
  std::vector<GameTranscript> transcripts;  // in memory only; not part of report.json
  AggregateMetrics aggregate;
  std::vector<TimelinePoint> timeline;
  std::map<std::string, std::size_t> fault_summary;
  std::size_t failure_count = 0;
};

// Transcript file name for a game: "<target-id>_run<k>.jsonl".
std::string transcript_file_name(const NodeId& target, std::size_t run);

// Runs |targets| x runs_per_target games on a bounded worker pool. Throws
// DatasetError / ConfigError up front; agent failures are recorded per game.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Aggregate, timeline and fault summary over finished games, honouring the
// config's failure policy and SE grouping.
void summarize(ExperimentReport& report);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);
ExperimentReport load_report(const std::string& path);

// Table with one row per report; cells are "mean ± SE" to two decimals.
std::string render_results_table(std::span<const ExperimentReport> reports);

// "turn_index,mean_ig,n_games" CSV; mean left empty where no game reached the turn.
std::string export_timeline(const ExperimentReport& report);

// "x.xx ± y.yy"
std::string format_mean_se(const MeanSe& m);

}  // namespace infoseek
