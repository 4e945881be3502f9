#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infoseek/agents.hpp"
#include "infoseek/metrics.hpp"
#include "infoseek/taxonomy.hpp"

namespace infoseek {

inline constexpr std::size_t kDefaultMaxTurns = 30;

struct GameConfig {
  NodeId target;
  std::size_t max_turns = kDefaultMaxTurns;
  Observability observability = Observability::PO;
  std::uint64_t rng_seed = 0;
  bool audit = false;
};

// Pruner output the engine refused to apply.
enum class FaultKind { UnknownId, NonCityId, AlreadyPruned, TargetPruned, WouldEmptySpace, DuplicateId };

std::string_view fault_kind_name(FaultKind kind) noexcept;

struct ConsistencyFault {
  FaultKind kind = FaultKind::UnknownId;
  std::string id;

  // "<kind>:<id>", e.g. "target_pruned:city:7".
  std::string tag() const;
  static ConsistencyFault parse(std::string_view tag);

  friend bool operator==(const ConsistencyFault&, const ConsistencyFault&) = default;
};

struct TurnRecord {
  std::size_t turn_index = 1;
  std::string question_text;
  std::optional<Predicate> predicate;
  std::string oracle_rationale;
  std::string oracle_answer;
  bool game_over_flag = false;
  std::string pruner_rationale;
  std::vector<NodeId> pruned_ids;  // ids actually applied, after fault filtering
  std::size_t n_before = 0;
  std::size_t n_after = 0;
  TurnMetrics metrics;
  std::optional<std::string> seeker_trace;
  std::vector<ConsistencyFault> consistency_faults;
  AuditLog audit;
};

enum class Outcome { Win, TurnLimit, AgentFailure };

std::string_view outcome_name(Outcome o) noexcept;
std::optional<Outcome> parse_outcome(std::string_view text) noexcept;

struct GameTranscript {
  GameConfig config;
  std::string dataset_fingerprint;
  std::size_t n_initial = 0;
  std::vector<TurnRecord> turns;
  Outcome outcome = Outcome::TurnLimit;
  std::optional<std::string> failure;  // AgentFailure message
  GameMetrics game_metrics;
};

// Metrics charged to a game: turns = played turns for a win, max_turns otherwise.
GameMetrics game_metrics_for(const std::vector<TurnRecord>& turns, Outcome outcome, std::size_t max_turns);

// Called after every completed turn (used by the interactive mode).
using TurnObserver = std::function<void(const TurnRecord&, const HypothesisGraph&)>;

// Runs one game. The graph is copied and reset to all-active; the caller's copy
// is untouched. Agent errors end the game with Outcome::AgentFailure. Throws
// InvalidTarget when the target is not a city of the graph.
GameTranscript play_game(const Seeker& seeker, const Oracle& oracle, const Pruner& pruner,
                         const HypothesisGraph& graph, const GameConfig& cfg, const TurnObserver& observer = {});

// Re-applies the recorded prunes on a fresh copy of `graph` and recomputes every
// metric. Throws FingerprintMismatch, ReplayDivergence (beyond 1e-9).
GameMetrics replay(const GameTranscript& transcript, const HypothesisGraph& graph);

inline constexpr double kReplayTolerance = 1e-9;

// JSON Lines: a header record, one record per turn, a footer with GameMetrics.
void write_transcript(std::ostream& out, const GameTranscript& t);
std::string transcript_to_string(const GameTranscript& t);

// Throws MalformedTranscript.
GameTranscript read_transcript(std::istream& in);
GameTranscript transcript_from_string(std::string_view text);
GameTranscript load_transcript(const std::string& path);

}  // namespace infoseek
