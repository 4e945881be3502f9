#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infoseek/engine.hpp"
#include "infoseek/llm.hpp"
#include "infoseek/metrics.hpp"
#include "infoseek/questions.hpp"
#include "infoseek/taxonomy.hpp"

namespace infoseek {

struct CandidateQuestion {
  std::string text;
  std::optional<Predicate> predicate;        // absent when unparseable
  std::optional<double> counterfactual_ig;  // present iff predicate is
  bool chosen = false;
};

struct TurnDecision {
  NodeId target;
  std::size_t turn_index = 1;
  std::vector<CandidateQuestion> candidates;
  double optimal_ig = 0.0;
  double chosen_ig = 0.0;
  bool chosen_ig_realized = false;  // executed question unparseable; realized IG used
  bool is_optimal = false;
  std::size_t unparseable_count = 0;
};

inline constexpr double kOptimalTolerance = 1e-9;

// Statistics are mean ± sample std across games of per-game means.
struct DecisionQualityReport {
  MeanSe avg_optimal_rate;
  MeanSe avg_chosen_ig;
  MeanSe avg_optimal_ig;
  MeanSe avg_questions_per_turn;
  std::size_t games_analyzed = 0;
  std::size_t turns_analyzed = 0;
  std::size_t turns_skipped = 0;  // no trace, or nothing parseable
  std::size_t unparseable_total = 0;
  std::vector<TurnDecision> turns;

  bool empty() const noexcept { return turns_analyzed == 0; }
};

class CandidateExtractor {
 public:
  virtual ~CandidateExtractor() = default;
  virtual std::vector<std::string> extract(std::string_view trace) const = 0;
};

// Sentences ending in '?' that open with a yes/no auxiliary (Is, Are, Does,
// Do, Can, Could, Would, Was, Has, Will, Should). Quotes and colons start a
// new sentence, so 'I could ask "Is it in Asia?"' yields "Is it in Asia?".
class HeuristicExtractor final : public CandidateExtractor {
 public:
  std::vector<std::string> extract(std::string_view trace) const override;
};

// Sends the trace with candidate_extraction_prompt() and expects a JSON array
// of strings. Throws ExtractorFailure.
class LlmExtractor final : public CandidateExtractor {
 public:
  explicit LlmExtractor(std::shared_ptr<const ChatClient> client) : client_(std::move(client)) {}
  std::vector<std::string> extract(std::string_view trace) const override;

 private:
  std::shared_ptr<const ChatClient> client_;
};

using QuestionParser = std::function<std::optional<Predicate>(std::string_view, const HypothesisGraph&)>;

// The default parser: parse_question().
QuestionParser default_question_parser();

// Ordered, case-insensitively deduplicated candidates with the executed
// question appended when missing.
std::vector<std::string> extract_candidates(std::string_view trace, const CandidateExtractor& extractor,
                                            std::string_view executed);

// Scores every candidate against `before` (the state at the start of the turn).
// The chosen candidate is the one equal to `executed`; its predicate is
// `executed_predicate` when given, else parsed. An unparseable executed
// question is charged `realized_ig`. Returns nullopt when nothing could be scored.
std::optional<TurnDecision> score_turn(std::span<const std::string> candidates, const HypothesisGraph& before,
                                       const NodeId& target, const QuestionParser& parser,
                                       std::string_view executed, const std::optional<Predicate>& executed_predicate,
                                       double realized_ig);

// Replays each transcript on `graph` to recover the state before every turn.
// Throws FingerprintMismatch, ReplayDivergence for transcripts that do not
// belong to `graph`.
DecisionQualityReport decision_quality(std::span<const GameTranscript> transcripts, const HypothesisGraph& graph,
                                       const CandidateExtractor& extractor,
                                       const QuestionParser& parser = default_question_parser());

// One-row table: "| Model | Avg Optimal Rate | Avg Chosen IG | Avg Optimal IG | Avg Questions/Turn |".
std::string render_decision_quality_table(std::string_view label, const DecisionQualityReport& report);

// One row per analyzed turn.
std::string decision_details_csv(const DecisionQualityReport& report);

}  // namespace infoseek
