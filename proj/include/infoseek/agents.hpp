#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infoseek/questions.hpp"
#include "infoseek/taxonomy.hpp"

namespace infoseek {

enum class Observability { FO, PO };

std::string_view observability_name(Observability o) noexcept;
std::optional<Observability> parse_observability(std::string_view text) noexcept;

using Rng = std::mt19937_64;

// One completed question/answer pair as the seeker sees it. `predicate` is the
// seeker's own structured question when it produced one.
struct Exchange {
  std::string question;
  std::string answer;
  std::optional<Predicate> predicate;
};

struct SeekerContext {
  std::vector<Exchange> history;
  std::optional<std::string> graph_text;  // present iff FO
  std::size_t turn_index = 1;             // history.size() + 1
};

struct SeekerOutput {
  std::string question_text;
  std::optional<Predicate> predicate;
  std::optional<std::string> reasoning_trace;

  static SeekerOutput from(Predicate p) {
    auto text = p.render();
    return {std::move(text), std::move(p), std::nullopt};
  }
};

// Mirrors the oracle wire object.
struct OracleOutput {
  std::string rationale;
  std::string answer;
  bool game_over = false;
};

// Mirrors the pruner wire object.
struct PrunerOutput {
  std::string rationale;
  std::vector<NodeId> pruned_ids;
};

// Raw request/response pair captured when a game runs in audit mode.
struct AuditEntry {
  std::string agent;
  std::string request;
  std::string response;
};
using AuditLog = std::vector<AuditEntry>;

// Agents are shared between concurrently running games; implementations keep
// no per-game mutable state. Randomness comes from the game's Rng.
class Seeker {
 public:
  virtual ~Seeker() = default;
  virtual SeekerOutput ask(const SeekerContext& ctx, Rng& rng, AuditLog* audit) const = 0;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleOutput answer(const SeekerOutput& question, const NodeId& target,
                              std::span<const Exchange> history, AuditLog* audit) const = 0;
};

class Pruner {
 public:
  virtual ~Pruner() = default;
  virtual PrunerOutput prune_decision(const SeekerOutput& question, std::string_view answer,
                                      const HypothesisGraph& graph, std::size_t turn_index,
                                      AuditLog* audit) const = 0;
};

// "Yes..." -> true, "No..." -> false, anything else -> nullopt.
std::optional<bool> parse_yes_no(std::string_view answer);

// Every predicate a rule seeker may choose from: one AttributeIn per
// (non-city level, value present among active cities), plus CityIn over the
// first half of the active cities in lexicographic id order (when >= 2 active).
std::vector<Predicate> candidate_predicates(const HypothesisGraph& graph);

// The candidate whose yes/no split over active cities is most balanced; ties go
// to the coarser level, then to the smaller canonical form. CityGuess when one
// city is left. Throws EmptySpace.
Predicate greedy_choose(const HypothesisGraph& graph);

// Rebuilds the seeker-side view of the hypothesis space from its own history
// of structured questions. Exchanges without a predicate or a yes/no answer are skipped.
HypothesisGraph replay_history(const HypothesisGraph& fresh, std::span<const Exchange> history);

class GreedyHalvingSeeker final : public Seeker {
 public:
  explicit GreedyHalvingSeeker(std::shared_ptr<const HypothesisGraph> fresh) : fresh_(std::move(fresh)) {}
  SeekerOutput ask(const SeekerContext& ctx, Rng& rng, AuditLog* audit) const override;

 private:
  std::shared_ptr<const HypothesisGraph> fresh_;
};

// Uniform over candidate_predicates(); a lower-bound baseline.
class RandomSeeker final : public Seeker {
 public:
  explicit RandomSeeker(std::shared_ptr<const HypothesisGraph> fresh) : fresh_(std::move(fresh)) {}
  SeekerOutput ask(const SeekerContext& ctx, Rng& rng, AuditLog* audit) const override;

 private:
  std::shared_ptr<const HypothesisGraph> fresh_;
};

// Plays a fixed script; turn t gets entry t-1, turns past the end repeat the last entry.
class ScriptedSeeker final : public Seeker {
 public:
  explicit ScriptedSeeker(std::vector<SeekerOutput> script);
  SeekerOutput ask(const SeekerContext& ctx, Rng& rng, AuditLog* audit) const override;

 private:
  std::vector<SeekerOutput> script_;
};

// Truthful answers from the structured predicate; free text gets a non-committal reply.
class RuleOracle final : public Oracle {
 public:
  explicit RuleOracle(std::shared_ptr<const HypothesisGraph> fresh) : fresh_(std::move(fresh)) {}
  OracleOutput answer(const SeekerOutput& question, const NodeId& target, std::span<const Exchange> history,
                      AuditLog* audit) const override;

 private:
  std::shared_ptr<const HypothesisGraph> fresh_;
};

// prune_set() of the structured predicate; nothing for free text or non yes/no answers.
class RulePruner final : public Pruner {
 public:
  PrunerOutput prune_decision(const SeekerOutput& question, std::string_view answer, const HypothesisGraph& graph,
                              std::size_t turn_index, AuditLog* audit) const override;
};

}  // namespace infoseek
