#include "infoseek/agents.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "infoseek/error.hpp"

namespace infoseek {

std::string_view observability_name(Observability o) noexcept { return o == Observability::FO ? "FO" : "PO"; }

std::optional<Observability> parse_observability(std::string_view text) noexcept {
  if (text == "FO" || text == "fo") return Observability::FO;
  if (text == "PO" || text == "po") return Observability::PO;
  return std::nullopt;
}

std::optional<bool> parse_yes_no(std::string_view answer) {
  while (!answer.empty() && (std::isspace(static_cast<unsigned char>(answer.front())) || answer.front() == '"')) {
    answer.remove_prefix(1);
  }
  auto starts_word = [&](std::string_view word) {
    if (answer.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(answer[i])) != word[i]) return false;
    }
    return answer.size() == word.size() || !std::isalpha(static_cast<unsigned char>(answer[word.size()]));
  };
  if (starts_word("yes")) return true;
  if (starts_word("no")) return false;
  return std::nullopt;
}

std::vector<Predicate> candidate_predicates(const HypothesisGraph& graph) {
  std::vector<Predicate> out;
  for (Level level : kAttributeLevels) {
    std::map<std::string, std::string> values;  // normalized -> display
    for (const auto& city : graph.active_cities()) {
      const auto& name = graph.node(graph.ancestor_at(city, level)).name;
      values.try_emplace(normalize_name(name), name);
    }
    for (const auto& [key, name] : values) out.push_back(Predicate::attribute_in(level, {name}));
  }

  if (graph.active_count() >= 2) {
    std::vector<std::string> ids;
    std::map<std::string, std::string> name_of;
    for (const auto& city : graph.active_cities()) {
      ids.push_back(city.str());
      name_of[ids.back()] = graph.node(city).name;
    }
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> half;
    for (std::size_t i = 0; i < ids.size() / 2; ++i) half.push_back(name_of[ids[i]]);
    out.push_back(Predicate::city_in(std::move(half)));
  }
  return out;
}

Predicate greedy_choose(const HypothesisGraph& graph) {
  const auto n = graph.active_count();
  if (n == 0) throw Error(Errc::EmptySpace, "no active cities to choose from");
  if (n == 1) return Predicate::city_guess(graph.node(*graph.active_cities().begin()).name);

  std::optional<Predicate> best;
  std::tuple<std::size_t, Level, std::string> best_key;
  for (auto& cand : candidate_predicates(graph)) {
    const auto yes = leaves_matching(graph, cand).size();
    const auto no = n - yes;
    std::tuple<std::size_t, Level, std::string> key{yes > no ? yes - no : no - yes, cand.level(), cand.canonical()};
    if (!best || key < best_key) {
      best_key = std::move(key);
      best = std::move(cand);
    }
  }
  return *best;
}

HypothesisGraph replay_history(const HypothesisGraph& fresh, std::span<const Exchange> history) {
  HypothesisGraph g = fresh;
  for (const auto& ex : history) {
    if (!ex.predicate) continue;
    const auto ans = parse_yes_no(ex.answer);
    if (!ans) continue;
    auto ids = prune_set(*ex.predicate, *ans, g);
    if (ids.size() < g.active_count()) g.prune(ids);
  }
  return g;
}

SeekerOutput GreedyHalvingSeeker::ask(const SeekerContext& ctx, Rng&, AuditLog*) const {
  return SeekerOutput::from(greedy_choose(replay_history(*fresh_, ctx.history)));
}

SeekerOutput RandomSeeker::ask(const SeekerContext& ctx, Rng& rng, AuditLog*) const {
  const auto g = replay_history(*fresh_, ctx.history);
  if (g.active_count() == 1) return SeekerOutput::from(greedy_choose(g));
  auto cands = candidate_predicates(g);
  std::uniform_int_distribution<std::size_t> pick(0, cands.size() - 1);
  return SeekerOutput::from(std::move(cands[pick(rng)]));
}

ScriptedSeeker::ScriptedSeeker(std::vector<SeekerOutput> script) : script_(std::move(script)) {
  if (script_.empty()) throw Error(Errc::AgentFailure, "scripted seeker needs at least one question");
}

SeekerOutput ScriptedSeeker::ask(const SeekerContext& ctx, Rng&, AuditLog*) const {
  const auto i = std::min(ctx.turn_index, script_.size());
  return script_[i - 1];
}

OracleOutput RuleOracle::answer(const SeekerOutput& question, const NodeId& target, std::span<const Exchange>,
                                AuditLog*) const {
  if (target.level != Level::City || !fresh_->contains(target)) {
    throw Error(Errc::InvalidTarget, target.str() + " is not a known city");
  }
  if (!question.predicate) {
    return {"question has no structured form", "I can only answer yes/no questions about the target's location.",
            false};
  }
  const bool yes = evaluate(*question.predicate, *fresh_, target);
  OracleOutput out;
  out.rationale = question.predicate->canonical() + (yes ? " holds" : " does not hold") + " for the target";
  out.answer = yes ? "Yes" : "No";
  out.game_over = yes && question.predicate->is_guess();
  return out;
}

PrunerOutput RulePruner::prune_decision(const SeekerOutput& question, std::string_view answer,
                                        const HypothesisGraph& graph, std::size_t, AuditLog*) const {
  const auto yes = parse_yes_no(answer);
  if (!question.predicate || !yes) return {"ambiguous question or answer; nothing pruned", {}};
  const auto ids = prune_set(*question.predicate, *yes, graph);
  PrunerOutput out;
  out.rationale = std::string(*yes ? "Yes" : "No") + " to " + question.predicate->canonical() + ": prune " +
                  std::to_string(ids.size()) + " cities";
  out.pruned_ids.assign(ids.begin(), ids.end());
  return out;
}

}  // namespace infoseek
