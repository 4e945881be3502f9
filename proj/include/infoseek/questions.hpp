#pragma once

#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "infoseek/taxonomy.hpp"

namespace infoseek {

// "Is the target's <level> one of values?" for a non-city level.
struct AttributeIn {
  Level level = Level::Region;
  std::vector<std::string> values;
  friend bool operator==(const AttributeIn&, const AttributeIn&) = default;
};

// "Is the target one of these cities?" Never ends the game.
struct CityIn {
  std::vector<std::string> values;
  friend bool operator==(const CityIn&, const CityIn&) = default;
};

// A direct guess; the only form that can end the game.
struct CityGuess {
  std::string name;
  friend bool operator==(const CityGuess&, const CityGuess&) = default;
};

// Machine-evaluable yes/no question. Value lists are trimmed, deduplicated
// case-insensitively and ordered by their normalized key at construction, so
// equal canonical forms imply equal behaviour.
class Predicate {
 public:
  using Variant = std::variant<AttributeIn, CityIn, CityGuess>;

  // Throws Error(InvalidPredicate) on empty value sets or a city-level AttributeIn.
  static Predicate attribute_in(Level level, std::vector<std::string> values);
  static Predicate city_in(std::vector<std::string> values);
  static Predicate city_guess(std::string name);

  const Variant& variant() const noexcept { return v_; }
  bool is_guess() const noexcept { return std::holds_alternative<CityGuess>(v_); }

  // Level the predicate discriminates at (City for CityIn/CityGuess).
  Level level() const noexcept;

  // "attr:<level>:<v1|v2>", "cityin:<v1|v2>", "guess:<name>".
  std::string canonical() const;
  static Predicate parse_canonical(std::string_view text);

  // Natural-language yes/no question.
  std::string render() const;

  friend bool operator==(const Predicate&, const Predicate&) = default;

 private:
  explicit Predicate(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// Throws UnknownId for a city not in the graph.
bool evaluate(const Predicate& pred, const HypothesisGraph& graph, const NodeId& city);

// Active cities for which the predicate holds.
std::set<NodeId> leaves_matching(const HypothesisGraph& graph, const Predicate& pred);

// Active cities contradicted by `answer`: non-matching ones on Yes, matching ones on No.
std::set<NodeId> prune_set(const Predicate& pred, bool answer, const HypothesisGraph& graph);

// IG the question would realize against `target` without touching the graph.
// Throws TargetNotActive.
double counterfactual_ig(const Predicate& pred, const HypothesisGraph& graph, const NodeId& target);

}  // namespace infoseek
