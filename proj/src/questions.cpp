#include "infoseek/questions.hpp"

#include <algorithm>
#include <cctype>

#include "infoseek/error.hpp"
#include "infoseek/metrics.hpp"

namespace infoseek {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string checked_name(std::string_view raw) {
  auto name = trim(raw);
  if (name.empty()) throw Error(Errc::InvalidPredicate, "empty name in predicate");
  if (name.find('|') != std::string::npos) {
    throw Error(Errc::InvalidPredicate, "name '" + name + "' contains '|'");
  }
  return name;
}

std::vector<std::string> canonical_values(std::vector<std::string> values) {
  std::vector<std::pair<std::string, std::string>> keyed;
  for (auto& v : values) {
    auto name = checked_name(v);
    auto key = normalize_name(name);
    const bool seen = std::any_of(keyed.begin(), keyed.end(), [&](const auto& p) { return p.first == key; });
    if (!seen) keyed.emplace_back(std::move(key), std::move(name));
  }
  if (keyed.empty()) throw Error(Errc::InvalidPredicate, "predicate needs at least one value");
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  out.reserve(keyed.size());
  for (auto& p : keyed) out.push_back(std::move(p.second));
  return out;
}

std::string join(const std::vector<std::string>& values, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += values[i];
  }
  return out;
}

// "A", "A or B", "A, B or C"
std::string english_list(const std::vector<std::string>& values) {
  if (values.size() == 1) return values.front();
  std::string out;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (i) out += ", ";
    out += values[i];
  }
  return out + " or " + values.back();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool name_in(const std::string& name, const std::vector<std::string>& values) {
  const auto key = normalize_name(name);
  return std::any_of(values.begin(), values.end(), [&](const auto& v) { return normalize_name(v) == key; });
}

}  // namespace

Predicate Predicate::attribute_in(Level level, std::vector<std::string> values) {
  if (level == Level::City) {
    throw Error(Errc::InvalidPredicate, "AttributeIn cannot target the city level; use CityIn");
  }
  return Predicate(AttributeIn{level, canonical_values(std::move(values))});
}

Predicate Predicate::city_in(std::vector<std::string> values) {
  return Predicate(CityIn{canonical_values(std::move(values))});
}

Predicate Predicate::city_guess(std::string name) { return Predicate(CityGuess{checked_name(name)}); }

Level Predicate::level() const noexcept {
  if (const auto* a = std::get_if<AttributeIn>(&v_)) return a->level;
  return Level::City;
}

std::string Predicate::canonical() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AttributeIn>) {
          return "attr:" + std::string(level_name(p.level)) + ":" + join(p.values, "|");
        } else if constexpr (std::is_same_v<T, CityIn>) {
          return "cityin:" + join(p.values, "|");
        } else {
          return "guess:" + p.name;
        }
      },
      v_);
}

Predicate Predicate::parse_canonical(std::string_view text) {
  auto bad = [&] { return Error(Errc::InvalidPredicate, "malformed predicate '" + std::string(text) + "'"); };
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw bad();
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (kind == "guess") return city_guess(std::string(rest));
  if (kind == "cityin") return city_in(split(rest, '|'));
  if (kind == "attr") {
    const auto c2 = rest.find(':');
    if (c2 == std::string_view::npos) throw bad();
    const auto level = parse_level(rest.substr(0, c2));
    if (!level) throw bad();
    return attribute_in(*level, split(rest.substr(c2 + 1), '|'));
  }
  throw bad();
}

std::string Predicate::render() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AttributeIn>) {
          return "Is the target city in " + english_list(p.values) + "?";
        } else if constexpr (std::is_same_v<T, CityIn>) {
          return "Is the target city one of " + english_list(p.values) + "?";
        } else {
          return "Is the target city " + p.name + "?";
        }
      },
      v_);
}

bool evaluate(const Predicate& pred, const HypothesisGraph& graph, const NodeId& city) {
  if (city.level != Level::City || !graph.contains(city)) {
    throw Error(Errc::UnknownId, "unknown city " + city.str());
  }
  return std::visit(
      [&](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AttributeIn>) {
          return name_in(graph.node(graph.ancestor_at(city, p.level)).name, p.values);
        } else if constexpr (std::is_same_v<T, CityIn>) {
          return name_in(graph.node(city).name, p.values);
        } else {
          return normalize_name(graph.node(city).name) == normalize_name(p.name);
        }
      },
      pred.variant());
}

std::set<NodeId> leaves_matching(const HypothesisGraph& graph, const Predicate& pred) {
  return graph.active_where([&](const NodeId& id) { return evaluate(pred, graph, id); });
}

std::set<NodeId> prune_set(const Predicate& pred, bool answer, const HypothesisGraph& graph) {
  return graph.active_where([&](const NodeId& id) { return evaluate(pred, graph, id) != answer; });
}

double counterfactual_ig(const Predicate& pred, const HypothesisGraph& graph, const NodeId& target) {
  if (!graph.is_active(target)) {
    throw Error(Errc::TargetNotActive, target.str() + " is not an active city");
  }
  const bool answer = evaluate(pred, graph, target);
  const auto n_before = graph.active_count();
  const auto n_after = n_before - prune_set(pred, answer, graph).size();
  return information_gain(n_before, n_after);
}

}  // namespace infoseek
