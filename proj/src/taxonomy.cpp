#include "infoseek/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "infoseek/error.hpp"
#include "infoseek/hash.hpp"

namespace infoseek {

std::string_view level_name(Level level) noexcept {
  switch (level) {
    case Level::Region: return "region";
    case Level::Subregion: return "subregion";
    case Level::Country: return "country";
    case Level::State: return "state";
    case Level::City: return "city";
  }
  return "city";
}

std::optional<Level> parse_level(std::string_view text) noexcept {
  for (Level l : kAllLevels) {
    if (level_name(l) == text) return l;
  }
  return std::nullopt;
}

std::string NodeId::str() const {
  std::string out(level_name(level));
  out.push_back(':');
  out += std::to_string(value);
  return out;
}

std::optional<NodeId> NodeId::try_parse(std::string_view text) noexcept {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto level = parse_level(text.substr(0, colon));
  if (!level) return std::nullopt;
  const auto digits = text.substr(colon + 1);
  if (digits.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto* first = digits.data();
  const auto* last = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return NodeId{*level, value};
}

NodeId NodeId::parse(std::string_view text) {
  if (auto id = try_parse(text)) return *id;
  throw Error(Errc::InvalidNodeId, "cannot parse node id '" + std::string(text) + "'");
}

std::string normalize_name(std::string_view name) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!name.empty() && is_space(static_cast<unsigned char>(name.front()))) name.remove_prefix(1);
  while (!name.empty() && is_space(static_cast<unsigned char>(name.back()))) name.remove_suffix(1);
  std::string out(name);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string canonical_records(const std::vector<CityRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.city_id << '\x1f' << r.city_name << '\x1f' << r.state_id << '\x1f' << r.state_name
        << '\x1f' << r.country_id << '\x1f' << r.country_name << '\x1f' << r.region_id << '\x1f'
        << r.region_name << '\x1f' << r.subregion_id << '\x1f' << r.subregion_name << '\x1f';
    if (r.population_2025) out << *r.population_2025;
    out << '\n';
  }
  return out.str();
}

}  // namespace

HypothesisGraph HypothesisGraph::build(std::span<const CityRecord> records) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no city records");

  HypothesisGraph g;
  g.records_.assign(records.begin(), records.end());
  std::sort(g.records_.begin(), g.records_.end(),
            [](const CityRecord& a, const CityRecord& b) { return a.city_id < b.city_id; });

  // Inserts or re-validates one node; the same id must always carry the same
  // name and hang under the same parent.
  auto upsert = [&g](NodeId id, const std::string& name, std::optional<NodeId> parent) {
    if (blank(name)) {
      throw Error(Errc::MissingField, "empty " + std::string(level_name(id.level)) + " name for " + id.str());
    }
    auto [it, inserted] = g.nodes_.try_emplace(id, TaxonomyNode{id, name, parent, {}});
    if (!inserted) {
      if (it->second.parent != parent) {
        throw Error(Errc::InconsistentHierarchy, id.str() + " appears under two different parents");
      }
      if (it->second.name != name) {
        throw Error(Errc::InconsistentHierarchy,
                    id.str() + " has two names: '" + it->second.name + "' and '" + name + "'");
      }
    } else if (parent) {
      g.nodes_.at(*parent).children.push_back(id);
    }
  };

  for (const auto& r : g.records_) {
    const NodeId region{Level::Region, r.region_id};
    const NodeId subregion{Level::Subregion, r.subregion_id};
    const NodeId country{Level::Country, r.country_id};
    const NodeId state{Level::State, r.state_id};
    const NodeId city{Level::City, r.city_id};
    if (g.nodes_.contains(city)) {
      throw Error(Errc::DuplicateCityId, "duplicate " + city.str());
    }
    upsert(region, r.region_name, std::nullopt);
    upsert(subregion, r.subregion_name, region);
    upsert(country, r.country_name, subregion);
    upsert(state, r.state_name, country);
    upsert(city, r.city_name, state);
    g.cities_.insert(city);
    g.paths_.emplace(city, std::array<NodeId, 4>{state, country, subregion, region});
  }
  for (auto& [id, node] : g.nodes_) std::sort(node.children.begin(), node.children.end());

  g.active_ = g.cities_;
  g.fingerprint_ = sha256_hex(canonical_records(g.records_));
  return g;
}

const TaxonomyNode& HypothesisGraph::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(Errc::UnknownId, "unknown node " + id.str());
  return it->second;
}

std::array<NodeId, 4> HypothesisGraph::ancestors(const NodeId& city) const {
  if (city.level != Level::City) throw Error(Errc::NonCityId, city.str() + " is not a city");
  auto it = paths_.find(city);
  if (it == paths_.end()) throw Error(Errc::UnknownId, "unknown city " + city.str());
  return it->second;
}

NodeId HypothesisGraph::ancestor_at(const NodeId& city, Level level) const {
  const auto path = ancestors(city);
  switch (level) {
    case Level::City: return city;
    case Level::State: return path[0];
    case Level::Country: return path[1];
    case Level::Subregion: return path[2];
    case Level::Region: return path[3];
  }
  return city;
}

std::vector<NodeId> HypothesisGraph::find_by_name(Level level, std::string_view name) const {
  const auto key = normalize_name(name);
  std::vector<NodeId> out;
  for (const auto& [id, node] : nodes_) {
    if (id.level == level && normalize_name(node.name) == key) out.push_back(id);
  }
  return out;
}

PruneOutcome HypothesisGraph::prune(const std::set<NodeId>& ids) {
  for (const auto& id : ids) {
    if (id.level != Level::City) {
      throw Error(Errc::NonCityId, "refusing to prune non-city node " + id.str());
    }
    if (!cities_.contains(id)) throw Error(Errc::UnknownId, "unknown city " + id.str());
    if (!active_.contains(id)) throw Error(Errc::AlreadyPruned, id.str() + " is already pruned");
  }
  if (!ids.empty() && ids.size() >= active_.size()) {
    throw Error(Errc::WouldEmptySpace, "pruning " + std::to_string(ids.size()) + " of " +
                                           std::to_string(active_.size()) + " active cities");
  }

  PruneOutcome outcome{ids, active_.size(), 0};
  for (const auto& id : ids) active_.erase(id);
  outcome.n_after = active_.size();
  return outcome;
}

void HypothesisGraph::reset() { active_ = cities_; }

std::set<NodeId> HypothesisGraph::active_where(const std::function<bool(const NodeId&)>& keep) const {
  std::set<NodeId> out;
  for (const auto& id : active_) {
    if (keep(id)) out.insert(id);
  }
  return out;
}

std::string HypothesisGraph::serialize_state() const {
  std::ostringstream out;
  out << "Active cities: " << active_.size() << "/" << cities_.size() << "\n";

  std::function<void(const NodeId&, int)> emit = [&](const NodeId& id, int depth) {
    const auto& n = nodes_.at(id);
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << id.str() << ' ' << n.name;
    if (id.level == Level::City) out << (active_.contains(id) ? " [ACTIVE]" : " [PRUNED]");
    out << '\n';
    for (const auto& child : n.children) emit(child, depth + 1);
  };
  for (const auto& [id, node] : nodes_) {
    if (id.level == Level::Region) emit(id, 0);
  }
  return out.str();
}

}  // namespace infoseek
