#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infoseek/records.hpp"

namespace infoseek {

// Taxonomy levels, coarsest first.
enum class Level : std::uint8_t { Region = 0, Subregion, Country, State, City };

inline constexpr std::array<Level, 5> kAllLevels = {Level::Region, Level::Subregion, Level::Country,
                                                    Level::State, Level::City};

// Levels an AttributeIn predicate may refer to.
inline constexpr std::array<Level, 4> kAttributeLevels = {Level::Region, Level::Subregion,
                                                          Level::Country, Level::State};

std::string_view level_name(Level level) noexcept;
std::optional<Level> parse_level(std::string_view text) noexcept;

struct NodeId {
  Level level = Level::City;
  std::uint64_t value = 0;

  // "<level>:<value>", e.g. "city:123".
  std::string str() const;

  // Throws Error(InvalidNodeId) on malformed input.
  static NodeId parse(std::string_view text);
  static std::optional<NodeId> try_parse(std::string_view text) noexcept;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

struct TaxonomyNode {
  NodeId id;
  std::string name;
  std::optional<NodeId> parent;  // absent iff region
  std::vector<NodeId> children;  // sorted; empty iff city
};

struct PruneOutcome {
  std::set<NodeId> removed;
  std::size_t n_before = 0;
  std::size_t n_after = 0;
};

// The five-level city taxonomy plus the active/pruned flag of every city.
//
// Pruning flips a flag; nodes are never deleted, so ancestor queries stay valid
// for the whole game and transcripts can be replayed against a fresh copy.
class HypothesisGraph {
 public:
  // Throws DuplicateCityId, InconsistentHierarchy, MissingField, EmptyInput.
  static HypothesisGraph build(std::span<const CityRecord> records);

  std::size_t active_count() const noexcept { return active_.size(); }
  std::size_t city_count() const noexcept { return cities_.size(); }

  const std::map<NodeId, TaxonomyNode>& nodes() const noexcept { return nodes_; }
  const std::set<NodeId>& city_leaves() const noexcept { return cities_; }
  const std::set<NodeId>& active_cities() const noexcept { return active_; }

  bool contains(const NodeId& id) const { return nodes_.contains(id); }
  bool is_active(const NodeId& id) const { return active_.contains(id); }

  // Throws UnknownId.
  const TaxonomyNode& node(const NodeId& id) const;

  // [state, country, subregion, region]. Throws UnknownId / NonCityId.
  std::array<NodeId, 4> ancestors(const NodeId& city) const;

  // The node on the city's path at `level` (the city itself for Level::City).
  NodeId ancestor_at(const NodeId& city, Level level) const;

  // Cities whose name matches case-insensitively after trimming.
  std::vector<NodeId> find_by_name(Level level, std::string_view name) const;

  // All-or-nothing: either every id is flipped to pruned or the graph is untouched.
  // Throws NonCityId, UnknownId, AlreadyPruned, WouldEmptySpace.
  PruneOutcome prune(const std::set<NodeId>& ids);

  // Reactivates every city.
  void reset();

  std::set<NodeId> active_where(const std::function<bool(const NodeId&)>& keep) const;

  // Indented tree, one node per line; cities carry [ACTIVE] or [PRUNED].
  std::string serialize_state() const;

  // SHA-256 over the canonical record content the graph was built from.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  // Records sorted by city id, as accepted by build().
  const std::vector<CityRecord>& records() const noexcept { return records_; }

 private:
  std::map<NodeId, TaxonomyNode> nodes_;
  std::set<NodeId> cities_;
  std::set<NodeId> active_;
  std::map<NodeId, std::array<NodeId, 4>> paths_;
  std::vector<CityRecord> records_;
  std::string fingerprint_;
};

inline HypothesisGraph build_graph(std::span<const CityRecord> records) {
  return HypothesisGraph::build(records);
}

// Lowercased, whitespace-trimmed form used for every name comparison.
std::string normalize_name(std::string_view name);

}  // namespace infoseek
