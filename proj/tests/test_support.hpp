#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "infoseek/dataset.hpp"
#include "infoseek/records.hpp"
#include "infoseek/taxonomy.hpp"

namespace testing {

using infoseek::CityRecord;

inline std::string source_path(const std::string& rel) { return std::string(INFOSEEK_SOURCE_DIR) + "/" + rel; }

inline std::string bundled_csv() { return source_path("data/top_40_pop_cities.csv"); }

inline std::vector<CityRecord> bundled_records() { return infoseek::load_csv(bundled_csv()); }

inline std::shared_ptr<const infoseek::HypothesisGraph> bundled_graph() {
  static const auto g = std::make_shared<const infoseek::HypothesisGraph>(infoseek::build_graph(bundled_records()));
  return g;
}

inline CityRecord rec(std::uint64_t city_id, std::string city, std::uint64_t state_id, std::string state,
                      std::uint64_t country_id, std::string country, std::uint64_t region_id, std::string region,
                      std::uint64_t subregion_id, std::string subregion,
                      std::optional<std::uint64_t> pop = std::nullopt) {
  return {city_id,   std::move(city),   state_id,     std::move(state),     country_id, std::move(country),
          region_id, std::move(region), subregion_id, std::move(subregion), pop};
}

// Eight cities, two regions:
//   Asia / Eastern Asia / Japan: Tokyo (Tokyo-to), Osaka (Osaka-fu)
//   Asia / Eastern Asia / China: Guangzhou, Shenzhen (Guangdong), Beijing (Beijing)
//   Europe / Western Europe / France: Paris (Ile-de-France)
//   Europe / Northern Europe / United Kingdom: London, Manchester (England)
inline std::vector<CityRecord> small_records() {
  return {
      rec(1, "Tokyo", 1000, "Tokyo-to", 100, "Japan", 1, "Asia", 10, "Eastern Asia", 37),
      rec(2, "Osaka", 1001, "Osaka-fu", 100, "Japan", 1, "Asia", 10, "Eastern Asia", 19),
      rec(3, "Guangzhou", 1002, "Guangdong", 101, "China", 1, "Asia", 10, "Eastern Asia", 15),
      rec(4, "Shenzhen", 1002, "Guangdong", 101, "China", 1, "Asia", 10, "Eastern Asia", 14),
      rec(5, "Beijing", 1003, "Beijing", 101, "China", 1, "Asia", 10, "Eastern Asia", 22),
      rec(6, "Paris", 2000, "Ile-de-France", 200, "France", 2, "Europe", 20, "Western Europe", 11),
      rec(7, "London", 2100, "England", 210, "United Kingdom", 2, "Europe", 21, "Northern Europe", 10),
      rec(8, "Manchester", 2100, "England", 210, "United Kingdom", 2, "Europe", 21, "Northern Europe", 3),
  };
}

inline std::shared_ptr<const infoseek::HypothesisGraph> small_graph() {
  static const auto g = std::make_shared<const infoseek::HypothesisGraph>(infoseek::build_graph(small_records()));
  return g;
}

inline infoseek::NodeId city(std::uint64_t id) { return {infoseek::Level::City, id}; }

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Greedy halving written directly against the records, without the library's
// graph or predicate types. Returns the number of turns to identify `target`
// (the final turn is the single-candidate guess).
inline std::size_t brute_force_greedy_turns(const std::vector<CityRecord>& records, std::uint64_t target) {
  auto field = [](const CityRecord& r, int level) -> const std::string& {
    switch (level) {
      case 0: return r.region_name;
      case 1: return r.subregion_name;
      case 2: return r.country_name;
      default: return r.state_name;
    }
  };
  static const char* const level_names[] = {"region", "subregion", "country", "state"};
  const CityRecord* tgt = nullptr;
  for (const auto& r : records) {
    if (r.city_id == target) tgt = &r;
  }
  std::vector<const CityRecord*> active;
  for (const auto& r : records) active.push_back(&r);

  std::size_t turns = 0;
  while (true) {
    ++turns;
    if (active.size() == 1) return turns;
    const auto n = active.size();

    // (imbalance, level rank, tie string) -> membership test
    using Key = std::tuple<std::size_t, int, std::string>;
    std::optional<Key> best;
    std::set<std::uint64_t> best_yes;
    auto consider = [&](Key key, std::set<std::uint64_t> yes) {
      if (!best || key < *best) {
        best = std::move(key);
        best_yes = std::move(yes);
      }
    };
    for (int level = 0; level < 4; ++level) {
      std::map<std::string, std::string> values;
      for (const auto* r : active) values.emplace(lower(field(*r, level)), field(*r, level));
      for (const auto& [key, display] : values) {
        std::set<std::uint64_t> yes;
        for (const auto* r : active) {
          if (lower(field(*r, level)) == key) yes.insert(r->city_id);
        }
        const auto y = yes.size();
        consider({y > n - y ? 2 * y - n : n - 2 * y, level, "attr:" + std::string(level_names[level]) + ":" + display},
                 std::move(yes));
      }
    }
    std::vector<std::pair<std::string, const CityRecord*>> by_id;
    for (const auto* r : active) by_id.emplace_back("city:" + std::to_string(r->city_id), r);
    std::sort(by_id.begin(), by_id.end());
    std::set<std::uint64_t> half;
    std::vector<std::pair<std::string, std::string>> names;
    for (std::size_t i = 0; i < n / 2; ++i) {
      half.insert(by_id[i].second->city_id);
      names.emplace_back(lower(by_id[i].second->city_name), by_id[i].second->city_name);
    }
    std::sort(names.begin(), names.end());
    std::string joined = "cityin:";
    for (std::size_t i = 0; i < names.size(); ++i) joined += (i ? "|" : "") + names[i].second;
    const auto h = half.size();
    consider({n - 2 * h, 4, joined}, std::move(half));

    const bool answer = best_yes.contains(tgt->city_id);
    std::erase_if(active, [&](const CityRecord* r) { return best_yes.contains(r->city_id) != answer; });
  }
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path = std::filesystem::temp_directory_path() / ("infoseek_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string operator/(const std::string& rel) const { return (path / rel).string(); }
};

}  // namespace testing
