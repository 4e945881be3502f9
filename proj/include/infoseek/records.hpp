#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace infoseek {

// One row of the city dataset: a city with its full administrative path.
struct CityRecord {
  std::uint64_t city_id = 0;
  std::string city_name;
  std::uint64_t state_id = 0;
  std::string state_name;
  std::uint64_t country_id = 0;
  std::string country_name;
  std::uint64_t region_id = 0;
  std::string region_name;
  std::uint64_t subregion_id = 0;
  std::string subregion_name;
  std::optional<std::uint64_t> population_2025;

  friend bool operator==(const CityRecord&, const CityRecord&) = default;
};

}  // namespace infoseek
