#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infoseek/records.hpp"

namespace infoseek {

// Required columns, in the order they are written.
inline constexpr std::string_view kRequiredColumns[] = {
    "city_id",     "city_name",    "state_id",  "state_name",   "country_id",
    "country_name", "region_id",   "region_name", "subregion_id", "subregion_name"};
inline constexpr std::string_view kPopulationColumn = "population_2025";

// Header must hold exactly the required columns (any order), optionally plus
// population_2025. Throws MissingColumn, UnexpectedColumn, BadRow (1-based data
// row index), EmptyFile.
std::vector<CityRecord> parse_csv(std::string_view text);
std::vector<CityRecord> load_csv(const std::string& path);

// Inverse of parse_csv, with population when every record has one.
std::string write_csv(std::span<const CityRecord> records);

// The n most populous records, descending by population, ties to the lower
// city_id. Throws MissingPopulation, EmptyInput (n == 0).
std::vector<CityRecord> top_n_by_population(std::span<const CityRecord> records, std::size_t n);

struct DatasetManifest {
  std::string source_path;
  std::size_t record_count = 0;
  std::string content_hash;  // SHA-256 of the file bytes
  std::string graph_fingerprint;
  std::size_t levels = 5;
  std::size_t node_count = 0;
  std::optional<std::size_t> top_n;
};

// Loads, validates and builds the graph. Throws any load_csv/build_graph error.
DatasetManifest inspect_dataset(const std::string& path, std::optional<std::size_t> top_n = std::nullopt);

std::string read_file(const std::string& path);

}  // namespace infoseek
