#include "infoseek/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "infoseek/error.hpp"
#include "infoseek/hash.hpp"
#include "infoseek/taxonomy.hpp"

namespace infoseek {

namespace {

// RFC 4180 rows: quoted fields may hold commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        row_has_content = false;
        break;
      default:
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::uint64_t parse_id(const std::string& s, std::size_t row, std::string_view column) {
  std::uint64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last) {
    throw Error(Errc::BadRow, "row " + std::to_string(row) + ": " + std::string(column) + " '" + s +
                                  "' is not a non-negative integer");
  }
  return v;
}

}  // namespace

std::vector<CityRecord> parse_csv(std::string_view text) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw Error(Errc::EmptyFile, "dataset has no header");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    auto name = rows[0][i];
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);  // UTF-8 BOM
    const bool known = name == kPopulationColumn ||
                       std::find(std::begin(kRequiredColumns), std::end(kRequiredColumns), name) !=
                           std::end(kRequiredColumns);
    if (!known) throw Error(Errc::UnexpectedColumn, "unexpected column '" + name + "'");
    if (!col.emplace(name, i).second) throw Error(Errc::UnexpectedColumn, "column '" + name + "' appears twice");
  }
  for (auto required : kRequiredColumns) {
    if (!col.contains(std::string(required))) {
      throw Error(Errc::MissingColumn, "missing column '" + std::string(required) + "'");
    }
  }
  if (rows.size() == 1) throw Error(Errc::EmptyFile, "dataset has a header but no rows");

  const auto width = rows[0].size();
  const auto pop_col = col.find(std::string(kPopulationColumn));
  std::vector<CityRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != width) {
      throw Error(Errc::BadRow, "row " + std::to_string(r) + ": expected " + std::to_string(width) + " fields, got " +
                                    std::to_string(row.size()));
    }
    auto get = [&](std::string_view name) -> const std::string& { return row[col.at(std::string(name))]; };
    auto name = [&](std::string_view column) {
      const auto& v = get(column);
      if (v.find_first_not_of(" \t") == std::string::npos) {
        throw Error(Errc::BadRow, "row " + std::to_string(r) + ": empty " + std::string(column));
      }
      return v;
    };
    CityRecord rec;
    rec.city_id = parse_id(get("city_id"), r, "city_id");
    rec.city_name = name("city_name");
    rec.state_id = parse_id(get("state_id"), r, "state_id");
    rec.state_name = name("state_name");
    rec.country_id = parse_id(get("country_id"), r, "country_id");
    rec.country_name = name("country_name");
    rec.region_id = parse_id(get("region_id"), r, "region_id");
    rec.region_name = name("region_name");
    rec.subregion_id = parse_id(get("subregion_id"), r, "subregion_id");
    rec.subregion_name = name("subregion_name");
    if (pop_col != col.end() && !row[pop_col->second].empty()) {
      rec.population_2025 = parse_id(row[pop_col->second], r, kPopulationColumn);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<CityRecord> load_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string write_csv(std::span<const CityRecord> records) {
  const bool with_pop =
      !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.population_2025; });
  std::ostringstream out;
  for (std::size_t i = 0; i < std::size(kRequiredColumns); ++i) out << (i ? "," : "") << kRequiredColumns[i];
  if (with_pop) out << ',' << kPopulationColumn;
  out << '\n';
  for (const auto& r : records) {
    out << r.city_id << ',' << csv_field(r.city_name) << ',' << r.state_id << ',' << csv_field(r.state_name) << ','
        << r.country_id << ',' << csv_field(r.country_name) << ',' << r.region_id << ','
        << csv_field(r.region_name) << ',' << r.subregion_id << ',' << csv_field(r.subregion_name);
    if (with_pop) out << ',' << *r.population_2025;
    out << '\n';
  }
  return out.str();
}

std::vector<CityRecord> top_n_by_population(std::span<const CityRecord> records, std::size_t n) {
  if (n == 0) throw Error(Errc::EmptyInput, "top_n needs n >= 1");
  for (const auto& r : records) {
    if (!r.population_2025) {
      throw Error(Errc::MissingPopulation, "city:" + std::to_string(r.city_id) + " has no population_2025");
    }
  }
  std::vector<CityRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(), [](const CityRecord& a, const CityRecord& b) {
    if (*a.population_2025 != *b.population_2025) return *a.population_2025 > *b.population_2025;
    return a.city_id < b.city_id;
  });
  if (sorted.size() > n) sorted.resize(n);
  return sorted;
}

DatasetManifest inspect_dataset(const std::string& path, std::optional<std::size_t> top_n) {
  const auto bytes = read_file(path);
  auto records = parse_csv(bytes);
  if (top_n) records = top_n_by_population(records, *top_n);
  const auto graph = HypothesisGraph::build(records);

  DatasetManifest m;
  m.source_path = path;
  m.record_count = graph.city_count();
  m.content_hash = sha256_hex(bytes);
  m.graph_fingerprint = graph.fingerprint();
  m.node_count = graph.nodes().size();
  std::set<Level> levels;
  for (const auto& [id, node] : graph.nodes()) levels.insert(id.level);
  m.levels = levels.size();
  m.top_n = top_n;
  return m;
}

}  // namespace infoseek
