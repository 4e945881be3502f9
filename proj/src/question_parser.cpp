#include "infoseek/question_parser.hpp"

#include <array>
#include <cctype>
#include <string>
#include <vector>

namespace infoseek {

namespace {

std::string_view trim(std::string_view s) {
  auto junk = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0 || c == '"' || c == '\'' || c == '`' || c == '*';
  };
  while (!s.empty() && junk(s.front())) s.remove_prefix(1);
  while (!s.empty() && junk(s.back())) s.remove_suffix(1);
  return s;
}

bool eat(std::string_view& s, std::string_view prefix) {
  if (s.size() < prefix.size() || s.substr(0, prefix.size()) != prefix) return false;
  // Only whole words.
  if (s.size() > prefix.size() && std::isalnum(static_cast<unsigned char>(s[prefix.size()]))) return false;
  s.remove_prefix(prefix.size());
  s = trim(s);
  return true;
}

std::vector<std::string> split_names(std::string_view s) {
  std::string text(s);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto orw = text.find(" or ", start);
    auto cut = std::min(comma, orw);
    auto piece = trim(std::string_view(text).substr(start, cut == std::string::npos ? std::string::npos : cut - start));
    if (!piece.empty()) {
      if (piece.substr(0, 3) == "or ") piece = trim(piece.substr(3));
      out.emplace_back(piece);
    }
    if (cut == std::string::npos) break;
    start = cut + (cut == orw ? 4 : 1);
  }
  return out;
}

// Display name of a node at `level` called `name`. Also tries without a leading
// "the", and with the final period that punctuation stripping takes from "D.C.".
std::optional<std::string> lookup(const HypothesisGraph& graph, Level level, std::string_view name) {
  auto hits = graph.find_by_name(level, name);
  if (hits.empty() && name.substr(0, 4) == "the ") hits = graph.find_by_name(level, name.substr(4));
  if (hits.empty()) hits = graph.find_by_name(level, std::string(name) + ".");
  if (hits.empty()) return std::nullopt;
  return graph.node(hits.front()).name;
}

std::optional<std::vector<std::string>> lookup_all(const HypothesisGraph& graph, Level level,
                                                   const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    auto hit = lookup(graph, level, n);
    if (!hit) return std::nullopt;
    out.push_back(*hit);
  }
  return out;
}

}  // namespace

std::optional<Predicate> parse_question(std::string_view text, const HypothesisGraph& graph) {
  std::string lowered(trim(text));
  for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::string_view s = lowered;
  while (!s.empty() && (s.back() == '?' || s.back() == '.' || s.back() == '!')) s.remove_suffix(1);
  s = trim(s);

  static constexpr std::array<std::string_view, 8> kSubjects = {
      "is the target city", "is the secret city", "is the target", "is your city",
      "is the city",        "is this city",       "is it",         "is the answer"};
  bool had_subject = false;
  for (auto subject : kSubjects) {
    if (eat(s, subject)) {
      had_subject = true;
      break;
    }
  }
  if (!had_subject || s.empty()) return std::nullopt;

  for (auto filler : {"located", "situated", "found", "somewhere"}) eat(s, filler);

  if (eat(s, "one of")) {
    auto names = split_names(s);
    if (names.empty()) return std::nullopt;
    if (auto cities = lookup_all(graph, Level::City, names)) return Predicate::city_in(*cities);
    return std::nullopt;
  }

  if (eat(s, "in") || eat(s, "within")) {
    eat(s, "the");
    for (auto qualifier : {"region of", "subregion of", "country of", "state of", "province of", "city of"}) {
      if (eat(s, qualifier)) break;
    }
    auto names = split_names(s);
    if (names.empty()) return std::nullopt;
    for (Level level : kAttributeLevels) {
      if (auto hits = lookup_all(graph, level, names)) return Predicate::attribute_in(level, *hits);
    }
    if (auto cities = lookup_all(graph, Level::City, names)) return Predicate::city_in(*cities);
    return std::nullopt;
  }

  eat(s, "the city of");
  if (auto city = lookup(graph, Level::City, s)) return Predicate::city_guess(*city);
  return std::nullopt;
}

}  // namespace infoseek
