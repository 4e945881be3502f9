#include "infoseek/trace_analysis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include "infoseek/error.hpp"
#include "infoseek/prompts.hpp"
#include "infoseek/question_parser.hpp"

namespace infoseek {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 11> kStarters = {"is",    "are", "does", "do",   "can",   "could",
                                                       "would", "was", "has",  "will", "should"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Lowercased with runs of whitespace collapsed; used for dedup and matching.
std::string question_key(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool is_sentence_break(std::string_view text, std::size_t i) {
  const char c = text[i];
  if (c == '.' || c == '!' || c == '?' || c == '\n' || c == '"' || c == ':' || c == '`') return true;
  // U+201C / U+201D curly double quotes end in 0x9C / 0x9D after E2 80.
  return i >= 2 && static_cast<unsigned char>(text[i - 2]) == 0xE2 && static_cast<unsigned char>(text[i - 1]) == 0x80 &&
         (static_cast<unsigned char>(c) == 0x9C || static_cast<unsigned char>(c) == 0x9D);
}

std::string_view trim_lead(std::string_view s) {
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) || s.front() == '-' ||
                        s.front() == '*' || s.front() == '>' || s.front() == '(')) {
    s.remove_prefix(1);
  }
  return s;
}

bool opens_with_starter(std::string_view s) {
  std::size_t n = 0;
  while (n < s.size() && std::isalpha(static_cast<unsigned char>(s[n]))) ++n;
  const auto word = lower(s.substr(0, n));
  return std::find(kStarters.begin(), kStarters.end(), word) != kStarters.end();
}

}  // namespace

std::vector<std::string> HeuristicExtractor::extract(std::string_view trace) const {
  std::vector<std::string> out;
  for (std::size_t q = 0; q < trace.size(); ++q) {
    if (trace[q] != '?') continue;
    std::size_t start = q;
    while (start > 0 && !is_sentence_break(trace, start - 1)) --start;
    auto sentence = trim_lead(trace.substr(start, q + 1 - start));
    if (sentence.size() > 1 && opens_with_starter(sentence)) out.emplace_back(sentence);
  }
  return out;
}

std::vector<std::string> LlmExtractor::extract(std::string_view trace) const {
  std::vector<ChatMessage> messages = {{ChatRole::System, std::string(candidate_extraction_prompt())},
                                       {ChatRole::User, std::string(trace)}};
  std::string text;
  try {
    text = client_->complete(messages).text;
  } catch (const Error& e) {
    throw Error(Errc::ExtractorFailure, e.what());
  }
  const auto open = text.find('[');
  const auto close = text.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw Error(Errc::ExtractorFailure, "no JSON array in extractor reply");
  }
  const auto arr = json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (arr.is_discarded() || !arr.is_array()) throw Error(Errc::ExtractorFailure, "extractor reply is not a JSON array");
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw Error(Errc::ExtractorFailure, "extractor array holds a non-string");
    out.push_back(v.get<std::string>());
  }
  return out;
}

QuestionParser default_question_parser() {
  return [](std::string_view text, const HypothesisGraph& graph) { return parse_question(text, graph); };
}

std::vector<std::string> extract_candidates(std::string_view trace, const CandidateExtractor& extractor,
                                            std::string_view executed) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto add = [&](std::string_view text) {
    auto key = question_key(text);
    if (key.empty() || !seen.insert(std::move(key)).second) return;
    out.emplace_back(text);
  };
  if (!trace.empty()) {
    for (const auto& c : extractor.extract(trace)) add(c);
  }
  add(executed);
  return out;
}

std::optional<TurnDecision> score_turn(std::span<const std::string> candidates, const HypothesisGraph& before,
                                       const NodeId& target, const QuestionParser& parser,
                                       std::string_view executed, const std::optional<Predicate>& executed_predicate,
                                       double realized_ig) {
  const auto executed_key = question_key(executed);
  TurnDecision d;
  d.target = target;
  bool any_scored = false;
  bool chosen_found = false;
  double best = 0.0;
  for (const auto& text : candidates) {
    CandidateQuestion c;
    c.text = text;
    c.chosen = !chosen_found && question_key(text) == executed_key;
    chosen_found = chosen_found || c.chosen;
    c.predicate = c.chosen && executed_predicate ? executed_predicate : parser(text, before);
    if (c.predicate) {
      c.counterfactual_ig = counterfactual_ig(*c.predicate, before, target);
      best = any_scored ? std::max(best, *c.counterfactual_ig) : *c.counterfactual_ig;
      any_scored = true;
    } else {
      ++d.unparseable_count;
    }
    d.candidates.push_back(std::move(c));
  }
  if (!chosen_found) {
    CandidateQuestion c;
    c.text = std::string(executed);
    c.chosen = true;
    c.predicate = executed_predicate ? executed_predicate : parser(executed, before);
    if (c.predicate) {
      c.counterfactual_ig = counterfactual_ig(*c.predicate, before, target);
      best = any_scored ? std::max(best, *c.counterfactual_ig) : *c.counterfactual_ig;
      any_scored = true;
    } else {
      ++d.unparseable_count;
    }
    d.candidates.push_back(std::move(c));
  }
  if (!any_scored) return std::nullopt;

  const auto& chosen = *std::find_if(d.candidates.begin(), d.candidates.end(), [](const auto& c) { return c.chosen; });
  if (chosen.counterfactual_ig) {
    d.chosen_ig = *chosen.counterfactual_ig;
  } else {
    d.chosen_ig = realized_ig;
    d.chosen_ig_realized = true;
  }
  d.optimal_ig = std::max(best, d.chosen_ig);
  d.is_optimal = d.chosen_ig >= d.optimal_ig - kOptimalTolerance;
  return d;
}

DecisionQualityReport decision_quality(std::span<const GameTranscript> transcripts, const HypothesisGraph& graph,
                                       const CandidateExtractor& extractor, const QuestionParser& parser) {
  DecisionQualityReport report;
  std::vector<double> rate, chosen, optimal, questions;
  for (const auto& t : transcripts) {
    if (t.dataset_fingerprint != graph.fingerprint()) {
      throw Error(Errc::FingerprintMismatch, "transcript for " + t.config.target.str() + " belongs to dataset " +
                                                 t.dataset_fingerprint);
    }
    HypothesisGraph g = graph;
    g.reset();
    double sum_rate = 0, sum_chosen = 0, sum_optimal = 0, sum_questions = 0;
    std::size_t analyzed = 0;
    for (const auto& turn : t.turns) {
      if (g.active_count() != turn.n_before) {
        throw Error(Errc::ReplayDivergence, t.config.target.str() + " turn " + std::to_string(turn.turn_index) +
                                                ": replayed state has " + std::to_string(g.active_count()) +
                                                " active cities, transcript says " + std::to_string(turn.n_before));
      }
      std::optional<TurnDecision> d;
      if (turn.seeker_trace && !turn.seeker_trace->empty()) {
        const auto candidates = extract_candidates(*turn.seeker_trace, extractor, turn.question_text);
        d = score_turn(candidates, g, t.config.target, parser, turn.question_text, turn.predicate, turn.metrics.ig);
      }
      g.prune(std::set<NodeId>(turn.pruned_ids.begin(), turn.pruned_ids.end()));
      if (!d) {
        ++report.turns_skipped;
        continue;
      }
      d->turn_index = turn.turn_index;
      ++analyzed;
      sum_rate += d->is_optimal ? 1.0 : 0.0;
      sum_chosen += d->chosen_ig;
      sum_optimal += d->optimal_ig;
      sum_questions += static_cast<double>(d->candidates.size());
      report.unparseable_total += d->unparseable_count;
      report.turns.push_back(std::move(*d));
    }
    if (analyzed == 0) continue;
    const auto n = static_cast<double>(analyzed);
    rate.push_back(sum_rate / n);
    chosen.push_back(sum_chosen / n);
    optimal.push_back(sum_optimal / n);
    questions.push_back(sum_questions / n);
    report.turns_analyzed += analyzed;
  }
  report.games_analyzed = rate.size();
  if (!rate.empty()) {
    report.avg_optimal_rate = mean_sd(rate);
    report.avg_chosen_ig = mean_sd(chosen);
    report.avg_optimal_ig = mean_sd(optimal);
    report.avg_questions_per_turn = mean_sd(questions);
  }
  return report;
}

std::string render_decision_quality_table(std::string_view label, const DecisionQualityReport& r) {
  auto cell = [](const MeanSe& m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", m.mean, m.se);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "| Model | Avg Optimal Rate | Avg Chosen IG | Avg Optimal IG | Avg Questions/Turn |\n";
  out << "|---|---|---|---|---|\n";
  out << "| " << label << " | " << cell(r.avg_optimal_rate) << " | " << cell(r.avg_chosen_ig) << " | "
      << cell(r.avg_optimal_ig) << " | " << cell(r.avg_questions_per_turn) << " |\n";
  return out.str();
}

std::string decision_details_csv(const DecisionQualityReport& r) {
  std::ostringstream out;
  out << "target,turn_index,candidates,unparseable,chosen_ig,optimal_ig,is_optimal,chosen_ig_source\n";
  for (const auto& d : r.turns) {
    out << d.target.str() << ',' << d.turn_index << ',' << d.candidates.size() << ',' << d.unparseable_count << ','
        << json(d.chosen_ig).dump() << ',' << json(d.optimal_ig).dump() << ',' << (d.is_optimal ? 1 : 0) << ','
        << (d.chosen_ig_realized ? "realized" : "counterfactual") << '\n';
  }
  return out.str();
}

}  // namespace infoseek
