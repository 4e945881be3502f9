#include "infoseek/engine.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "infoseek/error.hpp"

namespace infoseek {

namespace {

constexpr std::string_view kTranscriptFormat = "infoseek-transcript/1";

}  // namespace

using nlohmann::ordered_json;

std::string_view fault_kind_name(FaultKind kind) noexcept {
  switch (kind) {
    case FaultKind::UnknownId: return "unknown_id";
    case FaultKind::NonCityId: return "non_city_id";
    case FaultKind::AlreadyPruned: return "already_pruned";
    case FaultKind::TargetPruned: return "target_pruned";
    case FaultKind::WouldEmptySpace: return "would_empty_space";
    case FaultKind::DuplicateId: return "duplicate_id";
  }
  return "unknown_id";
}

std::string ConsistencyFault::tag() const { return std::string(fault_kind_name(kind)) + ":" + id; }

ConsistencyFault ConsistencyFault::parse(std::string_view tag) {
  const auto colon = tag.find(':');
  const auto head = tag.substr(0, colon);
  for (auto k : {FaultKind::UnknownId, FaultKind::NonCityId, FaultKind::AlreadyPruned, FaultKind::TargetPruned,
                 FaultKind::WouldEmptySpace, FaultKind::DuplicateId}) {
    if (fault_kind_name(k) == head) {
      return {k, colon == std::string_view::npos ? std::string() : std::string(tag.substr(colon + 1))};
    }
  }
  throw Error(Errc::MalformedTranscript, "unknown fault tag '" + std::string(tag) + "'");
}

std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::Win: return "win";
    case Outcome::TurnLimit: return "turn_limit";
    case Outcome::AgentFailure: return "agent_failure";
  }
  return "turn_limit";
}

std::optional<Outcome> parse_outcome(std::string_view text) noexcept {
  for (auto o : {Outcome::Win, Outcome::TurnLimit, Outcome::AgentFailure}) {
    if (outcome_name(o) == text) return o;
  }
  return std::nullopt;
}

GameMetrics game_metrics_for(const std::vector<TurnRecord>& turns, Outcome outcome, std::size_t max_turns) {
  std::vector<TurnMetrics> per_turn;
  per_turn.reserve(turns.size());
  for (const auto& t : turns) per_turn.push_back(t.metrics);
  const bool win = outcome == Outcome::Win;
  return GameMetrics::from_turns(win, win ? turns.size() : max_turns, std::move(per_turn));
}

namespace {

// Splits the pruner's ids into the applicable subset and the faults.
std::set<NodeId> filter_prune(const std::vector<NodeId>& proposed, const HypothesisGraph& graph, const NodeId& target,
                              std::vector<ConsistencyFault>& faults) {
  std::set<NodeId> seen;
  std::set<NodeId> accepted;
  for (const auto& id : proposed) {
    if (!seen.insert(id).second) {
      faults.push_back({FaultKind::DuplicateId, id.str()});
    } else if (id.level != Level::City) {
      faults.push_back({FaultKind::NonCityId, id.str()});
    } else if (!graph.contains(id)) {
      faults.push_back({FaultKind::UnknownId, id.str()});
    } else if (!graph.is_active(id)) {
      faults.push_back({FaultKind::AlreadyPruned, id.str()});
    } else if (id == target) {
      faults.push_back({FaultKind::TargetPruned, id.str()});
    } else {
      accepted.insert(id);
    }
  }
  // Only reachable if the target itself is no longer active; keep one city alive.
  while (!accepted.empty() && accepted.size() >= graph.active_count()) {
    auto last = std::prev(accepted.end());
    faults.push_back({FaultKind::WouldEmptySpace, last->str()});
    accepted.erase(last);
  }
  return accepted;
}

}  // namespace

GameTranscript play_game(const Seeker& seeker, const Oracle& oracle, const Pruner& pruner,
                         const HypothesisGraph& graph, const GameConfig& cfg, const TurnObserver& observer) {
  if (cfg.target.level != Level::City || !graph.contains(cfg.target)) {
    throw Error(Errc::InvalidTarget, cfg.target.str() + " is not a city of the dataset");
  }
  if (cfg.max_turns == 0) throw Error(Errc::InvalidTarget, "max_turns must be at least 1");

  HypothesisGraph g = graph;
  g.reset();
  Rng rng(cfg.rng_seed);

  GameTranscript t;
  t.config = cfg;
  t.dataset_fingerprint = g.fingerprint();
  t.n_initial = g.active_count();
  t.outcome = Outcome::TurnLimit;

  std::vector<Exchange> history;
  for (std::size_t turn = 1; turn <= cfg.max_turns; ++turn) {
    TurnRecord rec;
    rec.turn_index = turn;
    AuditLog* audit = cfg.audit ? &rec.audit : nullptr;

    SeekerContext ctx;
    ctx.history = history;
    ctx.turn_index = turn;
    if (cfg.observability == Observability::FO) ctx.graph_text = g.serialize_state();

    SeekerOutput question;
    OracleOutput reply;
    PrunerOutput decision;
    try {
      question = seeker.ask(ctx, rng, audit);
      reply = oracle.answer(question, cfg.target, history, audit);
      decision = pruner.prune_decision(question, reply.answer, g, turn, audit);
    } catch (const Error& e) {
      t.outcome = Outcome::AgentFailure;
      t.failure = e.what();
      break;
    }

    rec.question_text = question.question_text;
    rec.predicate = question.predicate;
    rec.seeker_trace = question.reasoning_trace;
    rec.oracle_rationale = reply.rationale;
    rec.oracle_answer = reply.answer;
    rec.game_over_flag = reply.game_over;
    rec.pruner_rationale = decision.rationale;

    const auto accepted = filter_prune(decision.pruned_ids, g, cfg.target, rec.consistency_faults);
    const auto outcome = g.prune(accepted);
    rec.pruned_ids.assign(outcome.removed.begin(), outcome.removed.end());
    rec.n_before = outcome.n_before;
    rec.n_after = outcome.n_after;
    rec.metrics = TurnMetrics::from_counts(turn, outcome.n_before, outcome.n_after);

    history.push_back({question.question_text, reply.answer, question.predicate});
    t.turns.push_back(std::move(rec));
    if (observer) observer(t.turns.back(), g);

    if (reply.game_over) {
      t.outcome = Outcome::Win;
      break;
    }
  }

  t.game_metrics = game_metrics_for(t.turns, t.outcome, cfg.max_turns);
  return t;
}

GameMetrics replay(const GameTranscript& transcript, const HypothesisGraph& graph) {
  if (transcript.dataset_fingerprint != graph.fingerprint()) {
    throw Error(Errc::FingerprintMismatch, "transcript was recorded against dataset " +
                                               transcript.dataset_fingerprint + ", not " + graph.fingerprint());
  }
  auto diverged = [](std::size_t turn, const std::string& what) {
    return Error(Errc::ReplayDivergence, "turn " + std::to_string(turn) + ": " + what);
  };
  auto close = [](double a, double b) { return std::fabs(a - b) <= kReplayTolerance; };

  HypothesisGraph g = graph;
  g.reset();
  if (transcript.n_initial != g.active_count()) throw diverged(0, "initial candidate count differs");

  std::vector<TurnRecord> recomputed = transcript.turns;
  for (std::size_t i = 0; i < recomputed.size(); ++i) {
    auto& rec = recomputed[i];
    const auto& stored = transcript.turns[i];
    if (rec.turn_index != i + 1) throw diverged(i + 1, "turn index out of sequence");
    PruneOutcome outcome;
    try {
      outcome = g.prune(std::set<NodeId>(rec.pruned_ids.begin(), rec.pruned_ids.end()));
    } catch (const Error& e) {
      throw diverged(rec.turn_index, std::string("recorded prune cannot be applied: ") + e.what());
    }
    rec.metrics = TurnMetrics::from_counts(rec.turn_index, outcome.n_before, outcome.n_after);
    if (outcome.n_before != stored.n_before || outcome.n_after != stored.n_after) {
      throw diverged(rec.turn_index, "candidate counts differ");
    }
    if (!close(rec.metrics.h_before, stored.metrics.h_before) || !close(rec.metrics.h_after, stored.metrics.h_after) ||
        !close(rec.metrics.ig, stored.metrics.ig)) {
      throw diverged(rec.turn_index, "entropy or IG differs");
    }
  }

  const auto metrics = game_metrics_for(recomputed, transcript.outcome, transcript.config.max_turns);
  const auto& stored = transcript.game_metrics;
  if (metrics.win != stored.win || metrics.turns != stored.turns || !close(metrics.total_ig, stored.total_ig) ||
      !close(metrics.ig_per_turn, stored.ig_per_turn)) {
    throw diverged(recomputed.size(), "game metrics differ");
  }
  return metrics;
}

namespace {

ordered_json optional_string(const std::optional<std::string>& s) { return s ? ordered_json(*s) : ordered_json(nullptr); }

}  // namespace

void write_transcript(std::ostream& out, const GameTranscript& t) {
  ordered_json header;
  header["record"] = "header";
  header["format"] = kTranscriptFormat;
  header["target"] = t.config.target.str();
  header["max_turns"] = t.config.max_turns;
  header["observability"] = observability_name(t.config.observability);
  header["rng_seed"] = t.config.rng_seed;
  header["audit"] = t.config.audit;
  header["dataset_fingerprint"] = t.dataset_fingerprint;
  header["n_initial"] = t.n_initial;
  out << header.dump() << '\n';

  for (const auto& r : t.turns) {
    ordered_json j;
    j["record"] = "turn";
    j["turn_index"] = r.turn_index;
    j["question_text"] = r.question_text;
    j["predicate"] = r.predicate ? ordered_json(r.predicate->canonical()) : ordered_json(nullptr);
    j["oracle_rationale"] = r.oracle_rationale;
    j["oracle_answer"] = r.oracle_answer;
    j["game_over_flag"] = r.game_over_flag;
    j["pruner_rationale"] = r.pruner_rationale;
    auto ids = ordered_json::array();
    for (const auto& id : r.pruned_ids) ids.push_back(id.str());
    j["pruned_ids"] = std::move(ids);
    j["n_before"] = r.n_before;
    j["n_after"] = r.n_after;
    j["h_before"] = r.metrics.h_before;
    j["h_after"] = r.metrics.h_after;
    j["ig"] = r.metrics.ig;
    j["seeker_trace"] = optional_string(r.seeker_trace);
    auto faults = ordered_json::array();
    for (const auto& f : r.consistency_faults) faults.push_back(f.tag());
    j["consistency_faults"] = std::move(faults);
    if (!r.audit.empty()) {
      auto audit = ordered_json::array();
      for (const auto& a : r.audit) {
        audit.push_back({{"agent", a.agent}, {"request", a.request}, {"response", a.response}});
      }
      j["audit"] = std::move(audit);
    }
    out << j.dump() << '\n';
  }

  ordered_json footer;
  footer["record"] = "footer";
  footer["outcome"] = outcome_name(t.outcome);
  footer["failure"] = optional_string(t.failure);
  footer["win"] = t.game_metrics.win;
  footer["turns"] = t.game_metrics.turns;
  footer["total_ig"] = t.game_metrics.total_ig;
  footer["ig_per_turn"] = t.game_metrics.ig_per_turn;
  out << footer.dump() << '\n';
}

std::string transcript_to_string(const GameTranscript& t) {
  std::ostringstream out;
  write_transcript(out, t);
  return out.str();
}

GameTranscript read_transcript(std::istream& in) {
  GameTranscript t;
  bool have_header = false;
  bool have_footer = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (have_footer) throw Error(Errc::MalformedTranscript, "content after footer at line " + std::to_string(line_no));
    try {
      const auto j = ordered_json::parse(line);
      const auto kind = j.at("record").get<std::string>();
      if (kind == "header") {
        if (j.at("format").get<std::string>() != kTranscriptFormat) {
          throw Error(Errc::MalformedTranscript, "unsupported format " + j.at("format").dump());
        }
        t.config.target = NodeId::parse(j.at("target").get<std::string>());
        t.config.max_turns = j.at("max_turns").get<std::size_t>();
        const auto obs = parse_observability(j.at("observability").get<std::string>());
        if (!obs) throw Error(Errc::MalformedTranscript, "bad observability");
        t.config.observability = *obs;
        t.config.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        t.config.audit = j.at("audit").get<bool>();
        t.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
        t.n_initial = j.at("n_initial").get<std::size_t>();
        have_header = true;
      } else if (kind == "turn") {
        if (!have_header) throw Error(Errc::MalformedTranscript, "turn before header");
        TurnRecord r;
        r.turn_index = j.at("turn_index").get<std::size_t>();
        r.question_text = j.at("question_text").get<std::string>();
        if (!j.at("predicate").is_null()) r.predicate = Predicate::parse_canonical(j.at("predicate").get<std::string>());
        r.oracle_rationale = j.at("oracle_rationale").get<std::string>();
        r.oracle_answer = j.at("oracle_answer").get<std::string>();
        r.game_over_flag = j.at("game_over_flag").get<bool>();
        r.pruner_rationale = j.at("pruner_rationale").get<std::string>();
        for (const auto& id : j.at("pruned_ids")) r.pruned_ids.push_back(NodeId::parse(id.get<std::string>()));
        r.n_before = j.at("n_before").get<std::size_t>();
        r.n_after = j.at("n_after").get<std::size_t>();
        r.metrics.turn_index = r.turn_index;
        r.metrics.h_before = j.at("h_before").get<double>();
        r.metrics.h_after = j.at("h_after").get<double>();
        r.metrics.ig = j.at("ig").get<double>();
        if (!j.at("seeker_trace").is_null()) r.seeker_trace = j.at("seeker_trace").get<std::string>();
        for (const auto& f : j.at("consistency_faults")) r.consistency_faults.push_back(ConsistencyFault::parse(f.get<std::string>()));
        if (j.contains("audit")) {
          for (const auto& a : j.at("audit")) {
            r.audit.push_back({a.at("agent").get<std::string>(), a.at("request").get<std::string>(),
                               a.at("response").get<std::string>()});
          }
        }
        t.turns.push_back(std::move(r));
      } else if (kind == "footer") {
        if (!have_header) throw Error(Errc::MalformedTranscript, "footer before header");
        const auto outcome = parse_outcome(j.at("outcome").get<std::string>());
        if (!outcome) throw Error(Errc::MalformedTranscript, "bad outcome");
        t.outcome = *outcome;
        if (!j.at("failure").is_null()) t.failure = j.at("failure").get<std::string>();
        std::vector<TurnMetrics> per_turn;
        for (const auto& r : t.turns) per_turn.push_back(r.metrics);
        t.game_metrics.win = j.at("win").get<bool>();
        t.game_metrics.turns = j.at("turns").get<std::size_t>();
        t.game_metrics.per_turn = std::move(per_turn);
        t.game_metrics.total_ig = j.at("total_ig").get<double>();
        t.game_metrics.ig_per_turn = j.at("ig_per_turn").get<double>();
        have_footer = true;
      } else {
        throw Error(Errc::MalformedTranscript, "unknown record kind '" + kind + "'");
      }
    } catch (const ordered_json::exception& e) {
      throw Error(Errc::MalformedTranscript, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::MalformedTranscript) throw;
      throw Error(Errc::MalformedTranscript, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header || !have_footer) throw Error(Errc::MalformedTranscript, "missing header or footer");
  return t;
}

GameTranscript transcript_from_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_transcript(in);
}

GameTranscript load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open transcript " + path);
  return read_transcript(in);
}

}  // namespace infoseek
