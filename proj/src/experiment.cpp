#include "infoseek/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "infoseek/dataset.hpp"
#include "infoseek/error.hpp"

namespace infoseek {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string_view agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::Greedy: return "greedy";
    case AgentKind::Random: return "random";
    case AgentKind::Rule: return "rule";
    case AgentKind::Llm: return "llm";
  }
  return "rule";
}

AgentSpec parse_agent(const json& j, std::string_view role) {
  AgentSpec spec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "greedy") spec.kind = AgentKind::Greedy;
  else if (kind == "random") spec.kind = AgentKind::Random;
  else if (kind == "rule") spec.kind = AgentKind::Rule;
  else if (kind == "llm") spec.kind = AgentKind::Llm;
  else throw Error(Errc::ConfigError, std::string(role) + ": unknown agent kind '" + kind + "'");
  if (j.contains("endpoint")) spec.endpoint = j.at("endpoint").get<EndpointConfig>();
  return spec;
}

json agent_to_json(const AgentSpec& spec) {
  json j{{"kind", agent_kind_name(spec.kind)}};
  if (spec.endpoint) j["endpoint"] = *spec.endpoint;
  return j;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
  if (dataset_path.empty()) fail("dataset_path is required");
  if (runs_per_target == 0) fail("runs_per_target must be >= 1");
  if (max_turns == 0) fail("max_turns must be >= 1");
  if (parallelism == 0) fail("parallelism must be >= 1");
  if (top_n && *top_n == 0) fail("top_n must be >= 1");
  if (seeker.kind != AgentKind::Greedy && seeker.kind != AgentKind::Random && seeker.kind != AgentKind::Llm) {
    fail("seeker.kind must be greedy, random or llm");
  }
  if (oracle.kind != AgentKind::Rule && oracle.kind != AgentKind::Llm) fail("oracle.kind must be rule or llm");
  if (pruner.kind != AgentKind::Rule && pruner.kind != AgentKind::Llm) fail("pruner.kind must be rule or llm");
  for (const auto* spec : {&seeker, &oracle, &pruner}) {
    if (spec->kind == AgentKind::Llm && !spec->endpoint) fail("llm agents need an endpoint");
  }
}

ExperimentConfig parse_experiment_config(const json& j, const std::string& base_dir) {
  ExperimentConfig c;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kConfigSchemaVersion) {
      throw Error(Errc::ConfigError, "unsupported schema_version " + std::to_string(version));
    }
    c.label = j.value("label", c.label);
    c.dataset_path = resolve(base_dir, j.at("dataset_path").get<std::string>());
    if (j.contains("top_n") && !j.at("top_n").is_null()) c.top_n = j.at("top_n").get<std::size_t>();
    c.targets = j.value("targets", c.targets);
    c.runs_per_target = j.value("runs_per_target", c.runs_per_target);
    c.max_turns = j.value("max_turns", c.max_turns);
    const auto obs = parse_observability(j.value("observability", std::string("PO")));
    if (!obs) throw Error(Errc::ConfigError, "observability must be FO or PO");
    c.observability = *obs;
    if (j.contains("seeker")) c.seeker = parse_agent(j.at("seeker"), "seeker");
    if (j.contains("oracle")) c.oracle = parse_agent(j.at("oracle"), "oracle");
    if (j.contains("pruner")) c.pruner = parse_agent(j.at("pruner"), "pruner");
    c.reasoning_enabled = j.value("reasoning_enabled", c.reasoning_enabled);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.max_inflight_requests = j.value("max_inflight_requests", c.max_inflight_requests);
    c.output_dir = resolve(base_dir, j.value("output_dir", c.output_dir));
    c.audit = j.value("audit", c.audit);
    const auto policy = j.value("failure_policy", std::string("count_as_loss"));
    if (policy == "count_as_loss") c.failure_policy = FailurePolicy::CountAsLoss;
    else if (policy == "exclude") c.failure_policy = FailurePolicy::Exclude;
    else throw Error(Errc::ConfigError, "failure_policy must be count_as_loss or exclude");
    const auto grouping = j.value("se_grouping", std::string("per_game"));
    if (grouping == "per_game") c.se_grouping = SeGrouping::PerGame;
    else if (grouping == "per_target") c.se_grouping = SeGrouping::PerTarget;
    else throw Error(Errc::ConfigError, "se_grouping must be per_game or per_target");
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  const auto text = read_file(path);
  const auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::ConfigError, path + " is not a JSON object");
  return parse_experiment_config(j, fs::path(path).parent_path().string());
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["label"] = c.label;
  j["dataset_path"] = c.dataset_path;
  j["top_n"] = c.top_n ? json(*c.top_n) : json(nullptr);
  j["targets"] = c.targets;
  j["runs_per_target"] = c.runs_per_target;
  j["max_turns"] = c.max_turns;
  j["observability"] = observability_name(c.observability);
  j["seeker"] = agent_to_json(c.seeker);
  j["oracle"] = agent_to_json(c.oracle);
  j["pruner"] = agent_to_json(c.pruner);
  j["reasoning_enabled"] = c.reasoning_enabled;
  j["base_seed"] = c.base_seed;
  j["parallelism"] = c.parallelism;
  j["max_inflight_requests"] = c.max_inflight_requests;
  j["output_dir"] = c.output_dir;
  j["audit"] = c.audit;
  j["failure_policy"] = c.failure_policy == FailurePolicy::CountAsLoss ? "count_as_loss" : "exclude";
  j["se_grouping"] = c.se_grouping == SeGrouping::PerGame ? "per_game" : "per_target";
  return j;
}

std::uint64_t derive_seed(std::uint64_t base_seed, const NodeId& target, std::size_t run) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(target.level) << 56) ^ target.value);
  return splitmix64(h ^ static_cast<std::uint64_t>(run));
}

std::string transcript_file_name(const NodeId& target, std::size_t run) {
  return target.str() + "_run" + std::to_string(run) + ".jsonl";
}

namespace {

struct Agents {
  std::unique_ptr<Seeker> seeker;
  std::unique_ptr<Oracle> oracle;
  std::unique_ptr<Pruner> pruner;
};

Agents make_agents(const ExperimentConfig& cfg, const std::shared_ptr<const HypothesisGraph>& fresh) {
  auto limiter = std::make_shared<RequestLimiter>(cfg.max_inflight_requests);
  auto client = [&](EndpointConfig e) { return std::make_shared<const ChatClient>(std::move(e), limiter); };

  Agents a;
  switch (cfg.seeker.kind) {
    case AgentKind::Greedy: a.seeker = std::make_unique<GreedyHalvingSeeker>(fresh); break;
    case AgentKind::Random: a.seeker = std::make_unique<RandomSeeker>(fresh); break;
    default: {
      auto e = *cfg.seeker.endpoint;
      e.reasoning_enabled = cfg.reasoning_enabled;
      a.seeker = std::make_unique<LlmSeeker>(client(std::move(e)));
    }
  }
  if (cfg.oracle.kind == AgentKind::Llm) a.oracle = std::make_unique<LlmOracle>(client(*cfg.oracle.endpoint), fresh);
  else a.oracle = std::make_unique<RuleOracle>(fresh);
  if (cfg.pruner.kind == AgentKind::Llm) a.pruner = std::make_unique<LlmPruner>(client(*cfg.pruner.endpoint));
  else a.pruner = std::make_unique<RulePruner>();
  return a;
}

std::vector<NodeId> resolve_targets(const ExperimentConfig& cfg, const HypothesisGraph& graph) {
  if (cfg.targets.empty()) return {graph.city_leaves().begin(), graph.city_leaves().end()};
  std::vector<NodeId> out;
  for (const auto& t : cfg.targets) {
    if (auto id = NodeId::try_parse(t)) {
      if (id->level != Level::City || !graph.contains(*id)) {
        throw Error(Errc::ConfigError, "target " + t + " is not a city of the dataset");
      }
      out.push_back(*id);
      continue;
    }
    const auto hits = graph.find_by_name(Level::City, t);
    if (hits.size() != 1) {
      throw Error(Errc::ConfigError, "target name '" + t + "' matches " + std::to_string(hits.size()) + " cities");
    }
    out.push_back(hits.front());
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<CityRecord> records;
  try {
    records = load_csv(cfg.dataset_path);
    if (cfg.top_n) records = top_n_by_population(records, *cfg.top_n);
  } catch (const Error& e) {
    throw Error(Errc::DatasetError, e.what());
  }
  std::shared_ptr<const HypothesisGraph> fresh;
  try {
    fresh = std::make_shared<const HypothesisGraph>(HypothesisGraph::build(records));
  } catch (const Error& e) {
    throw Error(Errc::DatasetError, e.what());
  }

  const auto targets = resolve_targets(cfg, *fresh);
  const auto agents = make_agents(cfg, fresh);

  fs::path transcripts_dir;
  if (!cfg.output_dir.empty()) {
    transcripts_dir = fs::path(cfg.output_dir) / "transcripts";
    fs::create_directories(transcripts_dir);
    write_text(fs::path(cfg.output_dir) / "config.json", experiment_config_to_json(cfg).dump(2) + "\n");
  }

  ExperimentReport report;
  report.config = cfg;
  for (const auto& target : targets) {
    for (std::size_t run = 1; run <= cfg.runs_per_target; ++run) {
      GameSummary s;
      s.target = target;
      s.run = run;
      s.seed = derive_seed(cfg.base_seed, target, run);
      if (!cfg.output_dir.empty()) s.transcript_file = "transcripts/" + transcript_file_name(target, run);
      report.per_game.push_back(s);
    }
  }
  report.transcripts.resize(report.per_game.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= report.per_game.size()) return;
      try {
        auto& s = report.per_game[i];
        GameConfig gc{s.target, cfg.max_turns, cfg.observability, s.seed, cfg.audit};
        auto t = play_game(*agents.seeker, *agents.oracle, *agents.pruner, *fresh, gc);
        if (!transcripts_dir.empty()) write_text(fs::path(cfg.output_dir) / s.transcript_file, transcript_to_string(t));
        s.outcome = t.outcome;
        s.turns = t.game_metrics.turns;
        s.total_ig = t.game_metrics.total_ig;
        report.transcripts[i] = std::move(t);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(report.per_game.size());
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto n = std::min(cfg.parallelism, report.per_game.size());
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);

  summarize(report);

  if (!cfg.output_dir.empty()) {
    write_text(fs::path(cfg.output_dir) / "report.json", report_to_json(report).dump(2) + "\n");
    write_text(fs::path(cfg.output_dir) / "timeline.csv", export_timeline(report));
  }
  return report;
}

void summarize(ExperimentReport& report) {
  const auto& cfg = report.config;
  std::vector<GameMetrics> games;
  std::vector<std::size_t> groups;
  std::map<NodeId, std::size_t> group_index;
  report.failure_count = 0;
  report.fault_summary.clear();
  for (std::size_t i = 0; i < report.transcripts.size(); ++i) {
    const auto& t = report.transcripts[i];
    for (const auto& turn : t.turns) {
      for (const auto& f : turn.consistency_faults) ++report.fault_summary[std::string(fault_kind_name(f.kind))];
    }
    if (t.outcome == Outcome::AgentFailure) {
      ++report.failure_count;
      if (cfg.failure_policy == FailurePolicy::Exclude) continue;
    }
    games.push_back(t.game_metrics);
    groups.push_back(group_index.try_emplace(t.config.target, group_index.size()).first->second);
  }
  report.aggregate = games.empty() ? AggregateMetrics{} : aggregate(games, cfg.se_grouping, groups);
  report.timeline = ig_timeline(games, cfg.max_turns);
}

namespace {

json mean_se_json(const MeanSe& m) { return json{{"mean", m.mean}, {"se", m.se}}; }
MeanSe mean_se_from(const json& j) { return {j.at("mean").get<double>(), j.at("se").get<double>()}; }

}  // namespace

json report_to_json(const ExperimentReport& r) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["config"] = experiment_config_to_json(r.config);
  auto games = json::array();
  for (const auto& g : r.per_game) {
    games.push_back({{"target", g.target.str()},
                     {"run", g.run},
                     {"seed", g.seed},
                     {"transcript", g.transcript_file},
                     {"outcome", outcome_name(g.outcome)},
                     {"turns", g.turns},
                     {"total_ig", g.total_ig}});
  }
  j["per_game"] = std::move(games);
  j["aggregate"] = {{"win_rate", mean_se_json(r.aggregate.win_rate)},
                    {"avg_turns", mean_se_json(r.aggregate.avg_turns)},
                    {"ig_per_turn", mean_se_json(r.aggregate.ig_per_turn)},
                    {"total_ig", mean_se_json(r.aggregate.total_ig)},
                    {"n_games", r.aggregate.n_games}};
  auto timeline = json::array();
  for (const auto& p : r.timeline) {
    timeline.push_back({{"turn_index", p.turn_index},
                        {"mean_ig", p.n_games ? json(p.mean_ig) : json(nullptr)},
                        {"n_games", p.n_games}});
  }
  j["timeline"] = std::move(timeline);
  j["fault_summary"] = r.fault_summary;
  j["failure_count"] = r.failure_count;
  return j;
}

ExperimentReport report_from_json(const json& j) {
  try {
    ExperimentReport r;
    r.config = parse_experiment_config(j.at("config"));
    for (const auto& g : j.at("per_game")) {
      GameSummary s;
      s.target = NodeId::parse(g.at("target").get<std::string>());
      s.run = g.at("run").get<std::size_t>();
      s.seed = g.at("seed").get<std::uint64_t>();
      s.transcript_file = g.at("transcript").get<std::string>();
      const auto outcome = parse_outcome(g.at("outcome").get<std::string>());
      if (!outcome) throw Error(Errc::ConfigError, "bad outcome in report");
      s.outcome = *outcome;
      s.turns = g.at("turns").get<std::size_t>();
      s.total_ig = g.at("total_ig").get<double>();
      r.per_game.push_back(s);
    }
    const auto& a = j.at("aggregate");
    r.aggregate.win_rate = mean_se_from(a.at("win_rate"));
    r.aggregate.avg_turns = mean_se_from(a.at("avg_turns"));
    r.aggregate.ig_per_turn = mean_se_from(a.at("ig_per_turn"));
    r.aggregate.total_ig = mean_se_from(a.at("total_ig"));
    r.aggregate.n_games = a.at("n_games").get<std::size_t>();
    for (const auto& p : j.at("timeline")) {
      TimelinePoint pt;
      pt.turn_index = p.at("turn_index").get<std::size_t>();
      pt.n_games = p.at("n_games").get<std::size_t>();
      pt.mean_ig = p.at("mean_ig").is_null() ? 0.0 : p.at("mean_ig").get<double>();
      r.timeline.push_back(pt);
    }
    r.fault_summary = j.at("fault_summary").get<std::map<std::string, std::size_t>>();
    r.failure_count = j.at("failure_count").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, std::string("malformed report: ") + e.what());
  }
}

ExperimentReport load_report(const std::string& path) {
  const auto j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ConfigError, path + " is not valid JSON");
  return report_from_json(j);
}

std::string format_mean_se(const MeanSe& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", m.mean, m.se);
  return buf;
}

std::string render_results_table(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "| Model | Obs. | CoT | Win Rate | Avg Turns | IG/Turn | Total IG |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    out << "| " << r.config.label << " | " << observability_name(r.config.observability) << " | "
        << (r.config.reasoning_enabled ? "Yes" : "No") << " | " << format_mean_se(r.aggregate.win_rate) << " | "
        << format_mean_se(r.aggregate.avg_turns) << " | " << format_mean_se(r.aggregate.ig_per_turn) << " | "
        << format_mean_se(r.aggregate.total_ig) << " |\n";
  }
  return out.str();
}

std::string export_timeline(const ExperimentReport& report) {
  std::ostringstream out;
  out << "turn_index,mean_ig,n_games\n";
  for (const auto& p : report.timeline) {
    out << p.turn_index << ',';
    if (p.n_games > 0) out << json(p.mean_ig).dump();
    out << ',' << p.n_games << '\n';
  }
  return out.str();
}

}  // namespace infoseek
