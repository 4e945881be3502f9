#include "infoseek/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infoseek/dataset.hpp"
#include "infoseek/engine.hpp"
#include "infoseek/error.hpp"
#include "infoseek/experiment.hpp"
#include "infoseek/question_parser.hpp"
#include "infoseek/trace_analysis.hpp"

namespace infoseek {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::Transport:
    case Errc::ProviderError:
    case Errc::EmptyCompletion:
    case Errc::MalformedResponse:
    case Errc::NonCityIdInResponse:
    case Errc::AgentFailure:
    case Errc::ExtractorFailure:
      return kExitRuntime;
    default:
      return kExitValidation;
  }
}

std::string bits(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

HypothesisGraph load_graph(const std::string& csv, std::optional<std::size_t> top_n) {
  auto records = load_csv(csv);
  if (top_n) records = top_n_by_population(records, *top_n);
  return HypothesisGraph::build(records);
}

NodeId resolve_city(const HypothesisGraph& graph, const std::string& text) {
  if (auto id = NodeId::try_parse(text)) {
    if (id->level == Level::City && graph.contains(*id)) return *id;
    throw Error(Errc::InvalidTarget, text + " is not a city of the dataset");
  }
  const auto hits = graph.find_by_name(Level::City, text);
  if (hits.empty()) throw Error(Errc::InvalidTarget, "no city named '" + text + "'");
  if (hits.size() > 1) throw Error(Errc::InvalidTarget, "'" + text + "' names several cities; use a city id");
  return hits.front();
}

// Reads questions from the terminal. Lines the parser cannot map are answered
// with a hint and do not use up a turn.
class HumanSeeker final : public Seeker {
 public:
  HumanSeeker(std::shared_ptr<const HypothesisGraph> fresh, std::istream& in, std::ostream& out)
      : fresh_(std::move(fresh)), in_(in), out_(out) {}

  SeekerOutput ask(const SeekerContext& ctx, Rng&, AuditLog*) const override {
    if (ctx.graph_text) out_ << "\n" << *ctx.graph_text << "\n";
    std::string line;
    while (true) {
      out_ << "Turn " << ctx.turn_index << "> " << std::flush;
      if (!std::getline(in_, line)) throw Error(Errc::AgentFailure, "input closed");
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (auto pred = parse_question(line, *fresh_)) return {line, std::move(pred), std::nullopt};
      out_ << "Sorry, I can only answer questions about region, subregion, country, state or city, e.g.\n"
           << "  Is the target city in Asia?\n"
           << "  Is the target city in Japan or China?\n"
           << "  Is the target city Tokyo?\n";
    }
  }

 private:
  std::shared_ptr<const HypothesisGraph> fresh_;
  std::istream& in_;
  std::ostream& out_;
};

std::vector<std::string> transcript_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::IoError, dir + " is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + path);
  f << text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Twenty-questions style benchmark for information-seeking agents", "infoseek"};
  app.require_subcommand(1);

  std::string csv, config_path, transcript_path, dir, report_path, label = "model", details_path, extractor_endpoint;
  std::string target, transcript_out, output_dir;
  std::vector<std::string> reports;
  std::optional<std::size_t> top_n, parallelism;
  std::uint64_t seed = 0;
  bool random_target = false, fo = false, po = false;

  auto* validate = app.add_subcommand("validate-data", "Load a city CSV, build the taxonomy and print its manifest");
  validate->add_option("csv", csv, "City CSV")->required();
  validate->add_option("--top-n", top_n, "Keep the N most populous cities");

  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "Experiment config")->required();
  run->add_option("--output-dir", output_dir, "Override the config's output_dir");
  run->add_option("--parallelism", parallelism, "Override the config's parallelism");

  auto* replay_cmd = app.add_subcommand("replay", "Recompute a transcript's metrics and report divergences");
  replay_cmd->add_option("transcript", transcript_path, "Transcript (.jsonl)")->required();
  replay_cmd->add_option("csv", csv, "City CSV the game was played on")->required();
  replay_cmd->add_option("--top-n", top_n, "Keep the N most populous cities");

  auto* analyze = app.add_subcommand("analyze", "Decision-quality analysis of seeker reasoning traces");
  analyze->add_option("transcripts", dir, "Directory searched recursively for .jsonl transcripts")->required();
  analyze->add_option("csv", csv, "City CSV the games were played on")->required();
  analyze->add_option("--top-n", top_n, "Keep the N most populous cities");
  analyze->add_option("--label", label, "Row label");
  analyze->add_option("--details", details_path, "Write one CSV row per analyzed turn");
  analyze->add_option("--extractor-endpoint", extractor_endpoint,
                      "Endpoint JSON for the LLM candidate extractor (default: heuristic extractor)");

  auto* report = app.add_subcommand("report", "Merge report.json files into one results table");
  report->add_option("reports", reports, "report.json files")->required();

  auto* timeline = app.add_subcommand("timeline", "Per-turn IG timeline of a report as CSV");
  timeline->add_option("report", report_path, "report.json")->required();

  auto* play = app.add_subcommand("play", "Play as the seeker against the rule oracle and pruner");
  play->add_option("csv", csv, "City CSV")->required();
  play->add_option("--top-n", top_n, "Keep the N most populous cities");
  auto* target_opt = play->add_option("--target", target, "Target city name or id");
  auto* random_opt = play->add_flag("--random", random_target, "Draw the target at random");
  play->add_option("--seed", seed, "Seed for --random");
  auto* fo_opt = play->add_flag("--fo", fo, "Show the hypothesis space every turn");
  play->add_flag("--po", po, "Show only the dialogue (default)")->excludes(fo_opt);
  play->add_option("--transcript", transcript_out, "Write the game transcript here");
  target_opt->excludes(random_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*validate) {
      const auto m = inspect_dataset(csv, top_n);
      out << "source: " << m.source_path << "\n"
          << "records: " << m.record_count << "\n"
          << "levels: " << m.levels << "\n"
          << "nodes: " << m.node_count << "\n"
          << "content_sha256: " << m.content_hash << "\n"
          << "graph_fingerprint: " << m.graph_fingerprint << "\n";
      if (m.top_n) out << "top_n: " << *m.top_n << "\n";
      return kExitOk;
    }

    if (*run) {
      auto cfg = load_experiment_config(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      if (parallelism) cfg.parallelism = *parallelism;
      cfg.validate();
      const auto r = run_experiment(cfg);
      out << render_results_table(std::span(&r, 1));
      if (r.failure_count) err << r.failure_count << " game(s) ended in agent failure\n";
      for (const auto& [kind, n] : r.fault_summary) err << "consistency faults " << kind << ": " << n << "\n";
      return kExitOk;
    }

    if (*replay_cmd) {
      const auto graph = load_graph(csv, top_n);
      const auto t = load_transcript(transcript_path);
      const auto m = replay(t, graph);
      out << "target: " << t.config.target.str() << "\n"
          << "outcome: " << outcome_name(t.outcome) << "\n"
          << "turns: " << m.turns << "\n"
          << "total_ig: " << bits(m.total_ig) << "\n"
          << "ig_per_turn: " << bits(m.ig_per_turn) << "\n"
          << "replay: ok\n";
      return kExitOk;
    }

    if (*analyze) {
      const auto graph = load_graph(csv, top_n);
      std::vector<GameTranscript> transcripts;
      for (const auto& f : transcript_files(dir)) transcripts.push_back(load_transcript(f));
      std::unique_ptr<CandidateExtractor> extractor;
      if (extractor_endpoint.empty()) {
        extractor = std::make_unique<HeuristicExtractor>();
      } else {
        const auto j = nlohmann::json::parse(read_file(extractor_endpoint), nullptr, false);
        if (j.is_discarded()) throw Error(Errc::ConfigError, extractor_endpoint + " is not valid JSON");
        extractor = std::make_unique<LlmExtractor>(std::make_shared<const ChatClient>(j.get<EndpointConfig>()));
      }
      const auto r = decision_quality(transcripts, graph, *extractor);
      out << render_decision_quality_table(label, r);
      out << "games: " << transcripts.size() << ", games analyzed: " << r.games_analyzed
          << ", turns analyzed: " << r.turns_analyzed << ", turns skipped: " << r.turns_skipped
          << ", unparseable candidates: " << r.unparseable_total << "\n";
      if (r.empty()) out << "no analyzable reasoning traces found\n";
      if (!details_path.empty()) write_file(details_path, decision_details_csv(r));
      return kExitOk;
    }

    if (*report) {
      std::vector<ExperimentReport> loaded;
      for (const auto& p : reports) loaded.push_back(load_report(p));
      out << render_results_table(loaded);
      return kExitOk;
    }

    if (*timeline) {
      out << export_timeline(load_report(report_path));
      return kExitOk;
    }

    if (*play) {
      auto fresh = std::make_shared<const HypothesisGraph>(load_graph(csv, top_n));
      NodeId target_id;
      if (!target.empty()) {
        target_id = resolve_city(*fresh, target);
      } else {
        Rng rng(seed);
        const auto& cities = fresh->city_leaves();
        std::uniform_int_distribution<std::size_t> pick(0, cities.size() - 1);
        target_id = *std::next(cities.begin(), static_cast<std::ptrdiff_t>(pick(rng)));
      }
      GameConfig cfg;
      cfg.target = target_id;
      cfg.observability = fo ? Observability::FO : Observability::PO;
      cfg.rng_seed = seed;

      const HumanSeeker seeker(fresh, in, out);
      const RuleOracle oracle(fresh);
      const RulePruner pruner;
      out << "Find the target among " << fresh->active_count() << " cities in at most " << cfg.max_turns
          << " yes/no questions (" << bits(entropy(fresh->active_count())) << " bits of uncertainty).\n";
      auto observer = [&](const TurnRecord& t, const HypothesisGraph&) {
        out << "Answer: " << t.oracle_answer << "\n"
            << "IG: " << bits(t.metrics.ig) << " bits (" << t.n_before << " -> " << t.n_after
            << " candidates)\n";
      };
      const auto t = play_game(seeker, oracle, pruner, *fresh, cfg, observer);
      const auto& name = fresh->node(target_id).name;
      switch (t.outcome) {
        case Outcome::Win:
          out << "Correct, the target was " << name << ". Turns: " << t.game_metrics.turns
              << ", total IG: " << bits(t.game_metrics.total_ig) << " bits.\n";
          break;
        case Outcome::TurnLimit:
          out << "Out of turns. The target was " << name << ".\n";
          break;
        case Outcome::AgentFailure:
          out << "Game abandoned. The target was " << name << ".\n";
          break;
      }
      if (!transcript_out.empty()) write_file(transcript_out, transcript_to_string(t));
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace infoseek
