#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "alternating_seeker.hpp"
#include "infoseek/cli.hpp"
#include "infoseek/dataset.hpp"
#include "infoseek/engine.hpp"
#include "test_support.hpp"

using namespace infoseek;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "infoseek");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("validate-data") {
  const auto r = cli({"validate-data", testing::bundled_csv()});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "records: 40\n"));
  CHECK(contains(r.out, "levels: 5\n"));
  CHECK(contains(r.out, "nodes: 119\n"));
  CHECK(contains(r.out, "graph_fingerprint: " + testing::bundled_graph()->fingerprint()));

  const auto top = cli({"validate-data", testing::bundled_csv(), "--top-n", "5"});
  CHECK(top.code == 0);
  CHECK(contains(top.out, "records: 5\n"));
  CHECK(contains(top.out, "top_n: 5\n"));

  testing::TempDir dir;
  std::ofstream(dir / "bad.csv") << "city_id,city_name\n1,Tokyo\n";
  const auto bad = cli({"validate-data", dir / "bad.csv"});
  CHECK(bad.code == 1);
  CHECK(contains(bad.err, "missing column"));
  CHECK(cli({"validate-data", dir / "absent.csv"}).code == 1);
}

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"play", testing::bundled_csv(), "--fo", "--po"}).code == 1);
}

TEST_CASE("play a one-question game") {
  testing::TempDir dir;
  const auto r = cli({"play", testing::bundled_csv(), "--target", "Tokyo", "--transcript", dir / "game.jsonl"},
                     "Is the target city Tokyo?\n");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "Find the target among 40 cities in at most 30 yes/no questions (5.3219 bits"));
  CHECK(contains(r.out, "Turn 1> "));
  CHECK(contains(r.out, "Answer: Yes\nIG: 5.3219 bits (40 -> 1 candidates)"));
  CHECK(contains(r.out, "Correct, the target was Tokyo. Turns: 1, total IG: 5.3219 bits."));

  const auto replayed = cli({"replay", dir / "game.jsonl", testing::bundled_csv()});
  CHECK(replayed.code == 0);
  CHECK(contains(replayed.out, "outcome: win\n"));
  CHECK(contains(replayed.out, "total_ig: 5.3219\n"));
  CHECK(contains(replayed.out, "replay: ok"));

  const auto other = cli({"replay", dir / "game.jsonl", testing::bundled_csv(), "--top-n", "10"});
  CHECK(other.code == 1);
}

TEST_CASE("play re-prompts on questions it cannot map") {
  const auto r = cli({"play", testing::bundled_csv(), "--target", "Lima", "--fo"},
                     "Is it sunny there?\nIs the target city in South America?\n");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "Active cities: 40/40"));
  CHECK(contains(r.out, "Is the target city in Asia?"));
  CHECK(contains(r.out, "Answer: Yes\n"));
  CHECK(contains(r.out, "Active cities: "));
  CHECK(contains(r.out, "Game abandoned. The target was Lima."));
}

TEST_CASE("play rejects unknown targets") {
  const auto r = cli({"play", testing::bundled_csv(), "--target", "Atlantis"});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "Atlantis"));
}

TEST_CASE("run, report and timeline") {
  testing::TempDir dir;
  nlohmann::json cfg{{"schema_version", 1},     {"label", "Greedy"},   {"dataset_path", testing::bundled_csv()},
                     {"runs_per_target", 1},    {"targets", {"Tokyo", "Paris", "Lima"}},
                     {"observability", "FO"},   {"output_dir", dir / "out"}};
  std::ofstream(dir / "cfg.json") << cfg.dump(2);
  const auto r = cli({"run", dir / "cfg.json", "--parallelism", "2"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "| Greedy | FO | No | 1.00 ± 0.00 |"));

  const auto rep = cli({"report", dir / "out/report.json", dir / "out/report.json"});
  CHECK(rep.code == 0);
  CHECK(std::count(rep.out.begin(), rep.out.end(), '\n') == 4);

  const auto tl = cli({"timeline", dir / "out/report.json"});
  CHECK(tl.code == 0);
  CHECK(tl.out.starts_with("turn_index,mean_ig,n_games\n"));

  const auto moved = cli({"run", dir / "cfg.json", "--output-dir", dir / "elsewhere"});
  CHECK(moved.code == 0);
  CHECK(std::filesystem::exists(dir / "elsewhere/report.json"));

  std::ofstream(dir / "broken.json") << R"({"schema_version": 1, "dataset_path": "x.csv", "runs_per_target": 0})";
  CHECK(cli({"run", dir / "broken.json"}).code == 1);

  auto llm = cfg;
  llm["seeker"] = {{"kind", "llm"},
                   {"endpoint", {{"base_url", "http://127.0.0.1:1/v1"}, {"model_name", "m"}, {"max_retries", 0}}}};
  llm["output_dir"] = "";
  std::ofstream(dir / "llm.json") << llm.dump();
  const auto failed = cli({"run", dir / "llm.json"});
  CHECK(failed.code == 0);
  CHECK(contains(failed.err, "3 game(s) ended in agent failure"));
}

TEST_CASE("analyze") {
  testing::TempDir dir;
  const auto g = testing::small_graph();
  std::ofstream(dir / "small.csv") << write_csv(testing::small_records());
  const testing::AlternatingSeeker seeker(g, {"Asia", "Europe"});
  const RuleOracle oracle(g);
  const RulePruner pruner;
  std::filesystem::create_directories(dir / "games/nested");
  for (std::uint64_t id = 1; id <= 4; ++id) {
    GameConfig cfg;
    cfg.target = testing::city(id);
    cfg.max_turns = 4;
    std::ofstream(dir / ("games/nested/g" + std::to_string(id) + ".jsonl"))
        << transcript_to_string(play_game(seeker, oracle, pruner, *g, cfg));
  }
  const auto r = cli({"analyze", dir / "games", dir / "small.csv", "--label", "Alt", "--details", dir / "d.csv"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "| Alt | 0.50 ± 0.00 | 0.50 ± 0.00 | 1.00 ± 0.00 | 2.00 ± 0.00 |"));
  CHECK(contains(r.out, "games: 4, games analyzed: 4, turns analyzed: 16"));
  CHECK(std::filesystem::exists(dir / "d.csv"));

  std::filesystem::create_directories(dir / "empty");
  const auto none = cli({"analyze", dir / "empty", dir / "small.csv"});
  CHECK(none.code == 0);
  CHECK(contains(none.out, "no analyzable reasoning traces found"));
}
