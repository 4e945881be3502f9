#include <doctest.h>

#include <cmath>

#include "alternating_seeker.hpp"
#include "infoseek/engine.hpp"
#include "infoseek/error.hpp"
#include "infoseek/prompts.hpp"
#include "infoseek/trace_analysis.hpp"
#include "mock_server.hpp"
#include "test_support.hpp"

using namespace infoseek;

namespace {

NodeId tokyo() { return testing::bundled_graph()->find_by_name(Level::City, "Tokyo").front(); }

std::vector<GameTranscript> alternating_games(std::size_t max_turns) {
  const auto g = testing::small_graph();
  const testing::AlternatingSeeker seeker(g, {"Asia", "Europe"});
  const RuleOracle oracle(g);
  const RulePruner pruner;
  std::vector<GameTranscript> out;
  for (const auto& target : g->city_leaves()) {
    GameConfig cfg;
    cfg.target = target;
    cfg.max_turns = max_turns;
    out.push_back(play_game(seeker, oracle, pruner, *g, cfg));
  }
  return out;
}

}  // namespace

TEST_CASE("heuristic extraction finds yes/no questions") {
  const HeuristicExtractor ex;
  const auto qs = ex.extract(
      "Options: \"Is the target city in Asia?\" or \"Is it Tokyo?\". Hmm, what would that tell me?\n"
      "- Does the city lie in Europe? Probably not useful.\nI'll go with: is the target in Japan?");
  CHECK(qs == std::vector<std::string>{"Is the target city in Asia?", "Is it Tokyo?", "Does the city lie in Europe?",
                                       "is the target in Japan?"});
  CHECK(ex.extract("No questions here. Just thoughts.").empty());
  CHECK(ex.extract("").empty());
}

TEST_CASE("candidate lists are deduplicated and include the executed question") {
  const HeuristicExtractor ex;
  const auto qs = extract_candidates("\"Is it in Asia?\" or \"is it in  asia?\" or \"Is it Tokyo?\"", ex, "Is it Lima?");
  CHECK(qs == std::vector<std::string>{"Is it in Asia?", "Is it Tokyo?", "Is it Lima?"});
  CHECK(extract_candidates("Is it Tokyo?", ex, "is it tokyo?").size() == 1);
  CHECK(extract_candidates("", ex, "Is it Tokyo?") == std::vector<std::string>{"Is it Tokyo?"});
}

TEST_CASE("scoring one turn") {
  const auto& g = *testing::bundled_graph();
  const auto parser = default_question_parser();
  std::vector<std::string> half;
  for (const auto& c : g.city_leaves()) {
    if (half.size() < 20) half.push_back(g.node(c).name);
  }
  const auto halver = Predicate::city_in(half).render();
  const double asia = std::log2(40.0 / 27.0);

  SUBCASE("a lopsided choice next to a perfect split") {
    const std::vector<std::string> cands{"Is the target city in Asia?", "Is the target city in Europe?", halver};
    const auto d = score_turn(cands, g, tokyo(), parser, "Is the target city in Asia?", std::nullopt, asia);
    REQUIRE(d);
    CHECK(d->candidates.size() == 3);
    CHECK(d->candidates[0].chosen);
    CHECK(std::fabs(d->chosen_ig - asia) < 1e-12);
    CHECK(std::fabs(d->candidates[1].counterfactual_ig.value() - std::log2(40.0 / 37.0)) < 1e-12);
    CHECK(std::fabs(d->optimal_ig - 1.0) < 1e-12);
    CHECK_FALSE(d->is_optimal);
    CHECK(d->unparseable_count == 0);
  }
  SUBCASE("the best candidate was chosen") {
    const std::vector<std::string> cands{"Is the target city in Asia?", halver};
    const auto d = score_turn(cands, g, tokyo(), parser, halver, std::nullopt, 1.0);
    REQUIRE(d);
    CHECK(d->is_optimal);
    CHECK(d->optimal_ig == d->chosen_ig);
  }
  SUBCASE("unparseable candidates are counted but not scored") {
    const std::vector<std::string> cands{"Is it coastal?", "Is the target city in Asia?"};
    const auto d = score_turn(cands, g, tokyo(), parser, "Is the target city in Asia?", std::nullopt, asia);
    REQUIRE(d);
    CHECK(d->unparseable_count == 1);
    CHECK(d->candidates.size() == 2);
    CHECK_FALSE(d->candidates[0].counterfactual_ig);
    CHECK(d->is_optimal);
  }
  SUBCASE("an unparseable executed question falls back to the realized gain") {
    const std::vector<std::string> cands{"Is it coastal?", "Is the target city in Europe?"};
    const auto d = score_turn(cands, g, tokyo(), parser, "Is it coastal?", std::nullopt, 0.0);
    REQUIRE(d);
    CHECK(d->chosen_ig_realized);
    CHECK(d->chosen_ig == 0.0);
    CHECK(d->optimal_ig == doctest::Approx(std::log2(40.0 / 37.0)));
    CHECK_FALSE(d->is_optimal);
  }
  SUBCASE("the executed question is added when the trace missed it") {
    const std::vector<std::string> cands{"Is the target city in Europe?"};
    const auto d = score_turn(cands, g, tokyo(), parser, "Is the target city Tokyo?",
                              Predicate::city_guess("Tokyo"), std::log2(40.0));
    REQUIRE(d);
    CHECK(d->candidates.size() == 2);
    CHECK(d->candidates.back().chosen);
    CHECK(d->is_optimal);
    CHECK(std::fabs(d->optimal_ig - std::log2(40.0)) < 1e-12);
  }
  SUBCASE("nothing scorable") {
    const std::vector<std::string> cands{"Is it coastal?"};
    CHECK_FALSE(score_turn(cands, g, tokyo(), parser, "Is it coastal?", std::nullopt, 0.0).has_value());
  }
}

TEST_CASE("alternating good and useless questions score one half") {
  const auto games = alternating_games(4);
  REQUIRE(games.size() == 8);
  for (const auto& t : games) {
    REQUIRE(t.turns.size() == 4);
    CHECK(t.turns[0].n_after == 4);
    CHECK(t.turns[1].n_after == 4);
    CHECK(t.turns[3].n_after == 2);
  }
  const HeuristicExtractor ex;
  const auto r = decision_quality(games, *testing::small_graph(), ex);
  CHECK(r.games_analyzed == 8);
  CHECK(r.turns_analyzed == 32);
  CHECK(r.turns_skipped == 0);
  CHECK(r.avg_optimal_rate.mean == doctest::Approx(0.5));
  CHECK(r.avg_optimal_rate.se == doctest::Approx(0.0));
  CHECK(r.avg_chosen_ig.mean == doctest::Approx(0.5));
  CHECK(r.avg_optimal_ig.mean == doctest::Approx(1.0));
  CHECK(r.avg_questions_per_turn.mean == doctest::Approx(2.0));

  const auto table = render_decision_quality_table("Alternating", r);
  CHECK(table.find("| Model | Avg Optimal Rate | Avg Chosen IG | Avg Optimal IG | Avg Questions/Turn |") !=
        std::string::npos);
  CHECK(table.find("| Alternating | 0.50 ± 0.00 | 0.50 ± 0.00 | 1.00 ± 0.00 | 2.00 ± 0.00 |") != std::string::npos);

  const auto csv = decision_details_csv(r);
  CHECK(csv.starts_with("target,turn_index,candidates,unparseable,chosen_ig,optimal_ig,is_optimal,chosen_ig_source\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 33);
}

TEST_CASE("transcripts without traces give an empty report") {
  const auto g = testing::small_graph();
  const GreedyHalvingSeeker seeker(g);
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = testing::city(6);
  const std::vector<GameTranscript> games{play_game(seeker, oracle, pruner, *g, cfg)};
  const auto r = decision_quality(games, *g, HeuristicExtractor{});
  CHECK(r.empty());
  CHECK(r.games_analyzed == 0);
  CHECK(r.turns_skipped == games[0].turns.size());
}

TEST_CASE("foreign transcripts are rejected") {
  const auto games = alternating_games(2);
  try {
    (void)decision_quality(games, *testing::bundled_graph(), HeuristicExtractor{});
    FAIL("expected a fingerprint mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FingerprintMismatch);
  }
  auto tampered = games;
  tampered[0].turns[1].n_before = 7;
  CHECK_THROWS_AS(decision_quality(tampered, *testing::small_graph(), HeuristicExtractor{}), Error);
}

TEST_CASE("LLM extractor") {
  testing::MockServer server([](const nlohmann::json& req, httplib::Response& res) {
    const auto user = req.at("messages").at(1).at("content").get<std::string>();
    if (user == "bad") testing::reply(res, "I found none.");
    else testing::reply(res, "Here you go:\n[\"Is the target city in Asia?\", \"Is it Tokyo?\"]");
  });
  EndpointConfig e;
  e.base_url = server.base_url();
  e.model_name = "extractor";
  const LlmExtractor ex(std::make_shared<const ChatClient>(e));
  CHECK(ex.extract("some trace") == std::vector<std::string>{"Is the target city in Asia?", "Is it Tokyo?"});
  CHECK(server.requests()[0].at("messages").at(0).at("content") == candidate_extraction_prompt());
  try {
    (void)ex.extract("bad");
    FAIL("expected ExtractorFailure");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::ExtractorFailure);
  }
}
