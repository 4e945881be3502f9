#include <doctest.h>

#include <cmath>
#include <sstream>

#include "infoseek/engine.hpp"
#include "infoseek/error.hpp"
#include "test_support.hpp"

using namespace infoseek;
using testing::city;

namespace {

const double kLog40 = std::log2(40.0);

NodeId named(const std::string& name) { return testing::bundled_graph()->find_by_name(Level::City, name).front(); }

// Proposes a fixed id list every turn, regardless of the question.
class FixedPruner final : public Pruner {
 public:
  explicit FixedPruner(std::vector<NodeId> ids) : ids_(std::move(ids)) {}
  PrunerOutput prune_decision(const SeekerOutput&, std::string_view, const HypothesisGraph&, std::size_t,
                              AuditLog*) const override {
    return {"fixed", ids_};
  }

 private:
  std::vector<NodeId> ids_;
};

class ThrowingOracle final : public Oracle {
 public:
  OracleOutput answer(const SeekerOutput&, const NodeId&, std::span<const Exchange>, AuditLog*) const override {
    throw Error(Errc::AgentFailure, "backend down");
  }
};

class ContextRecorder final : public Seeker {
 public:
  mutable std::vector<SeekerContext> seen;
  SeekerOutput ask(const SeekerContext& ctx, Rng&, AuditLog*) const override {
    seen.push_back(ctx);
    return {"Is it nice?", std::nullopt, std::nullopt};
  }
};

}  // namespace

TEST_CASE("greedy rule game wins with the full information") {
  const auto g = testing::bundled_graph();
  const GreedyHalvingSeeker seeker(g);
  const RuleOracle oracle(g);
  const RulePruner pruner;
  for (const auto& target : g->city_leaves()) {
    GameConfig cfg;
    cfg.target = target;
    const auto t = play_game(seeker, oracle, pruner, *g, cfg);
    CHECK(t.outcome == Outcome::Win);
    CHECK(t.game_metrics.win);
    CHECK(std::fabs(t.game_metrics.total_ig - kLog40) < 1e-9);
    CHECK(t.turns.back().game_over_flag);
    CHECK(t.turns.back().n_after == 1);
    CHECK(t.turns.back().metrics.h_after == 0.0);
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
      CHECK(t.turns[i].turn_index == i + 1);
      CHECK(t.turns[i].consistency_faults.empty());
      if (i > 0) CHECK(t.turns[i].metrics.h_before == t.turns[i - 1].metrics.h_after);
    }
    CHECK(t.game_metrics.turns == testing::brute_force_greedy_turns(g->records(), target.value));
  }
}

TEST_CASE("unparseable questions never prune") {
  const auto g = testing::bundled_graph();
  const ScriptedSeeker seeker({{"Is it a nice place to live?", std::nullopt, std::nullopt}});
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Lima");
  const auto t = play_game(seeker, oracle, pruner, *g, cfg);
  CHECK(t.outcome == Outcome::TurnLimit);
  CHECK(t.turns.size() == 30);
  CHECK(t.game_metrics.turns == 30);
  CHECK(t.game_metrics.total_ig == 0.0);
  for (const auto& r : t.turns) CHECK(r.metrics.ig == 0.0);
}

TEST_CASE("guessing the target on turn one") {
  const auto g = testing::bundled_graph();
  const ScriptedSeeker seeker({SeekerOutput::from(Predicate::city_guess("Tokyo"))});
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Tokyo");
  const auto t = play_game(seeker, oracle, pruner, *g, cfg);
  CHECK(t.outcome == Outcome::Win);
  REQUIRE(t.turns.size() == 1);
  CHECK(std::fabs(t.turns[0].metrics.ig - kLog40) < 1e-12);
  CHECK(t.turns[0].pruned_ids.size() == 39);
  CHECK(t.game_metrics.ig_per_turn == doctest::Approx(kLog40));
}

TEST_CASE("max_turns caps the game") {
  const auto g = testing::bundled_graph();
  const ScriptedSeeker seeker({SeekerOutput::from(Predicate::city_guess("Osaka"))});
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Tokyo");
  cfg.max_turns = 4;
  const auto t = play_game(seeker, oracle, pruner, *g, cfg);
  CHECK(t.outcome == Outcome::TurnLimit);
  CHECK(t.turns.size() == 4);
  CHECK(t.game_metrics.turns == 4);
  CHECK(t.turns[0].metrics.ig == doctest::Approx(std::log2(40.0 / 39.0)));
  CHECK(t.turns[1].metrics.ig == 0.0);
  // Osaka is already gone after turn 1; the rule pruner proposes nothing more.
  CHECK(t.turns[1].consistency_faults.empty());
}

TEST_CASE("invalid targets are rejected") {
  const auto g = testing::bundled_graph();
  const ScriptedSeeker seeker({SeekerOutput::from(Predicate::city_guess("Tokyo"))});
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = city(1);
  CHECK_THROWS_AS(play_game(seeker, oracle, pruner, *g, cfg), Error);
  cfg.target = NodeId{Level::Country, 109};
  CHECK_THROWS_AS(play_game(seeker, oracle, pruner, *g, cfg), Error);
}

TEST_CASE("faulty prunes are filtered and tagged") {
  const auto g = testing::bundled_graph();
  const auto tokyo = named("Tokyo");
  const auto osaka = named("Osaka");
  const auto lima = named("Lima");
  const ScriptedSeeker seeker({SeekerOutput::from(Predicate::attribute_in(Level::Region, {"Asia"}))});
  const RuleOracle oracle(g);
  const FixedPruner pruner({osaka, osaka, tokyo, NodeId{Level::Country, 109}, city(5), lima});
  GameConfig cfg;
  cfg.target = tokyo;
  cfg.max_turns = 2;
  const auto t = play_game(seeker, oracle, pruner, *g, cfg);
  REQUIRE(t.turns.size() == 2);
  const auto& first = t.turns[0];
  CHECK(std::set<NodeId>(first.pruned_ids.begin(), first.pruned_ids.end()) == std::set<NodeId>{osaka, lima});
  CHECK(first.n_after == 38);
  const std::vector<ConsistencyFault> turn1 = {{FaultKind::DuplicateId, osaka.str()},
                                               {FaultKind::TargetPruned, tokyo.str()},
                                               {FaultKind::NonCityId, "country:109"},
                                               {FaultKind::UnknownId, "city:5"}};
  CHECK(first.consistency_faults == turn1);
  const auto& second = t.turns[1];
  CHECK(second.pruned_ids.empty());
  CHECK(second.metrics.ig == 0.0);
  CHECK(second.consistency_faults.front() == ConsistencyFault{FaultKind::AlreadyPruned, osaka.str()});
  CHECK(second.consistency_faults.back() == ConsistencyFault{FaultKind::AlreadyPruned, lima.str()});
  CHECK(second.consistency_faults.size() == 6);
}

TEST_CASE("fault tags round-trip") {
  for (auto kind : {FaultKind::UnknownId, FaultKind::NonCityId, FaultKind::AlreadyPruned, FaultKind::TargetPruned,
                    FaultKind::WouldEmptySpace, FaultKind::DuplicateId}) {
    const ConsistencyFault f{kind, "city:7"};
    CHECK(ConsistencyFault::parse(f.tag()) == f);
  }
  CHECK(ConsistencyFault{FaultKind::TargetPruned, "city:7"}.tag() == "target_pruned:city:7");
  CHECK_THROWS_AS(ConsistencyFault::parse("bogus:city:7"), Error);
}

TEST_CASE("agent errors end the game as a failure") {
  const auto g = testing::bundled_graph();
  const GreedyHalvingSeeker seeker(g);
  const ThrowingOracle oracle;
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Tokyo");
  const auto t = play_game(seeker, oracle, pruner, *g, cfg);
  CHECK(t.outcome == Outcome::AgentFailure);
  REQUIRE(t.failure);
  CHECK(t.failure->find("backend down") != std::string::npos);
  CHECK(t.turns.empty());
  CHECK(t.game_metrics.turns == 30);
  CHECK_FALSE(t.game_metrics.win);
}

TEST_CASE("seeker context follows observability") {
  const auto g = testing::small_graph();
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = city(1);
  cfg.max_turns = 3;

  ContextRecorder po;
  (void)play_game(po, oracle, pruner, *g, cfg);
  REQUIRE(po.seen.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK_FALSE(po.seen[i].graph_text);
    CHECK(po.seen[i].turn_index == i + 1);
    CHECK(po.seen[i].history.size() == i);
  }

  cfg.observability = Observability::FO;
  ContextRecorder fo;
  (void)play_game(fo, oracle, pruner, *g, cfg);
  REQUIRE(fo.seen.size() == 3);
  REQUIRE(fo.seen[0].graph_text);
  CHECK(*fo.seen[0].graph_text == g->serialize_state());
}

TEST_CASE("the caller's graph is left untouched") {
  auto g = *testing::bundled_graph();
  g.prune({named("Lima")});
  const GreedyHalvingSeeker seeker(testing::bundled_graph());
  const RuleOracle oracle(testing::bundled_graph());
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Lima");
  const auto t = play_game(seeker, oracle, pruner, g, cfg);
  CHECK(t.n_initial == 40);
  CHECK(t.outcome == Outcome::Win);
  CHECK(g.active_count() == 39);
}

TEST_CASE("transcripts round-trip and replay") {
  const auto g = testing::bundled_graph();
  const GreedyHalvingSeeker seeker(g);
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Delhi");
  cfg.rng_seed = 77;
  cfg.observability = Observability::FO;
  auto t = play_game(seeker, oracle, pruner, *g, cfg);
  t.turns[0].seeker_trace = "Thinking \"aloud\"\nline two";
  t.turns[1].consistency_faults.push_back({FaultKind::UnknownId, "city:5"});

  const auto text = transcript_to_string(t);
  CHECK(text.find("infoseek-transcript/1") != std::string::npos);
  const auto back = transcript_from_string(text);
  CHECK(transcript_to_string(back) == text);
  CHECK(back.config.target == cfg.target);
  CHECK(back.config.rng_seed == 77);
  CHECK(back.config.observability == Observability::FO);
  CHECK(back.turns.size() == t.turns.size());
  CHECK(back.turns[0].seeker_trace == t.turns[0].seeker_trace);
  CHECK(back.turns[1].consistency_faults == t.turns[1].consistency_faults);
  CHECK(back.turns[0].predicate == t.turns[0].predicate);
  CHECK(back.outcome == Outcome::Win);

  const auto m = replay(back, *g);
  CHECK(m.total_ig == doctest::Approx(t.game_metrics.total_ig).epsilon(1e-12));
  CHECK(m.turns == t.game_metrics.turns);
  CHECK(m.win);

  SUBCASE("tampered IG") {
    auto bad = back;
    bad.turns[0].metrics.ig += 1e-6;
    CHECK_THROWS_AS(replay(bad, *g), Error);
    try {
      replay(bad, *g);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ReplayDivergence);
    }
  }
  SUBCASE("tampered prune") {
    auto bad = back;
    bad.turns[0].pruned_ids.pop_back();
    CHECK_THROWS_AS(replay(bad, *g), Error);
  }
  SUBCASE("other dataset") {
    try {
      replay(back, *testing::small_graph());
      FAIL("expected a fingerprint mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::FingerprintMismatch);
    }
  }
}

TEST_CASE("malformed transcripts") {
  const auto g = testing::bundled_graph();
  const ScriptedSeeker seeker({SeekerOutput::from(Predicate::city_guess("Tokyo"))});
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Tokyo");
  const auto good = transcript_to_string(play_game(seeker, oracle, pruner, *g, cfg));
  std::vector<std::string> lines;
  std::istringstream in(good);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  REQUIRE(lines.size() == 3);

  auto expect_malformed = [](const std::string& text) {
    CAPTURE(text);
    try {
      (void)transcript_from_string(text);
      FAIL("expected MalformedTranscript");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MalformedTranscript);
    }
  };
  expect_malformed("");
  expect_malformed("not json\n");
  expect_malformed(lines[1] + "\n" + lines[0] + "\n" + lines[2] + "\n");
  expect_malformed(lines[0] + "\n" + lines[1] + "\n");
  expect_malformed(lines[0] + "\n" + lines[2] + "\n" + lines[1] + "\n");
  std::string wrong_format = lines[0];
  wrong_format.replace(wrong_format.find("infoseek-transcript/1"), 21, "infoseek-transcript/9");
  expect_malformed(wrong_format + "\n" + lines[1] + "\n" + lines[2] + "\n");
}

TEST_CASE("games are deterministic in the seed") {
  const auto g = testing::bundled_graph();
  const RandomSeeker seeker(g);
  const RuleOracle oracle(g);
  const RulePruner pruner;
  GameConfig cfg;
  cfg.target = named("Cairo");
  cfg.rng_seed = 12345;
  const auto a = transcript_to_string(play_game(seeker, oracle, pruner, *g, cfg));
  const auto b = transcript_to_string(play_game(seeker, oracle, pruner, *g, cfg));
  CHECK(a == b);
  cfg.rng_seed = 12346;
  CHECK(transcript_to_string(play_game(seeker, oracle, pruner, *g, cfg)) != a);
}

TEST_CASE("random seeker games stay consistent") {
  const auto g = testing::bundled_graph();
  const RandomSeeker seeker(g);
  const RuleOracle oracle(g);
  const RulePruner pruner;
  std::size_t seed = 0;
  for (const auto& target : g->city_leaves()) {
    GameConfig cfg;
    cfg.target = target;
    cfg.rng_seed = ++seed;
    const auto t = play_game(seeker, oracle, pruner, *g, cfg);
    double sum = 0;
    for (const auto& r : t.turns) {
      CHECK(r.consistency_faults.empty());
      CHECK(r.metrics.ig >= 0.0);
      sum += r.metrics.ig;
    }
    CHECK(std::fabs(sum - t.game_metrics.total_ig) < 1e-9);
    CHECK(std::fabs(t.game_metrics.total_ig - (kLog40 - std::log2(double(t.turns.back().n_after)))) < 1e-9);
    if (t.outcome == Outcome::Win) CHECK(t.turns.back().n_after == 1);
  }
}
