#include <doctest.h>

#include "infoseek/agents.hpp"
#include "infoseek/error.hpp"
#include "test_support.hpp"

using namespace infoseek;
using testing::city;

namespace {

std::size_t imbalance(const HypothesisGraph& g, const Predicate& p) {
  const auto yes = leaves_matching(g, p).size();
  const auto no = g.active_count() - yes;
  return yes > no ? yes - no : no - yes;
}

}  // namespace

TEST_CASE("yes/no parsing") {
  CHECK(parse_yes_no("Yes") == true);
  CHECK(parse_yes_no("yes.") == true);
  CHECK(parse_yes_no(" \"No, it is not\"") == false);
  CHECK(parse_yes_no("NO") == false);
  CHECK_FALSE(parse_yes_no("Nope").has_value());
  CHECK_FALSE(parse_yes_no("Yesterday").has_value());
  CHECK_FALSE(parse_yes_no("I cannot say").has_value());
  CHECK_FALSE(parse_yes_no("").has_value());
}

TEST_CASE("observability names") {
  CHECK(observability_name(Observability::FO) == "FO");
  CHECK(parse_observability("PO") == Observability::PO);
  CHECK_FALSE(parse_observability("XO").has_value());
}

TEST_CASE("candidate predicates cover every attribute value plus one city half") {
  const auto& g = *testing::bundled_graph();
  const auto cands = candidate_predicates(g);
  std::size_t attr = 0, cityin = 0;
  for (const auto& p : cands) {
    if (std::holds_alternative<AttributeIn>(p.variant())) {
      ++attr;
      CHECK(std::get<AttributeIn>(p.variant()).values.size() == 1);
    } else {
      ++cityin;
      CHECK(std::get<CityIn>(p.variant()).values.size() == 20);
    }
  }
  CHECK(attr == 4 + 12 + 24 + 39);
  CHECK(cityin == 1);
}

TEST_CASE("greedy choice is the most balanced candidate") {
  const auto& g = *testing::bundled_graph();
  const auto choice = greedy_choose(g);
  for (const auto& p : candidate_predicates(g)) CHECK(imbalance(g, choice) <= imbalance(g, p));
  // Twenty cities sort first by id string; no attribute splits 20/20, so the city half wins.
  CHECK(imbalance(g, choice) == 0);
  CHECK(std::holds_alternative<CityIn>(choice.variant()));
}

TEST_CASE("greedy tie-break prefers coarser levels") {
  using testing::rec;
  // Japan holds half the cities; region Asia does too, and wins the tie.
  std::vector<CityRecord> records = {
      rec(1, "Tokyo", 10, "Tokyo-to", 100, "Japan", 1, "Asia", 5, "Eastern Asia"),
      rec(2, "Osaka", 11, "Osaka-fu", 100, "Japan", 1, "Asia", 5, "Eastern Asia"),
      rec(3, "Paris", 20, "IDF", 200, "France", 2, "Europe", 6, "Western Europe"),
      rec(4, "Lyon", 21, "ARA", 200, "France", 2, "Europe", 6, "Western Europe"),
  };
  CHECK(greedy_choose(build_graph(records)).canonical() == "attr:region:Asia");

  // Only a country splits evenly.
  records = {
      rec(1, "Tokyo", 10, "Tokyo-to", 100, "Japan", 1, "Asia", 5, "Eastern Asia"),
      rec(2, "Osaka", 11, "Osaka-fu", 100, "Japan", 1, "Asia", 5, "Eastern Asia"),
      rec(3, "Seoul", 12, "Seoul", 101, "South Korea", 1, "Asia", 5, "Eastern Asia"),
      rec(4, "Beijing", 13, "Beijing", 102, "China", 1, "Asia", 5, "Eastern Asia"),
  };
  auto g = build_graph(records);
  CHECK(greedy_choose(g).canonical() == "attr:country:Japan");

  g.prune({city(1), city(2), city(3)});
  CHECK(greedy_choose(g).canonical() == "guess:Beijing");

  g.reset();
  g.prune({city(1), city(2)});
  CHECK(greedy_choose(g).canonical() == "attr:country:China");
}

TEST_CASE("greedy seeker rebuilds its view from the dialogue") {
  const auto fresh = testing::small_graph();
  const GreedyHalvingSeeker seeker(fresh);
  Rng rng(1);
  SeekerContext ctx;
  const auto first = seeker.ask(ctx, rng, nullptr);
  REQUIRE(first.predicate);
  CHECK(first.predicate->canonical() == "cityin:Guangzhou|Osaka|Shenzhen|Tokyo");
  CHECK(first.question_text == "Is the target city one of Guangzhou, Osaka, Shenzhen or Tokyo?");

  ctx.history.push_back({first.question_text, "No", first.predicate});
  ctx.turn_index = 2;
  const auto second = seeker.ask(ctx, rng, nullptr);
  REQUIRE(second.predicate);
  CHECK(second.predicate->canonical() == "attr:subregion:Northern Europe");
  CHECK(imbalance(replay_history(*fresh, ctx.history), *second.predicate) == 0);
}

TEST_CASE("random seeker is deterministic in its RNG") {
  const auto fresh = testing::bundled_graph();
  const RandomSeeker seeker(fresh);
  SeekerContext ctx;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    CHECK(seeker.ask(ctx, a, nullptr).question_text == seeker.ask(ctx, b, nullptr).question_text);
  }
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    seen.insert(seeker.ask(ctx, r, nullptr).question_text);
  }
  CHECK(seen.size() > 10);
}

TEST_CASE("random seeker guesses when one city is left") {
  using testing::rec;
  const auto g = std::make_shared<const HypothesisGraph>(
      build_graph(std::vector<CityRecord>{rec(1, "Tokyo", 10, "Tokyo-to", 100, "Japan", 1, "Asia", 5, "Eastern Asia")}));
  const RandomSeeker seeker(g);
  Rng rng(0);
  CHECK(seeker.ask({}, rng, nullptr).predicate->canonical() == "guess:Tokyo");
}

TEST_CASE("scripted seeker") {
  const ScriptedSeeker seeker({SeekerOutput::from(Predicate::attribute_in(Level::Region, {"Asia"})),
                               {"Is it a capital?", std::nullopt, std::nullopt}});
  Rng rng(0);
  SeekerContext ctx;
  CHECK(seeker.ask(ctx, rng, nullptr).question_text == "Is the target city in Asia?");
  ctx.turn_index = 2;
  CHECK(seeker.ask(ctx, rng, nullptr).question_text == "Is it a capital?");
  ctx.turn_index = 9;
  CHECK(seeker.ask(ctx, rng, nullptr).question_text == "Is it a capital?");
}

TEST_CASE("rule oracle is truthful and detects wins") {
  const auto g = testing::bundled_graph();
  const RuleOracle oracle(g);
  const auto tokyo = g->find_by_name(Level::City, "Tokyo").front();
  auto ask = [&](const Predicate& p) { return oracle.answer(SeekerOutput::from(p), tokyo, {}, nullptr); };

  auto r = ask(Predicate::attribute_in(Level::Region, {"Asia"}));
  CHECK(r.answer == "Yes");
  CHECK_FALSE(r.game_over);
  r = ask(Predicate::city_guess("Tokyo"));
  CHECK(r.answer == "Yes");
  CHECK(r.game_over);
  r = ask(Predicate::city_guess("Osaka"));
  CHECK(r.answer == "No");
  CHECK_FALSE(r.game_over);
  r = ask(Predicate::city_in({"Tokyo"}));
  CHECK(r.answer == "Yes");
  CHECK_FALSE(r.game_over);

  const auto free = oracle.answer({"Is it famous for sushi?", std::nullopt, std::nullopt}, tokyo, {}, nullptr);
  CHECK_FALSE(parse_yes_no(free.answer).has_value());
  CHECK_FALSE(free.game_over);

  CHECK_THROWS_AS(oracle.answer(SeekerOutput::from(Predicate::city_guess("Tokyo")), city(1), {}, nullptr), Error);

  for (const auto& target : g->city_leaves()) {
    for (const auto& p : candidate_predicates(*g)) {
      const auto a = oracle.answer(SeekerOutput::from(p), target, {}, nullptr);
      REQUIRE(parse_yes_no(a.answer) == evaluate(p, *g, target));
    }
  }
}

TEST_CASE("rule pruner") {
  const auto& g = *testing::bundled_graph();
  const RulePruner pruner;
  auto decide = [&](const SeekerOutput& q, std::string_view a) {
    const auto out = pruner.prune_decision(q, a, g, 1, nullptr);
    return std::set<NodeId>(out.pruned_ids.begin(), out.pruned_ids.end());
  };
  const auto asia = Predicate::attribute_in(Level::Region, {"Asia"});
  CHECK(decide(SeekerOutput::from(asia), "No") == leaves_matching(g, asia));
  CHECK(decide(SeekerOutput::from(asia), "Yes") == prune_set(asia, true, g));
  CHECK(decide({"Is it big?", std::nullopt, std::nullopt}, "Yes").empty());
  CHECK(decide(SeekerOutput::from(asia), "Maybe").empty());
  const auto osaka = g.find_by_name(Level::City, "Osaka").front();
  CHECK(decide(SeekerOutput::from(Predicate::city_guess("Osaka")), "No") == std::set<NodeId>{osaka});
}
