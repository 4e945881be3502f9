#include "infoseek/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "infoseek/error.hpp"

namespace infoseek {

double entropy(std::size_t n) {
  if (n == 0) throw Error(Errc::ZeroCandidates, "entropy of an empty hypothesis space");
  return std::log2(static_cast<double>(n));
}

double information_gain(std::size_t n_before, std::size_t n_after) {
  if (n_after == 0 || n_after > n_before) {
    throw Error(Errc::InvalidShrink,
                "cannot go from " + std::to_string(n_before) + " to " + std::to_string(n_after) + " candidates");
  }
  return std::log2(static_cast<double>(n_before) / static_cast<double>(n_after));
}

TurnMetrics TurnMetrics::from_counts(std::size_t turn_index, std::size_t n_before, std::size_t n_after) {
  if (n_after == 0 || n_after > n_before) {
    throw Error(Errc::InvalidShrink,
                "turn " + std::to_string(turn_index) + " grew or emptied the hypothesis space");
  }
  TurnMetrics m;
  m.turn_index = turn_index;
  m.h_before = entropy(n_before);
  m.h_after = entropy(n_after);
  m.ig = m.h_before - m.h_after;
  return m;
}

GameMetrics GameMetrics::from_turns(bool win, std::size_t turns, std::vector<TurnMetrics> per_turn) {
  GameMetrics g;
  g.win = win;
  g.turns = turns;
  g.per_turn = std::move(per_turn);
  g.total_ig = 0.0;
  for (const auto& t : g.per_turn) g.total_ig += t.ig;
  g.ig_per_turn = turns > 0 ? g.total_ig / static_cast<double>(turns) : 0.0;
  return g;
}

namespace {

MeanSe mean_and_spread(std::span<const double> xs, bool standard_error) {
  if (xs.empty()) throw Error(Errc::EmptyInput, "no observations");
  const auto n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  // Identical observations: exact mean and zero spread, free of summation rounding.
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return {xs.front(), 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, standard_error ? sd / std::sqrt(n) : sd};
}

}  // namespace

MeanSe mean_se(std::span<const double> xs) { return mean_and_spread(xs, true); }
MeanSe mean_sd(std::span<const double> xs) { return mean_and_spread(xs, false); }

AggregateMetrics aggregate(std::span<const GameMetrics> games) {
  return aggregate(games, SeGrouping::PerGame, {});
}

AggregateMetrics aggregate(std::span<const GameMetrics> games, SeGrouping grouping,
                           std::span<const std::size_t> group_of) {
  if (games.empty()) throw Error(Errc::EmptyInput, "aggregate over zero games");

  std::vector<double> win, turns, igpt, total;
  if (grouping == SeGrouping::PerGame) {
    for (const auto& g : games) {
      win.push_back(g.win ? 1.0 : 0.0);
      turns.push_back(static_cast<double>(g.turns));
      igpt.push_back(g.ig_per_turn);
      total.push_back(g.total_ig);
    }
  } else {
    if (group_of.size() != games.size()) {
      throw Error(Errc::EmptyInput, "per-target grouping needs one group label per game");
    }
    struct Sums {
      double win = 0, turns = 0, igpt = 0, total = 0;
      std::size_t n = 0;
    };
    std::map<std::size_t, Sums> groups;
    for (std::size_t i = 0; i < games.size(); ++i) {
      auto& s = groups[group_of[i]];
      s.win += games[i].win ? 1.0 : 0.0;
      s.turns += static_cast<double>(games[i].turns);
      s.igpt += games[i].ig_per_turn;
      s.total += games[i].total_ig;
      ++s.n;
    }
    for (const auto& [key, s] : groups) {
      const auto n = static_cast<double>(s.n);
      win.push_back(s.win / n);
      turns.push_back(s.turns / n);
      igpt.push_back(s.igpt / n);
      total.push_back(s.total / n);
    }
  }

  AggregateMetrics a;
  a.win_rate = mean_se(win);
  a.avg_turns = mean_se(turns);
  a.ig_per_turn = mean_se(igpt);
  a.total_ig = mean_se(total);
  a.n_games = games.size();
  return a;
}

std::vector<TimelinePoint> ig_timeline(std::span<const GameMetrics> games, std::size_t max_turns) {
  std::vector<TimelinePoint> out;
  out.reserve(max_turns);
  for (std::size_t t = 1; t <= max_turns; ++t) {
    TimelinePoint p{t, 0.0, 0};
    double sum = 0.0;
    for (const auto& g : games) {
      if (g.per_turn.size() >= t) {
        sum += g.per_turn[t - 1].ig;
        ++p.n_games;
      }
    }
    if (p.n_games > 0) p.mean_ig = sum / static_cast<double>(p.n_games);
    out.push_back(p);
  }
  return out;
}

}  // namespace infoseek
