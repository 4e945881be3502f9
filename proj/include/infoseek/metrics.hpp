#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace infoseek {

// Uncertainty over n equally likely candidates, in bits. Throws ZeroCandidates for n = 0.
double entropy(std::size_t n);

// log2(n_before / n_after). Throws InvalidShrink unless n_before >= n_after >= 1.
double information_gain(std::size_t n_before, std::size_t n_after);

struct EntropySnapshot {
  std::size_t n_active = 1;
  double entropy_bits = 0.0;

  static EntropySnapshot of(std::size_t n) { return {n, entropy(n)}; }
};

struct TurnMetrics {
  std::size_t turn_index = 1;
  double h_before = 0.0;
  double h_after = 0.0;
  double ig = 0.0;  // h_before - h_after

  static TurnMetrics from_counts(std::size_t turn_index, std::size_t n_before, std::size_t n_after);
};

struct GameMetrics {
  bool win = false;
  std::size_t turns = 0;
  std::vector<TurnMetrics> per_turn;
  double total_ig = 0.0;     // sum of per_turn ig
  double ig_per_turn = 0.0;  // total_ig / turns

  // `turns` is the count charged to the game: the number of played turns for a
  // win, the turn cap for losses and failures.
  static GameMetrics from_turns(bool win, std::size_t turns, std::vector<TurnMetrics> per_turn);
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Mean with standard error (sample sd / sqrt(n)); se = 0 for n = 1. Throws EmptyInput.
MeanSe mean_se(std::span<const double> xs);

// Mean with sample standard deviation (n - 1 denominator); sd = 0 for n = 1.
MeanSe mean_sd(std::span<const double> xs);

struct AggregateMetrics {
  MeanSe win_rate;
  MeanSe avg_turns;
  MeanSe ig_per_turn;
  MeanSe total_ig;
  std::size_t n_games = 0;
};

enum class SeGrouping {
  PerGame,    // every game is one observation
  PerTarget,  // average runs of a target first, then one observation per target
};

// Throws EmptyInput.
AggregateMetrics aggregate(std::span<const GameMetrics> games);

// `group_of[i]` names the target of games[i]; only read for SeGrouping::PerTarget.
AggregateMetrics aggregate(std::span<const GameMetrics> games, SeGrouping grouping,
                           std::span<const std::size_t> group_of);

struct TimelinePoint {
  std::size_t turn_index = 1;
  double mean_ig = 0.0;  // 0 when n_games == 0
  std::size_t n_games = 0;
};

// One point per turn 1..max_turns, averaging only over games that reached that turn.
std::vector<TimelinePoint> ig_timeline(std::span<const GameMetrics> games, std::size_t max_turns);

}  // namespace infoseek
