#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bonus.hpp"
#include "core.hpp"
#include "player.hpp"
#include "strategies.hpp"

namespace sbandit {

enum class Algo { kStrategicSe, kClassicSe };

struct EngineOptions {
  Algo algo = Algo::kStrategicSe;
  BonusOptions bonus;  // classic SE ignores bonuses entirely
};

struct GameResult {
  std::shared_ptr<const GameConfig> config;  // heap-stable; trajectory points at it
  std::int64_t epoch = 0;
  Trajectory trajectory;
  BonusReport bonuses;
  PlayerState player;  // final state
  std::vector<double> savings;        // S_k over the run
  std::vector<double> observed_sum;   // private reward sums per arm
  std::vector<double> last_reward;    // r at each arm's final pull

  GameResult(std::shared_ptr<const GameConfig> cfg, std::int64_t ep)
      : config(std::move(cfg)),
        epoch(ep),
        player(config->num_arms(), config->horizon),
        savings(static_cast<std::size_t>(config->num_arms()), 0.0),
        observed_sum(static_cast<std::size_t>(config->num_arms()), 0.0),
        last_reward(static_cast<std::size_t>(config->num_arms()), 0.0) {
    trajectory.config = config.get();
  }

  int num_arms() const { return config->num_arms(); }
  std::int64_t pulls(int k) const { return player.pulls(k); }
  double reported_mean(int k) const { return player.reported_mean(k); }
  std::optional<std::int64_t> tau() const { return player.tau(); }
  bool halted() const { return player.phase() == Phase::kHalted; }
  double utility(int k) const {
    return savings[static_cast<std::size_t>(k)] + bonuses.arms[static_cast<std::size_t>(k)].psi;
  }
};

// Pull-indexed lazy reward stream: the draw for (arm, pull) is a pure function
// of (master_seed, epoch, arm, pull), so every profile faces the same tape.
inline RewardFn make_reward_stream(std::shared_ptr<const GameConfig> config, std::int64_t epoch) {
  return [config = std::move(config), epoch](int arm, std::int64_t pull_index) {
    Rng rng(mix_key({config->master_seed, static_cast<std::uint64_t>(epoch), kRewardStream,
                     static_cast<std::uint64_t>(arm), static_cast<std::uint64_t>(pull_index)}));
    return sample_reward(config->arms[static_cast<std::size_t>(arm)], rng);
  };
}

inline std::vector<std::unique_ptr<ArmStrategy>> make_profile_strategies(const GameConfig& config) {
  const RankMap true_rank = rank_map(config.true_means());
  std::vector<std::unique_ptr<ArmStrategy>> out;
  out.reserve(config.arms.size());
  for (int k = 0; k < config.num_arms(); ++k)
    out.push_back(make_strategy(config.strategy_profile[static_cast<std::size_t>(k)],
                                true_rank.rank_of(k)));
  return out;
}

// Full game loop with caller-supplied rewards and strategies (the equilibrium
// checker drives this directly with fixed tapes and deviation policies).
inline GameResult run_game_custom(std::shared_ptr<const GameConfig> config_ptr, std::int64_t epoch,
                                  const RewardFn& rewards,
                                  std::vector<std::unique_ptr<ArmStrategy>>& strategies,
                                  const EngineOptions& options = {}) {
  const GameConfig& config = *config_ptr;
  config.validate();
  if (strategies.size() != static_cast<std::size_t>(config.num_arms()))
    throw std::invalid_argument("one strategy per arm required");
  const int num_arms = config.num_arms();
  GameResult result(config_ptr, epoch);
  if (options.algo == Algo::kClassicSe)
    result.player = PlayerState(num_arms, config.horizon, /*defection_checks=*/false);

  std::vector<std::vector<OwnRound>> own_history(static_cast<std::size_t>(num_arms));
  std::vector<int> pull_sequence;
  pull_sequence.reserve(static_cast<std::size_t>(config.horizon));
  result.trajectory.rounds.reserve(static_cast<std::size_t>(config.horizon));
  std::vector<Rng> strategy_rng;
  strategy_rng.reserve(static_cast<std::size_t>(num_arms));
  for (int k = 0; k < num_arms; ++k)
    strategy_rng.emplace_back(mix_key({config.master_seed, static_cast<std::uint64_t>(epoch),
                                       kStrategyStream, static_cast<std::uint64_t>(k)}));

  PlayerState& player = result.player;
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    const int k = player.select_arm();
    const auto ku = static_cast<std::size_t>(k);
    const std::int64_t pull_index = player.pulls(k);
    const double reward = rewards(k, pull_index);
    if (!(reward >= 0.0 && reward <= 1.0)) throw std::logic_error("reward outside [0,1]");

    ArmView view;
    view.arm = k;
    view.t = t;
    view.pull_index = pull_index;
    view.reward = reward;
    view.savings = result.savings[ku];
    view.own_history = {own_history[ku].data(), own_history[ku].size()};
    view.pull_sequence = {pull_sequence.data(), pull_sequence.size()};

    double report = strategies[ku]->report(view, strategy_rng[ku]);
    report = std::clamp(report, 0.0, reward);  // debt-free backstop

    result.trajectory.rounds.push_back({t, k, reward, report});
    own_history[ku].push_back({t, reward, report});
    pull_sequence.push_back(k);
    result.savings[ku] += reward - report;
    result.observed_sum[ku] += reward;
    result.last_reward[ku] = reward;

    player.observe_report(k, report);
    if (player.phase() == Phase::kHalted) {
      result.trajectory.halted_at = t;
      break;
    }
  }

  if (options.algo == Algo::kStrategicSe) {
    result.bonuses = assign_bonuses(player, options.bonus);
  } else {
    result.bonuses.arms.resize(static_cast<std::size_t>(num_arms));
  }
  return result;
}

// One seeded game: deterministic under (config, master_seed, epoch).
inline GameResult run_game(const GameConfig& config, std::int64_t epoch,
                           const EngineOptions& options = {}) {
  auto cfg = std::make_shared<const GameConfig>(config);
  auto strategies = make_profile_strategies(*cfg);
  return run_game_custom(cfg, epoch, make_reward_stream(cfg, epoch), strategies, options);
}

// Seeded epoch batch; results are keyed by epoch index, so output is
// independent of execution order by construction.
inline std::vector<GameResult> run_epochs(const GameConfig& config,
                                          const EngineOptions& options = {}) {
  config.validate();
  std::vector<GameResult> results;
  results.reserve(static_cast<std::size_t>(config.epochs));
  auto cfg = std::make_shared<const GameConfig>(config);
  for (std::int64_t e = 0; e < config.epochs; ++e) {
    auto strategies = make_profile_strategies(*cfg);
    results.push_back(run_game_custom(cfg, e, make_reward_stream(cfg, e), strategies, options));
  }
  return results;
}

}  // namespace sbandit
