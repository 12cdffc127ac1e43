#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace sbandit {

enum class Phase { kExplore, kExploit, kHalted };

inline double confidence_radius_logt(double log_horizon, std::int64_t pulls) {
  if (pulls < 1) throw std::domain_error("confidence radius undefined before the first pull");
  return std::sqrt(2.0 * log_horizon / static_cast<double>(pulls));
}

// sqrt(2 ln T / n), natural log.
inline double confidence_radius(std::int64_t horizon, std::int64_t pulls) {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  return confidence_radius_logt(std::log(static_cast<double>(horizon)), pulls);
}

// One-sided separation test: the candidate's upper bound sits at or below the
// leader's lower bound.
inline bool eliminates(double leader_mean, double leader_radius, double candidate_mean,
                       double candidate_radius) {
  return leader_mean - leader_radius >= candidate_mean + candidate_radius;
}

// Statistics frozen for an arm when it leaves the active set; these back its
// end-of-game bonus.
struct EliminationSnapshot {
  std::int64_t at = 0;     // boundary round
  double top_mean = 0.0;   // best active reported mean at the boundary
  double own_mean = 0.0;   // the arm's reported mean at the boundary
  RankMap rank;            // rank over all arms at the boundary
};

// The player's evolving state: active set, pull counts, reported-mean
// accumulators, phase, stopping times, and the frozen snapshots.
class PlayerState {
 public:
  PlayerState(int num_arms, std::int64_t horizon, bool defection_checks = true)
      : horizon_(horizon),
        log_horizon_(std::log(static_cast<double>(horizon))),
        defection_checks_(defection_checks),
        active_(static_cast<std::size_t>(num_arms), true),
        pulls_(static_cast<std::size_t>(num_arms), 0),
        report_sum_(static_cast<std::size_t>(num_arms), 0.0),
        last_report_(static_cast<std::size_t>(num_arms), 0.0),
        tau_k_(static_cast<std::size_t>(num_arms)),
        snapshots_(static_cast<std::size_t>(num_arms)) {
    if (num_arms < 2) throw std::invalid_argument("need at least two arms");
    if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  }

  // Explore: the active arm with the fewest pulls, ties to the lowest index.
  // Exploit: the committed arm.
  int select_arm() const {
    if (phase_ == Phase::kHalted) throw std::logic_error("no selection after halting");
    if (phase_ == Phase::kExploit) return *committed_;
    int best = -1;
    std::int64_t best_pulls = std::numeric_limits<std::int64_t>::max();
    for (int k = 0; k < num_arms(); ++k) {
      if (active_[static_cast<std::size_t>(k)] &&
          pulls_[static_cast<std::size_t>(k)] < best_pulls) {
        best = k;
        best_pulls = pulls_[static_cast<std::size_t>(k)];
      }
    }
    if (best < 0) throw std::logic_error("empty active set");
    return best;
  }

  // Ingest the selected arm's report for round t_+1. Runs the elimination
  // test at round-robin boundaries and the defection test in phase two.
  void observe_report(int arm, double report) {
    if (!(report >= 0.0 && report <= 1.0))
      throw std::invalid_argument("report outside [0,1]");
    if (phase_ == Phase::kHalted) throw std::logic_error("game already halted");
    ++t_;
    pulls_[static_cast<std::size_t>(arm)] += 1;
    report_sum_[static_cast<std::size_t>(arm)] += report;
    last_report_[static_cast<std::size_t>(arm)] = report;

    if (phase_ == Phase::kExplore) {
      if (at_round_robin_boundary()) run_elimination_step();
    } else {
      phase2_pulls_ += 1;
      phase2_sum_ += report;
      if (defection_checks_ && defection_detected()) {
        phase_ = Phase::kHalted;
        halted_at_ = t_;
      }
    }
  }

  // Newly eliminated arms; contract requires equal pull counts over actives.
  std::vector<int> elimination_step() {
    if (!at_round_robin_boundary())
      throw std::logic_error("elimination tested off a round-robin boundary");
    return run_elimination_step();
  }

  // {continue=false, halt=true} given current phase-two statistics.
  bool defection_detected() const {
    if (phase_ != Phase::kExploit) throw std::logic_error("defection test outside phase two");
    if (phase2_pulls_ < 1) return false;
    double mean2 = phase2_sum_ / static_cast<double>(phase2_pulls_);
    double radius = confidence_radius_logt(log_horizon_, phase2_pulls_);
    return mean2 + radius < phase2_threshold_;
  }

  // --- accessors ------------------------------------------------------------
  int num_arms() const { return static_cast<int>(active_.size()); }
  std::int64_t horizon() const { return horizon_; }
  std::int64_t round() const { return t_; }
  Phase phase() const { return phase_; }
  bool is_active(int k) const { return active_[static_cast<std::size_t>(k)]; }
  std::int64_t pulls(int k) const { return pulls_[static_cast<std::size_t>(k)]; }
  const std::vector<std::int64_t>& pulls() const { return pulls_; }
  double report_sum(int k) const { return report_sum_[static_cast<std::size_t>(k)]; }
  double last_report(int k) const { return last_report_[static_cast<std::size_t>(k)]; }
  std::optional<std::int64_t> tau() const { return tau_; }
  std::optional<std::int64_t> tau_of(int k) const { return tau_k_[static_cast<std::size_t>(k)]; }
  std::optional<int> committed() const { return committed_; }
  double phase2_threshold() const { return phase2_threshold_; }
  std::optional<std::int64_t> halted_at() const { return halted_at_; }
  std::int64_t phase2_pulls() const { return phase2_pulls_; }
  const std::optional<EliminationSnapshot>& snapshot(int k) const {
    return snapshots_[static_cast<std::size_t>(k)];
  }

  double reported_mean(int k) const {
    auto n = pulls_[static_cast<std::size_t>(k)];
    return n == 0 ? 0.0 : report_sum_[static_cast<std::size_t>(k)] / static_cast<double>(n);
  }

  std::vector<double> reported_means() const {
    std::vector<double> m(active_.size());
    for (int k = 0; k < num_arms(); ++k) m[static_cast<std::size_t>(k)] = reported_mean(k);
    return m;
  }

  int active_count() const {
    int c = 0;
    for (bool a : active_) c += a ? 1 : 0;
    return c;
  }

  bool at_round_robin_boundary() const {
    std::int64_t n = -1;
    for (int k = 0; k < num_arms(); ++k) {
      if (!active_[static_cast<std::size_t>(k)]) continue;
      if (n < 0)
        n = pulls_[static_cast<std::size_t>(k)];
      else if (pulls_[static_cast<std::size_t>(k)] != n)
        return false;
    }
    return n > 0;
  }

 private:
  std::vector<int> run_elimination_step() {
    std::vector<int> dropped;
    // Leader among active arms by reported mean, ties to the lower index.
    int leader = -1;
    for (int k = 0; k < num_arms(); ++k) {
      if (!active_[static_cast<std::size_t>(k)]) continue;
      if (leader < 0 || reported_mean(k) > reported_mean(leader)) leader = k;
    }
    const double leader_mean = reported_mean(leader);
    const double radius = confidence_radius_logt(log_horizon_, pulls_[static_cast<std::size_t>(leader)]);
    const RankMap all_rank = rank_map(reported_means());
    for (int k = 0; k < num_arms(); ++k) {
      if (!active_[static_cast<std::size_t>(k)] || k == leader) continue;
      if (eliminates(leader_mean, radius, reported_mean(k), radius)) {
        active_[static_cast<std::size_t>(k)] = false;
        tau_k_[static_cast<std::size_t>(k)] = t_;
        snapshots_[static_cast<std::size_t>(k)] =
            EliminationSnapshot{t_, leader_mean, reported_mean(k), all_rank};
        dropped.push_back(k);
      }
    }
    if (active_count() == 1) {
      tau_ = t_;
      committed_ = leader;
      phase_ = Phase::kExploit;
      // Frozen second-best benchmark: the best reported mean among the others
      // (all eliminated by now, so their statistics no longer move).
      double second = 0.0;
      for (int k = 0; k < num_arms(); ++k)
        if (k != leader) second = std::max(second, reported_mean(k));
      phase2_threshold_ = second;
      phase2_pulls_ = 0;
      phase2_sum_ = 0.0;
    }
    return dropped;
  }

  std::int64_t horizon_;
  double log_horizon_;
  bool defection_checks_;
  std::int64_t t_ = 0;
  Phase phase_ = Phase::kExplore;
  std::vector<bool> active_;
  std::vector<std::int64_t> pulls_;
  std::vector<double> report_sum_;
  std::vector<double> last_report_;
  std::optional<std::int64_t> tau_;
  std::vector<std::optional<std::int64_t>> tau_k_;
  std::optional<int> committed_;
  double phase2_threshold_ = 0.0;
  std::int64_t phase2_pulls_ = 0;
  double phase2_sum_ = 0.0;
  std::optional<std::int64_t> halted_at_;
  std::vector<std::optional<EliminationSnapshot>> snapshots_;
};

// Non-strategic successive elimination on a truthful reward stream: identical
// elimination logic, no bonuses, no defection tests. Plays the survivor to T.
struct ClassicSeResult {
  int survivor = 0;
  std::vector<std::int64_t> pulls;
  std::int64_t tau = 0;  // first-phase length; T when no commit happened
};

inline ClassicSeResult run_classic_se(const GameConfig& config, const RewardFn& rewards) {
  config.validate();
  PlayerState state(config.num_arms(), config.horizon, /*defection_checks=*/false);
  for (std::int64_t t = 1; t <= config.horizon; ++t) {
    int k = state.select_arm();
    double r = rewards(k, state.pulls(k));
    state.observe_report(k, r);  // truthful: x = r
  }
  ClassicSeResult out;
  out.pulls = state.pulls();
  if (state.committed()) {
    out.survivor = *state.committed();
    out.tau = *state.tau();
  } else {
    out.survivor = rank_map(state.reported_means()).top();
    out.tau = config.horizon;
  }
  return out;
}

}  // namespace sbandit
