#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "engine.hpp"

namespace sbandit {

// ---------------------------------------------------------------------------
// Realized regret: sum of per-round shortfalls below a benchmark mean, plus
// every bonus paid out. Expectations are estimated as epoch means upstream.
// ---------------------------------------------------------------------------

struct RegretReport {
  double comparator = 0.0;
  std::vector<double> cumulative;  // per realized round, reports only
  double report_total = 0.0;       // sum(comparator - x_t)
  double bonus_total = 0.0;
  double total = 0.0;              // report_total + bonus_total
  double exploration = 0.0;        // shortfall over first-phase rounds
  double exploitation = 0.0;       // shortfall over second-phase rounds
};

// Second-highest true mean: the benchmark the player is billed against.
inline double true_second_mean(const GameConfig& config) {
  auto means = config.true_means();
  return means[static_cast<std::size_t>(rank_map(means).second())];
}

inline RegretReport regret(const Trajectory& traj, const BonusReport& bonuses, double comparator,
                           std::optional<std::int64_t> tau = std::nullopt) {
  RegretReport rep;
  rep.comparator = comparator;
  rep.cumulative.reserve(traj.rounds.size());
  double cum = 0.0;
  for (const auto& r : traj.rounds) {
    double step = comparator - r.report;
    cum += step;
    rep.cumulative.push_back(cum);
    if (tau && r.t > *tau)
      rep.exploitation += step;
    else
      rep.exploration += step;
  }
  rep.report_total = cum;
  rep.bonus_total = bonuses.total();
  rep.total = rep.report_total + rep.bonus_total;
  return rep;
}

inline RegretReport regret(const GameResult& result, double comparator) {
  return regret(result.trajectory, result.bonuses, comparator, result.tau());
}

// ---------------------------------------------------------------------------
// Utilities: savings plus bonus, per arm; windowed savings for subgame math.
// ---------------------------------------------------------------------------

struct UtilityReport {
  std::vector<double> utility;  // S_k + psi_k
  std::vector<double> savings;
  std::vector<double> bonus;
};

inline UtilityReport utilities(const GameResult& result) {
  UtilityReport rep;
  const int num_arms = result.num_arms();
  rep.utility.resize(static_cast<std::size_t>(num_arms));
  rep.savings = result.savings;
  rep.bonus.resize(static_cast<std::size_t>(num_arms));
  for (int k = 0; k < num_arms; ++k) {
    rep.bonus[static_cast<std::size_t>(k)] = result.bonuses.arms[static_cast<std::size_t>(k)].psi;
    rep.utility[static_cast<std::size_t>(k)] =
        rep.savings[static_cast<std::size_t>(k)] + rep.bonus[static_cast<std::size_t>(k)];
  }
  return rep;
}

// Sum of (r - x) over arm k's pulls within rounds [from, to], inclusive.
inline double windowed_savings(const Trajectory& traj, int arm, std::int64_t from,
                               std::int64_t to) {
  double s = 0.0;
  for (const auto& r : traj.rounds)
    if (r.chosen == arm && r.t >= from && r.t <= to) s += r.reward - r.report;
  return s;
}

// ---------------------------------------------------------------------------
// Effective means and gaps under an arbitrary strategy profile.
// ---------------------------------------------------------------------------

struct GapReport {
  std::vector<double> true_means;
  std::vector<double> true_gap_from_best;      // mu_1 - mu_k
  std::vector<double> true_gap_from_second;    // mu_2 - mu_k
  std::vector<std::optional<double>> effective_mean;  // absent if never pulled
  RankMap effective_rank;                       // over effective means (absent = 0)
  std::vector<double> effective_gap_from_best;   // vs top effective mean
  std::vector<double> effective_gap_from_second; // vs second effective mean
};

inline GapReport effective_means(const GameResult& result) {
  GapReport rep;
  const GameConfig& config = *result.config;
  const int num_arms = config.num_arms();
  rep.true_means = config.true_means();
  const RankMap true_rank = rank_map(rep.true_means);
  const double mu1 = rep.true_means[static_cast<std::size_t>(true_rank.top())];
  const double mu2 = rep.true_means[static_cast<std::size_t>(true_rank.second())];
  std::vector<double> eff(static_cast<std::size_t>(num_arms), 0.0);
  for (int k = 0; k < num_arms; ++k) {
    rep.true_gap_from_best.push_back(mu1 - rep.true_means[static_cast<std::size_t>(k)]);
    rep.true_gap_from_second.push_back(mu2 - rep.true_means[static_cast<std::size_t>(k)]);
    if (result.pulls(k) > 0) {
      eff[static_cast<std::size_t>(k)] = result.reported_mean(k);
      rep.effective_mean.push_back(eff[static_cast<std::size_t>(k)]);
    } else {
      rep.effective_mean.push_back(std::nullopt);
    }
  }
  rep.effective_rank = rank_map(eff);
  const double e1 = eff[static_cast<std::size_t>(rep.effective_rank.top())];
  const double e2 = eff[static_cast<std::size_t>(rep.effective_rank.second())];
  for (int k = 0; k < num_arms; ++k) {
    rep.effective_gap_from_best.push_back(e1 - eff[static_cast<std::size_t>(k)]);
    rep.effective_gap_from_second.push_back(e2 - eff[static_cast<std::size_t>(k)]);
  }
  return rep;
}

inline double effective_second_mean(const GameResult& result) {
  auto rep = effective_means(result);
  int second = rep.effective_rank.second();
  return rep.effective_mean[static_cast<std::size_t>(second)].value_or(0.0);
}

// ---------------------------------------------------------------------------
// Closed-form thresholds used as test oracles and acceptance benchmarks.
// ---------------------------------------------------------------------------

struct Thresholds {
  // Per arm k (0-based), +inf where the gap is zero (excluded from sums).
  std::vector<double> se_pull_bound;       // 32 ln T / gap_1k^2, k != best
  double exploration_phase_bound = 0.0;    // sum_{k>=3} bound_k + 2 * bound_2
  double regret_upper_bound = 0.0;         // explicit-constant instance bound
  std::vector<double> suboptimal_utility_bound;  // 65 ln T / gap_1k
  double best_utility_bound = 0.0;         // 2 T gap_12 + 1
};

// max{6M/gap, 162 ln T / gap^2}; `tight` switches the savings constant to 3M.
inline double m_bounded_pull_bound(std::int64_t horizon, double savings_cap, double gap,
                                   bool tight = false) {
  if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
  const double log_t = std::log(static_cast<double>(horizon));
  const double c = tight ? 3.0 : 6.0;
  return std::max(c * savings_cap / gap, 162.0 * log_t / (gap * gap));
}

inline Thresholds thresholds(const GameConfig& config) {
  config.validate();
  Thresholds th;
  const double log_t = std::log(static_cast<double>(config.horizon));
  const auto means = config.true_means();
  const RankMap rank = rank_map(means);
  const int best = rank.top();
  const int second = rank.second();
  const double mu1 = means[static_cast<std::size_t>(best)];
  const double mu2 = means[static_cast<std::size_t>(second)];
  const double inf = std::numeric_limits<double>::infinity();

  th.se_pull_bound.assign(means.size(), inf);
  th.suboptimal_utility_bound.assign(means.size(), inf);
  double tail_sum = 0.0;  // ranks >= 3
  bool tail_finite = true;
  for (int k = 0; k < config.num_arms(); ++k) {
    if (k == best) continue;
    const double gap1 = mu1 - means[static_cast<std::size_t>(k)];
    if (gap1 > 0.0) {
      th.se_pull_bound[static_cast<std::size_t>(k)] = 32.0 * log_t / (gap1 * gap1);
      th.suboptimal_utility_bound[static_cast<std::size_t>(k)] = 65.0 * log_t / gap1;
    }
    if (rank.rank_of(k) >= 2) {
      if (std::isfinite(th.se_pull_bound[static_cast<std::size_t>(k)]))
        tail_sum += th.se_pull_bound[static_cast<std::size_t>(k)];
      else
        tail_finite = false;
    }
  }
  const double second_bound = th.se_pull_bound[static_cast<std::size_t>(second)];
  th.exploration_phase_bound =
      (tail_finite && std::isfinite(second_bound)) ? tail_sum + 2.0 * second_bound : inf;

  // Explicit constants: 32/gap_2k exploration terms, (64 + 16*sqrt(2))/gap_1k
  // bonus and exploitation terms, plus K.
  double bound = static_cast<double>(config.num_arms());
  for (int k = 0; k < config.num_arms(); ++k) {
    const int r = rank.rank_of(k);
    const double gap1 = mu1 - means[static_cast<std::size_t>(k)];
    const double gap2 = mu2 - means[static_cast<std::size_t>(k)];
    if (r >= 2) bound += gap2 > 0.0 ? 32.0 * log_t / gap2 : inf;
    if (r >= 1) bound += gap1 > 0.0 ? (64.0 + 16.0 * std::sqrt(2.0)) * log_t / gap1 : inf;
  }
  th.regret_upper_bound = bound;
  th.best_utility_bound = 2.0 * static_cast<double>(config.horizon) * (mu1 - mu2) + 1.0;
  return th;
}

// Instance bound on regret against the second-highest effective mean, with a
// savings cap M: sum over non-top arms of 3*max{6M, 162 lnT / gap} plus the
// rank>=3 tail of max{6M, 162 lnT / gap_from_second}, plus K.
inline double m_bounded_regret_bound(std::int64_t horizon, double savings_cap,
                                     const GapReport& gaps) {
  const double log_t = std::log(static_cast<double>(horizon));
  const int num_arms = static_cast<int>(gaps.effective_gap_from_best.size());
  double bound = static_cast<double>(num_arms);
  for (int k = 0; k < num_arms; ++k) {
    const int r = gaps.effective_rank.rank_of(k);
    const double g1 = gaps.effective_gap_from_best[static_cast<std::size_t>(k)];
    const double g2 = gaps.effective_gap_from_second[static_cast<std::size_t>(k)];
    if (r >= 1)
      bound += 3.0 * std::max(6.0 * savings_cap, g1 > 0.0
                                                     ? 162.0 * log_t / g1
                                                     : std::numeric_limits<double>::infinity());
    if (r >= 2)
      bound += std::max(6.0 * savings_cap, g2 > 0.0 ? 162.0 * log_t / g2
                                                    : std::numeric_limits<double>::infinity());
  }
  return bound;
}

}  // namespace sbandit
