#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "player.hpp"

namespace sbandit {

enum class BonusBranch { kNone, kBestArm, kSuboptimal, kForfeited };

inline const char* bonus_branch_name(BonusBranch b) {
  switch (b) {
    case BonusBranch::kNone: return "none";
    case BonusBranch::kBestArm: return "best_arm";
    case BonusBranch::kSuboptimal: return "suboptimal";
    case BonusBranch::kForfeited: return "forfeited";
  }
  return "?";
}

struct BonusOptions {
  bool cap_enabled = true;   // cap payouts at `cap` (defaults to the horizon)
  double cap = 0.0;          // 0 = use horizon
  bool ablate = false;       // pay nothing (mechanism ablation)
};

// Payout for an arm ranked second or worse: a kickback inversely proportional
// to its reported-mean shortfall, plus its final report back.
//   capped:   min(cap, 16 ln T / gap + last_report); gap <= 0 pays the cap.
//   uncapped: the bare formula; gap <= 0 is a degenerate-gap error.
inline double bonus_suboptimal(std::int64_t horizon, double mu_tilde_top, double mu_tilde_k,
                               double last_report, bool cap_enabled = true, double cap = 0.0) {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  if (!(last_report >= 0.0 && last_report <= 1.0))
    throw std::invalid_argument("last report outside [0,1]");
  const double gap = mu_tilde_top - mu_tilde_k;
  const double cap_value = cap > 0.0 ? cap : static_cast<double>(horizon);
  if (gap <= 0.0) {
    if (!cap_enabled) throw std::domain_error("degenerate reported-mean gap");
    return cap_value;
  }
  const double psi = 16.0 * std::log(static_cast<double>(horizon)) / gap + last_report;
  return cap_enabled ? std::min(cap_value, psi) : psi;
}

// Payout for the committed arm: the second-price spread on its reports, plus
// its final report back; forfeited entirely if the game was halted on it.
// Negative spreads are floored at zero.
inline double bonus_best(std::int64_t pulls_total, double mu_tilde_k_final, double mu_tilde_second,
                         double last_report, bool completed, bool cap_enabled = true,
                         double cap = 0.0) {
  if (!completed) return 0.0;
  double psi = static_cast<double>(pulls_total) * (mu_tilde_k_final - mu_tilde_second) + last_report;
  psi = std::max(0.0, psi);
  if (cap_enabled && cap > 0.0) psi = std::min(cap, psi);
  return psi;
}

struct ArmBonus {
  double psi = 0.0;
  BonusBranch branch = BonusBranch::kNone;
  bool capped = false;           // the cap rule changed the payout
  bool degenerate_gap = false;   // zero/negative reported gap met the formula
  bool floored = false;          // best-arm spread clipped at zero
  // Inputs snapshot.
  std::int64_t pulls = 0;
  double mean_final = 0.0;       // arm's reported mean at game end
  double frozen_top = 0.0;       // benchmark mean used by its branch
  double frozen_own = 0.0;
  double last_report = 0.0;
};

struct BonusReport {
  std::vector<ArmBonus> arms;
  bool ablated = false;

  double total() const {
    double s = 0.0;
    for (const auto& a : arms)
      if (std::isfinite(a.psi)) s += a.psi;
    return s;
  }
};

// End-of-game dispatch. The committed arm (or, when the first phase never
// ended, the top-ranked arm at T) takes the best-arm branch, forfeited if the
// game halted on it. Every other pulled arm takes the suboptimal branch with
// its frozen statistics; never-pulled arms get nothing.
//
// In uncapped mode a degenerate (<= 0) reported gap pays the formula's
// one-sided limit +infinity and is flagged, so equilibrium checks can treat
// the comparison as trivially satisfied rather than erroring mid-run.
inline BonusReport assign_bonuses(const PlayerState& state, const BonusOptions& options = {}) {
  const int num_arms = state.num_arms();
  const std::int64_t horizon = state.horizon();
  const double log_horizon = std::log(static_cast<double>(horizon));
  const double cap_value = options.cap > 0.0 ? options.cap : static_cast<double>(horizon);

  BonusReport report;
  report.ablated = options.ablate;
  report.arms.resize(static_cast<std::size_t>(num_arms));

  const bool committed_game = state.committed().has_value();
  const RankMap final_rank = rank_map(state.reported_means());
  const int best_arm = committed_game ? *state.committed() : final_rank.top();
  const bool halted = state.phase() == Phase::kHalted;

  for (int k = 0; k < num_arms; ++k) {
    ArmBonus& b = report.arms[static_cast<std::size_t>(k)];
    b.pulls = state.pulls(k);
    b.mean_final = state.reported_mean(k);
    b.last_report = state.last_report(k);
    if (state.pulls(k) == 0) {
      b.branch = BonusBranch::kNone;
      continue;
    }
    if (k == best_arm) {
      if (halted) {
        b.branch = BonusBranch::kForfeited;
        b.psi = 0.0;
        continue;
      }
      b.branch = BonusBranch::kBestArm;
      double second;
      if (committed_game) {
        second = state.phase2_threshold();
      } else {
        second = 0.0;
        for (int j = 0; j < num_arms; ++j)
          if (j != k) second = std::max(second, state.reported_mean(j));
      }
      b.frozen_top = b.mean_final;
      b.frozen_own = second;
      if (!options.ablate) {
        double spread = static_cast<double>(b.pulls) * (b.mean_final - second) + b.last_report;
        b.floored = spread < 0.0;
        b.psi = bonus_best(b.pulls, b.mean_final, second, b.last_report, /*completed=*/true,
                           options.cap_enabled, cap_value);
        b.capped = options.cap_enabled && std::max(0.0, spread) > cap_value;
      }
      continue;
    }
    // Suboptimal branch: frozen at the arm's elimination boundary, or at the
    // final statistics when the first phase never ended.
    b.branch = BonusBranch::kSuboptimal;
    if (const auto& snap = state.snapshot(k)) {
      b.frozen_top = snap->top_mean;
      b.frozen_own = snap->own_mean;
    } else {
      b.frozen_top = state.reported_mean(final_rank.top());
      b.frozen_own = state.reported_mean(k);
    }
    if (options.ablate) continue;
    const double gap = b.frozen_top - b.frozen_own;
    if (gap <= 0.0) {
      b.degenerate_gap = true;
      if (options.cap_enabled) {
        b.psi = cap_value;
        b.capped = true;
      } else {
        b.psi = std::numeric_limits<double>::infinity();
      }
      continue;
    }
    const double core = 16.0 * log_horizon / gap + b.last_report;
    if (options.cap_enabled && core > cap_value) {
      b.psi = cap_value;
      b.capped = true;
    } else {
      b.psi = core;
    }
  }
  return report;
}

}  // namespace sbandit
