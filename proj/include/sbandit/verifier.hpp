#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "engine.hpp"
#include "strategies.hpp"

namespace sbandit {

struct RewardTapes {
  std::vector<std::vector<double>> per_arm;  // [arm][pull]
};

// A small, exhaustively checkable game: one deviating arm restricted to
// reporting f*r for f on a grid, opponents on fixed strategies, rewards
// pre-drawn onto pull-indexed tapes.
struct DeviationSpace {
  std::vector<ArmSpec> arms;
  std::int64_t horizon = 6;             // kept small enough to enumerate
  std::vector<double> grid{0.0, 1.0};   // must contain 1.0 (truthful)
  int deviator = 1;                     // 0-based arm index
  std::vector<StrategyId> opponents;    // per arm; deviator's entry unused
  std::optional<RewardTapes> tape;      // pin one tape; otherwise enumerated
  std::uint64_t tape_seed = 1;          // sampled-tape stream
  std::int64_t policy_budget = 1 << 14; // max |G|^pulls
  std::int64_t tape_budget = 1 << 14;   // exhaustive-enumeration cutoff
  int sampled_tapes = 64;               // tape count when not exhaustive
  bool ablate_bonus = false;            // pay no bonuses (sanity ablation)
  double tolerance = 1e-9;

  void validate() const {
    if (arms.size() < 2) throw std::invalid_argument("need at least two arms");
    if (horizon < 2 || horizon > 8)
      throw std::invalid_argument("deviation horizon must lie in [2,8]");
    if (grid.empty() || grid.size() > 3)
      throw std::invalid_argument("fraction grid must hold 1..3 values");
    bool has_one = false;
    for (double g : grid) {
      if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("grid fraction outside [0,1]");
      if (g == 1.0) has_one = true;
    }
    if (!has_one) throw std::invalid_argument("grid must contain 1.0 (truthful)");
    if (deviator < 0 || deviator >= static_cast<int>(arms.size()))
      throw std::invalid_argument("deviating arm out of range");
    for (std::size_t i = 0; i < arms.size(); ++i) arms[i].validate();
    if (!opponents.empty() && opponents.size() != arms.size())
      throw std::invalid_argument("opponents must name one strategy per arm");
  }
};

// Pull counts under the balanced schedule (lowest-index round-robin with no
// eliminations; at this horizon the confidence radius exceeds 1, so no other
// schedule is reachable).
inline std::vector<std::int64_t> round_robin_pulls(int num_arms, std::int64_t horizon) {
  std::vector<std::int64_t> n(static_cast<std::size_t>(num_arms), 0);
  for (std::int64_t t = 0; t < horizon; ++t) n[static_cast<std::size_t>(t % num_arms)] += 1;
  return n;
}

struct PolicyEnumeration {
  std::int64_t count = 0;    // |G|^pulls
  std::int64_t pulls = 0;    // deviator pull count covered by one policy
};

// Number of fraction policies for the deviator; refuses over-budget spaces.
inline PolicyEnumeration enumerate_policies(const DeviationSpace& space) {
  space.validate();
  const auto pulls = round_robin_pulls(static_cast<int>(space.arms.size()), space.horizon);
  const std::int64_t n = pulls[static_cast<std::size_t>(space.deviator)];
  std::int64_t count = 1;
  for (std::int64_t i = 0; i < n; ++i) {
    count *= static_cast<std::int64_t>(space.grid.size());
    if (count > space.policy_budget) {
      std::ostringstream msg;
      msg << "policy enumeration needs budget >= " << std::pow(double(space.grid.size()), double(n))
          << " (" << space.grid.size() << "^" << n << "), have " << space.policy_budget;
      throw std::length_error(msg.str());
    }
  }
  return {count, n};
}

// Decode policy index -> fraction per pull (base-|G| digits, low pull first).
inline std::vector<double> decode_policy(const DeviationSpace& space, std::int64_t pulls,
                                         std::int64_t index) {
  std::vector<double> f(static_cast<std::size_t>(pulls), 1.0);
  const auto base = static_cast<std::int64_t>(space.grid.size());
  for (std::int64_t i = 0; i < pulls; ++i) {
    f[static_cast<std::size_t>(i)] = space.grid[static_cast<std::size_t>(index % base)];
    index /= base;
  }
  return f;
}

namespace detail {

struct TapeSlot {
  int arm;
  std::int64_t pull;
};

// Exhaustive mode lists every {0,1} assignment of the non-degenerate Bernoulli
// draws; other laws force sampled mode.
inline bool tapes_exhaustible(const DeviationSpace& space, std::vector<TapeSlot>& slots) {
  const auto pulls = round_robin_pulls(static_cast<int>(space.arms.size()), space.horizon);
  for (int k = 0; k < static_cast<int>(space.arms.size()); ++k) {
    const auto& dist = space.arms[static_cast<std::size_t>(k)].distribution;
    if (std::holds_alternative<Uniform>(dist) || std::holds_alternative<BetaLaw>(dist))
      return false;
    if (const auto* b = std::get_if<Bernoulli>(&dist)) {
      if (b->p > 0.0 && b->p < 1.0)
        for (std::int64_t i = 0; i < pulls[static_cast<std::size_t>(k)]; ++i)
          slots.push_back({k, i});
    }
  }
  return true;
}

inline RewardTapes base_tape(const DeviationSpace& space) {
  const auto pulls = round_robin_pulls(static_cast<int>(space.arms.size()), space.horizon);
  RewardTapes t;
  t.per_arm.resize(space.arms.size());
  for (int k = 0; k < static_cast<int>(space.arms.size()); ++k) {
    auto& lane = t.per_arm[static_cast<std::size_t>(k)];
    lane.assign(static_cast<std::size_t>(pulls[static_cast<std::size_t>(k)]), 0.0);
    const auto& dist = space.arms[static_cast<std::size_t>(k)].distribution;
    for (std::size_t i = 0; i < lane.size(); ++i) {
      if (const auto* p = std::get_if<PointMass>(&dist))
        lane[i] = p->value;
      else if (const auto* b = std::get_if<Bernoulli>(&dist))
        lane[i] = b->p >= 1.0 ? 1.0 : 0.0;  // degenerate or placeholder
    }
  }
  return t;
}

}  // namespace detail

// All tapes the certificate covers, plus whether they are exhaustive.
inline std::pair<std::vector<RewardTapes>, bool> build_tapes(const DeviationSpace& space) {
  if (space.tape) return {{*space.tape}, false};
  std::vector<detail::TapeSlot> slots;
  const bool discrete = detail::tapes_exhaustible(space, slots);
  std::vector<RewardTapes> tapes;
  if (discrete && (slots.size() < 63) &&
      (std::int64_t(1) << slots.size()) <= space.tape_budget) {
    const std::int64_t total = std::int64_t(1) << slots.size();
    tapes.reserve(static_cast<std::size_t>(total));
    for (std::int64_t mask = 0; mask < total; ++mask) {
      RewardTapes t = detail::base_tape(space);
      for (std::size_t s = 0; s < slots.size(); ++s)
        t.per_arm[static_cast<std::size_t>(slots[s].arm)]
                 [static_cast<std::size_t>(slots[s].pull)] = (mask >> s) & 1 ? 1.0 : 0.0;
      tapes.push_back(std::move(t));
    }
    return {std::move(tapes), true};
  }
  tapes.reserve(static_cast<std::size_t>(space.sampled_tapes));
  const auto pulls = round_robin_pulls(static_cast<int>(space.arms.size()), space.horizon);
  for (int i = 0; i < space.sampled_tapes; ++i) {
    RewardTapes t;
    t.per_arm.resize(space.arms.size());
    for (int k = 0; k < static_cast<int>(space.arms.size()); ++k) {
      auto& lane = t.per_arm[static_cast<std::size_t>(k)];
      lane.resize(static_cast<std::size_t>(pulls[static_cast<std::size_t>(k)]));
      for (std::size_t j = 0; j < lane.size(); ++j) {
        Rng rng(mix_key({space.tape_seed, kTapeStream, static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(j)}));
        lane[j] = sample_reward(space.arms[static_cast<std::size_t>(k)], rng);
      }
    }
    tapes.push_back(std::move(t));
  }
  return {std::move(tapes), false};
}

namespace detail {

struct DeviatorRun {
  std::vector<double> rewards;   // deviator's pull-indexed rewards
  std::vector<double> reports;
  double psi = 0.0;              // +inf on a degenerate uncapped gap
  bool degenerate = false;
};

inline GameConfig space_config(const DeviationSpace& space) {
  GameConfig cfg;
  cfg.horizon = space.horizon;
  cfg.master_seed = space.tape_seed;
  cfg.epochs = 1;
  for (int k = 0; k < static_cast<int>(space.arms.size()); ++k) {
    ArmSpec a = space.arms[static_cast<std::size_t>(k)];
    a.id = k + 1;
    cfg.arms.push_back(a);
    if (!space.opponents.empty())
      cfg.strategy_profile.push_back(space.opponents[static_cast<std::size_t>(k)]);
    else
      cfg.strategy_profile.push_back(TruthfulId{});
  }
  return cfg;
}

inline DeviatorRun evaluate_fractions(const std::shared_ptr<const GameConfig>& cfg,
                                      const DeviationSpace& space, const RewardTapes& tape,
                                      const std::vector<double>& fractions) {
  RewardFn rewards = [&space, &tape](int arm, std::int64_t pull) {
    const auto& lane = tape.per_arm[static_cast<std::size_t>(arm)];
    if (pull < static_cast<std::int64_t>(lane.size()))
      return lane[static_cast<std::size_t>(pull)];
    // Off-schedule pull (cannot occur at enumerable horizons); extend the
    // tape deterministically.
    Rng rng(mix_key({space.tape_seed, kTapeStream, 0xFFFF, static_cast<std::uint64_t>(arm),
                     static_cast<std::uint64_t>(pull)}));
    return sample_reward(space.arms[static_cast<std::size_t>(arm)], rng);
  };
  std::vector<std::unique_ptr<ArmStrategy>> strategies;
  const RankMap true_rank = rank_map(cfg->true_means());
  for (int k = 0; k < cfg->num_arms(); ++k) {
    if (k == space.deviator)
      strategies.push_back(std::make_unique<FractionPolicyStrategy>(fractions));
    else
      strategies.push_back(
          make_strategy(cfg->strategy_profile[static_cast<std::size_t>(k)], true_rank.rank_of(k)));
  }
  EngineOptions opt;
  opt.bonus.cap_enabled = false;  // the bare payout formula
  opt.bonus.ablate = space.ablate_bonus;
  GameResult result = run_game_custom(cfg, /*epoch=*/0, rewards, strategies, opt);

  DeviatorRun run;
  for (const auto& r : result.trajectory.rounds) {
    if (r.chosen != space.deviator) continue;
    run.rewards.push_back(r.reward);
    run.reports.push_back(r.report);
  }
  const auto& bonus = result.bonuses.arms[static_cast<std::size_t>(space.deviator)];
  run.psi = bonus.psi;
  run.degenerate = bonus.degenerate_gap;
  return run;
}

inline double utility_from_pull(const DeviatorRun& run, std::int64_t from_pull) {
  double u = run.psi;
  for (std::size_t i = static_cast<std::size_t>(from_pull); i < run.rewards.size(); ++i)
    u += run.rewards[i] - run.reports[i];
  return u;
}

// Reports prefix fractions before the cut round and policy fractions from it.
class CutoverFractionStrategy final : public ArmStrategy {
 public:
  CutoverFractionStrategy(std::vector<double> prefix, std::vector<double> policy,
                          std::int64_t cut_round)
      : prefix_(std::move(prefix)), policy_(std::move(policy)), cut_(cut_round) {}
  double report(const ArmView& v, Rng&) override {
    double f = 1.0;
    if (v.t < cut_) {
      if (pre_used_ < prefix_.size()) f = prefix_[pre_used_];
      ++pre_used_;
    } else {
      if (post_used_ < policy_.size()) f = policy_[post_used_];
      ++post_used_;
    }
    return std::clamp(f, 0.0, 1.0) * v.reward;
  }
  std::size_t prefix_pulls() const { return pre_used_; }

 private:
  std::vector<double> prefix_;
  std::vector<double> policy_;
  std::int64_t cut_;
  std::size_t pre_used_ = 0;
  std::size_t post_used_ = 0;
};

}  // namespace detail

// Deviating arm's utility from round `cut_round` on: savings collected at its
// pulls from the cut plus its final payout (zero when forfeited). The prefix
// fractions fix its reports before the cut; the policy drives it afterwards.
// Runs on the space's pinned tape, or the first enumerated tape otherwise.
inline double subgame_utility(const DeviationSpace& space, const std::vector<double>& policy,
                              std::int64_t cut_round, const std::vector<double>& prefix = {}) {
  space.validate();
  if (cut_round < 1 || cut_round > space.horizon + 1)
    throw std::out_of_range("cut round outside the game");
  RewardTapes tape;
  if (space.tape) {
    tape = *space.tape;
  } else {
    tape = build_tapes(space).first.front();
  }
  RewardFn rewards = [&space, &tape](int arm, std::int64_t pull) {
    const auto& lane = tape.per_arm[static_cast<std::size_t>(arm)];
    if (pull < static_cast<std::int64_t>(lane.size()))
      return lane[static_cast<std::size_t>(pull)];
    Rng rng(mix_key({space.tape_seed, kTapeStream, 0xFFFF, static_cast<std::uint64_t>(arm),
                     static_cast<std::uint64_t>(pull)}));
    return sample_reward(space.arms[static_cast<std::size_t>(arm)], rng);
  };
  auto cfg = std::make_shared<const GameConfig>(detail::space_config(space));
  const RankMap true_rank = rank_map(cfg->true_means());
  std::vector<std::unique_ptr<ArmStrategy>> strategies;
  detail::CutoverFractionStrategy* cutover = nullptr;
  for (int k = 0; k < cfg->num_arms(); ++k) {
    if (k == space.deviator) {
      auto s = std::make_unique<detail::CutoverFractionStrategy>(prefix, policy, cut_round);
      cutover = s.get();
      strategies.push_back(std::move(s));
    } else {
      strategies.push_back(
          make_strategy(cfg->strategy_profile[static_cast<std::size_t>(k)], true_rank.rank_of(k)));
    }
  }
  EngineOptions opt;
  opt.bonus.cap_enabled = false;
  opt.bonus.ablate = space.ablate_bonus;
  GameResult result = run_game_custom(cfg, 0, rewards, strategies, opt);
  if (prefix.size() > cutover->prefix_pulls())
    throw std::invalid_argument("history prefix longer than the pulls before the cut");
  double u = result.bonuses.arms[static_cast<std::size_t>(space.deviator)].psi;
  for (const auto& r : result.trajectory.rounds)
    if (r.chosen == space.deviator && r.t >= cut_round) u += r.reward - r.report;
  return u;
}

struct Counterexample {
  int tape_index = 0;
  std::int64_t cut_pull = 0;  // deviation applies from this own-pull onward
  std::vector<double> fractions;          // full deviation vector
  std::vector<double> deviator_rewards;   // tape slice, for replay
  double truthful_utility = 0.0;
  double deviation_utility = 0.0;
};

struct DominanceCertificate {
  bool certified = false;
  double min_margin = 0.0;
  std::optional<Counterexample> counterexample;
  std::int64_t policies = 0;
  std::int64_t evaluations = 0;
  std::int64_t tape_count = 0;
  bool tapes_exhaustive = false;
  std::int64_t degenerate_events = 0;       // +inf truthful payouts encountered
  std::int64_t degenerate_comparisons = 0;  // inf-vs-inf margins scored as 0
  std::vector<double> grid;
  double tolerance = 0.0;
  bool ablated = false;
};

// Pathwise dominance sweep: for every tape, every grid policy and every cut,
// compare the policy's continuation utility with the truthful continuation
// from the same prefix. A counterexample is a result, not an error.
inline DominanceCertificate verify_dominance(const DeviationSpace& space) {
  space.validate();
  const PolicyEnumeration en = enumerate_policies(space);
  auto [tapes, exhaustive] = build_tapes(space);

  DominanceCertificate cert;
  cert.policies = en.count;
  cert.tape_count = static_cast<std::int64_t>(tapes.size());
  cert.tapes_exhaustive = exhaustive;
  cert.grid = space.grid;
  cert.tolerance = space.tolerance;
  cert.ablated = space.ablate_bonus;
  cert.min_margin = std::numeric_limits<double>::infinity();

  auto cfg = std::make_shared<const GameConfig>(detail::space_config(space));
  const auto base = static_cast<std::int64_t>(space.grid.size());
  const std::int64_t n = en.pulls;

  for (int ti = 0; ti < static_cast<int>(tapes.size()); ++ti) {
    // One run per fraction vector; margins reuse the cache.
    std::vector<detail::DeviatorRun> runs(static_cast<std::size_t>(en.count));
    for (std::int64_t idx = 0; idx < en.count; ++idx) {
      runs[static_cast<std::size_t>(idx)] = detail::evaluate_fractions(
          cfg, space, tapes[static_cast<std::size_t>(ti)], decode_policy(space, n, idx));
      if (runs[static_cast<std::size_t>(idx)].degenerate) cert.degenerate_events += 1;
    }
    // Truthful continuation of policy `idx` from pull j: overwrite digits
    // j..n-1 with the fraction 1.0 and look the result up in the cache.
    std::int64_t one_digit = 0;
    for (std::size_t g = 0; g < space.grid.size(); ++g)
      if (space.grid[g] == 1.0) one_digit = static_cast<std::int64_t>(g);

    for (std::int64_t idx = 0; idx < en.count; ++idx) {
      const auto& dev = runs[static_cast<std::size_t>(idx)];
      for (std::int64_t j = 0; j <= n; ++j) {
        // Rebuild the index with truthful digits from pull j on.
        std::int64_t star = 0, scale = 1, rest = idx;
        for (std::int64_t i = 0; i < n; ++i) {
          std::int64_t digit = rest % base;
          rest /= base;
          star += (i >= j ? one_digit : digit) * scale;
          scale *= base;
        }
        const auto& truthful = runs[static_cast<std::size_t>(star)];
        cert.evaluations += 1;

        double margin;
        if (truthful.reports == dev.reports) {
          margin = 0.0;  // identical play, identical payout
        } else {
          const double u_star = detail::utility_from_pull(truthful, j);
          const double u_dev = detail::utility_from_pull(dev, j);
          if (std::isinf(u_star) && std::isinf(u_dev)) {
            cert.degenerate_comparisons += 1;
            margin = 0.0;
          } else {
            margin = u_star - u_dev;
          }
          if (margin < -space.tolerance && margin < cert.min_margin) {
            Counterexample ce;
            ce.tape_index = ti;
            ce.cut_pull = j;
            ce.fractions = decode_policy(space, n, idx);
            ce.deviator_rewards = tapes[static_cast<std::size_t>(ti)]
                                      .per_arm[static_cast<std::size_t>(space.deviator)];
            ce.truthful_utility = u_star;
            ce.deviation_utility = u_dev;
            cert.counterexample = ce;
          }
        }
        cert.min_margin = std::min(cert.min_margin, margin);
      }
    }
  }
  cert.certified = cert.min_margin >= -space.tolerance;
  if (cert.certified) cert.counterexample.reset();
  return cert;
}

inline std::string format_certificate(const DominanceCertificate& cert,
                                      const DeviationSpace& space) {
  std::ostringstream os;
  os << "equilibrium dominance certificate\n";
  os << "  arms:";
  for (const auto& a : space.arms) os << " " << distribution_name(a.distribution);
  os << "  horizon=" << space.horizon << "  deviator=" << (space.deviator + 1) << "\n";
  os << "  grid={";
  for (std::size_t i = 0; i < cert.grid.size(); ++i) os << (i ? "," : "") << cert.grid[i];
  os << "}  policies=" << cert.policies << "  tapes=" << cert.tape_count
     << (cert.tapes_exhaustive ? " (exhaustive)" : " (sampled)") << "\n";
  os << "  evaluations=" << cert.evaluations << "  degenerate-payouts=" << cert.degenerate_events
     << "  ablated=" << (cert.ablated ? "yes" : "no") << "\n";
  os << "  min margin = " << cert.min_margin << " (tolerance " << cert.tolerance << ")\n";
  os << "  result: " << (cert.certified ? "CERTIFIED" : "COUNTEREXAMPLE FOUND") << "\n";
  if (cert.counterexample) {
    const auto& ce = *cert.counterexample;
    os << "  counterexample: tape#" << ce.tape_index << " cut-pull=" << ce.cut_pull
       << " fractions=[";
    for (std::size_t i = 0; i < ce.fractions.size(); ++i) os << (i ? "," : "") << ce.fractions[i];
    os << "] rewards=[";
    for (std::size_t i = 0; i < ce.deviator_rewards.size(); ++i)
      os << (i ? "," : "") << ce.deviator_rewards[i];
    os << "]\n  truthful continuation utility = " << ce.truthful_utility
       << ", deviation utility = " << ce.deviation_utility << "\n";
  }
  return os.str();
}

}  // namespace sbandit
