#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rng.hpp"

namespace sbandit {

// ---------------------------------------------------------------------------
// Reward distributions, all supported on [0, 1].
// ---------------------------------------------------------------------------

struct Bernoulli {
  double p = 0.5;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
struct BetaLaw {
  double alpha = 1.0;
  double beta = 1.0;
};
struct PointMass {
  double value = 0.0;
};

using Distribution = std::variant<Bernoulli, Uniform, BetaLaw, PointMass>;

inline void validate_distribution(const Distribution& d) {
  struct V {
    void operator()(const Bernoulli& b) const {
      if (!(b.p >= 0.0 && b.p <= 1.0))
        throw std::invalid_argument("bernoulli p must lie in [0,1]");
    }
    void operator()(const Uniform& u) const {
      if (!(u.lo >= 0.0 && u.lo <= u.hi && u.hi <= 1.0))
        throw std::invalid_argument("uniform support must satisfy 0 <= lo <= hi <= 1");
    }
    void operator()(const BetaLaw& b) const {
      if (!(b.alpha > 0.0) || !(b.beta > 0.0))
        throw std::invalid_argument("beta shape parameters must be positive");
    }
    void operator()(const PointMass& p) const {
      if (!(p.value >= 0.0 && p.value <= 1.0))
        throw std::invalid_argument("point mass must lie in [0,1]");
    }
  };
  std::visit(V{}, d);
}

// Analytic expectation, per family.
inline double distribution_mean(const Distribution& d) {
  struct V {
    double operator()(const Bernoulli& b) const { return b.p; }
    double operator()(const Uniform& u) const { return 0.5 * (u.lo + u.hi); }
    double operator()(const BetaLaw& b) const { return b.alpha / (b.alpha + b.beta); }
    double operator()(const PointMass& p) const { return p.value; }
  };
  return std::visit(V{}, d);
}

inline std::string distribution_name(const Distribution& d) {
  struct V {
    std::string operator()(const Bernoulli&) const { return "bernoulli"; }
    std::string operator()(const Uniform&) const { return "uniform"; }
    std::string operator()(const BetaLaw&) const { return "beta"; }
    std::string operator()(const PointMass&) const { return "pointmass"; }
  };
  return std::visit(V{}, d);
}

struct ArmSpec {
  int id = 0;  // 1-based arm index
  Distribution distribution;

  double mean() const { return distribution_mean(distribution); }
  void validate() const { validate_distribution(distribution); }
};

// One i.i.d. draw; advances the rng state deterministically.
double sample_reward(const ArmSpec& spec, Rng& rng);

namespace detail {

// Marsaglia polar method.
inline double sample_normal(Rng& rng) {
  for (;;) {
    double u = 2.0 * rng.next_unit() - 1.0;
    double v = 2.0 * rng.next_unit() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

// Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
inline double sample_gamma(double shape, Rng& rng) {
  if (shape < 1.0) {
    double u = rng.next_unit();
    while (u <= 0.0) u = rng.next_unit();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = sample_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = rng.next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace detail

inline double sample_reward(const ArmSpec& spec, Rng& rng) {
  struct V {
    Rng& rng;
    double operator()(const Bernoulli& b) const { return rng.next_unit() < b.p ? 1.0 : 0.0; }
    double operator()(const Uniform& u) const { return u.lo + rng.next_unit() * (u.hi - u.lo); }
    double operator()(const BetaLaw& b) const {
      double x = detail::sample_gamma(b.alpha, rng);
      double y = detail::sample_gamma(b.beta, rng);
      double r = x / (x + y);
      return std::clamp(r, 0.0, 1.0);
    }
    double operator()(const PointMass& p) const { return p.value; }
  };
  return std::visit(V{rng}, spec.distribution);
}

// ---------------------------------------------------------------------------
// Arm strategy identifiers (behaviour lives in strategies.hpp).
// ---------------------------------------------------------------------------

struct TruthfulId {};
struct FractionalRandomId {
  std::vector<double> fractions{1.0, 0.6, 0.4, 0.1, 0.0};
  std::vector<double> weights;  // empty = uniform
};
struct TopTwoTruthfulId {};
struct MBoundedId {
  double budget = 0.0;  // M >= 0
};
struct ScriptedId {
  std::vector<double> reports;  // indexed by own pull count, clamped to [0, r]
};

using StrategyId =
    std::variant<TruthfulId, FractionalRandomId, TopTwoTruthfulId, MBoundedId, ScriptedId>;

inline void validate_strategy_id(const StrategyId& s) {
  struct V {
    void operator()(const TruthfulId&) const {}
    void operator()(const FractionalRandomId& f) const {
      if (f.fractions.empty()) throw std::invalid_argument("fraction set must be non-empty");
      for (double x : f.fractions)
        if (!(x >= 0.0 && x <= 1.0))
          throw std::invalid_argument("fraction outside [0,1]");
      if (!f.weights.empty()) {
        if (f.weights.size() != f.fractions.size())
          throw std::invalid_argument("weights must match fractions");
        double sum = 0.0;
        for (double w : f.weights) {
          if (!(w >= 0.0)) throw std::invalid_argument("negative fraction weight");
          sum += w;
        }
        if (!(sum > 0.0)) throw std::invalid_argument("fraction weights sum to zero");
      }
    }
    void operator()(const TopTwoTruthfulId&) const {}
    void operator()(const MBoundedId& m) const {
      if (!(m.budget >= 0.0)) throw std::invalid_argument("savings budget must be >= 0");
    }
    void operator()(const ScriptedId& s) const {
      for (double x : s.reports)
        if (!(x >= 0.0 && x <= 1.0))
          throw std::invalid_argument("scripted report outside [0,1]");
    }
  };
  std::visit(V{}, s);
}

inline std::string strategy_name(const StrategyId& s) {
  struct V {
    std::string operator()(const TruthfulId&) const { return "truthful"; }
    std::string operator()(const FractionalRandomId&) const { return "fractional_random"; }
    std::string operator()(const TopTwoTruthfulId&) const { return "top_two_truthful"; }
    std::string operator()(const MBoundedId&) const { return "m_bounded"; }
    std::string operator()(const ScriptedId&) const { return "scripted"; }
  };
  return std::visit(V{}, s);
}

// ---------------------------------------------------------------------------
// Game configuration.
// ---------------------------------------------------------------------------

struct GameConfig {
  std::vector<ArmSpec> arms;                // K >= 2
  std::int64_t horizon = 0;                 // T >= 2
  std::vector<StrategyId> strategy_profile; // one per arm
  std::uint64_t master_seed = 0;
  std::int64_t epochs = 1;

  int num_arms() const { return static_cast<int>(arms.size()); }

  std::vector<double> true_means() const {
    std::vector<double> m;
    m.reserve(arms.size());
    for (const auto& a : arms) m.push_back(a.mean());
    return m;
  }

  void validate() const {
    if (arms.size() < 2)
      throw std::invalid_argument("need at least two arms (single-arm games have no second-best benchmark)");
    if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (strategy_profile.size() != arms.size())
      throw std::invalid_argument("strategy profile must name one strategy per arm");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      arms[i].validate();
      if (arms[i].id != static_cast<int>(i) + 1)
        throw std::invalid_argument("arm ids must be 1..K in order");
      validate_strategy_id(strategy_profile[i]);
    }
  }
};

// ---------------------------------------------------------------------------
// Round records and trajectories.
// ---------------------------------------------------------------------------

struct RoundRecord {
  std::int64_t t = 0;    // 1-based round index
  int chosen = 0;        // 0-based arm index
  double reward = 0.0;   // arm-private
  double report = 0.0;   // player-visible, 0 <= report <= reward
};

struct Trajectory {
  const GameConfig* config = nullptr;
  std::vector<RoundRecord> rounds;
  std::optional<std::int64_t> halted_at;

  std::int64_t num_rounds() const { return static_cast<std::int64_t>(rounds.size()); }

  // Structural invariants; used by tests and debug checks.
  void check() const {
    for (std::size_t i = 0; i < rounds.size(); ++i) {
      const auto& r = rounds[i];
      if (r.t != static_cast<std::int64_t>(i) + 1)
        throw std::logic_error("round indices must be contiguous from 1");
      if (!(r.report >= 0.0 && r.report <= r.reward && r.reward <= 1.0))
        throw std::logic_error("debt-free reporting violated");
      if (halted_at && r.t > *halted_at) throw std::logic_error("round recorded after halt");
    }
  }
};

// Player-visible projection of one round: the chosen arm and its report.
struct PlayerViewEntry {
  int chosen = 0;
  double report = 0.0;
};

// Everything the player has seen before round t. Rewards never leak.
inline std::vector<PlayerViewEntry> player_view(const Trajectory& traj, std::int64_t t) {
  if (t < 1 || t > traj.num_rounds() + 1)
    throw std::out_of_range("player_view: round out of range");
  std::vector<PlayerViewEntry> out;
  out.reserve(static_cast<std::size_t>(t - 1));
  for (std::int64_t s = 0; s < t - 1; ++s)
    out.push_back({traj.rounds[static_cast<std::size_t>(s)].chosen,
                   traj.rounds[static_cast<std::size_t>(s)].report});
  return out;
}

struct OwnRound {
  std::int64_t t = 0;
  double reward = 0.0;
  double report = 0.0;
};

// An arm's private projection: its own past (reward, report) pairs, the full
// pull sequence, and the current reward when it is the arm on stage.
struct ArmHistory {
  int arm = 0;
  std::vector<int> pull_sequence;        // k_s for s < t
  std::vector<OwnRound> own;             // rounds with k_s == arm, s < t
  std::optional<double> current_reward;  // set when round t exists and k_t == arm
};

inline ArmHistory arm_view(const Trajectory& traj, int arm, std::int64_t t) {
  const int k = arm;
  const int num_arms = traj.config ? traj.config->num_arms() : 0;
  if (k < 0 || (num_arms > 0 && k >= num_arms))
    throw std::out_of_range("arm_view: invalid arm index");
  if (t < 1 || t > traj.num_rounds() + 1)
    throw std::out_of_range("arm_view: round out of range");
  ArmHistory h;
  h.arm = k;
  for (std::int64_t s = 0; s < t - 1; ++s) {
    const auto& r = traj.rounds[static_cast<std::size_t>(s)];
    h.pull_sequence.push_back(r.chosen);
    if (r.chosen == k) h.own.push_back({r.t, r.reward, r.report});
  }
  if (t <= traj.num_rounds()) {
    const auto& now = traj.rounds[static_cast<std::size_t>(t - 1)];
    if (now.chosen == k) h.current_reward = now.reward;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Rank maps: order[r] is the index of the (r+1)-th highest value; ties break
// toward the lower index. inverse[i] is the rank of index i.
// ---------------------------------------------------------------------------

struct RankMap {
  std::vector<int> order;
  std::vector<int> inverse;

  int top() const { return order.at(0); }
  int second() const { return order.at(1); }
  int rank_of(int index) const { return inverse.at(static_cast<std::size_t>(index)); }
};

inline RankMap rank_map(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("rank_map: empty input");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("rank_map: non-finite value");
  RankMap rm;
  rm.order.resize(values.size());
  std::iota(rm.order.begin(), rm.order.end(), 0);
  std::stable_sort(rm.order.begin(), rm.order.end(), [&](int a, int b) {
    if (values[static_cast<std::size_t>(a)] != values[static_cast<std::size_t>(b)])
      return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
    return a < b;
  });
  rm.inverse.assign(values.size(), 0);
  for (std::size_t r = 0; r < rm.order.size(); ++r)
    rm.inverse[static_cast<std::size_t>(rm.order[r])] = static_cast<int>(r);
  return rm;
}

// Reward source abstraction: reward of `arm` at its `pull_index`-th pull
// (0-based). Lets the engine run from live distributions or fixed tapes.
using RewardFn = std::function<double(int arm, std::int64_t pull_index)>;

}  // namespace sbandit
