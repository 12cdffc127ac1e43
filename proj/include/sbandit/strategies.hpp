#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace sbandit {

// What an arm may read when asked for a report (the tacit model): its own
// past rounds, the pull sequence, and the reward it just observed.
struct ArmView {
  int arm = 0;
  std::int64_t t = 0;            // current round
  std::int64_t pull_index = 0;   // 0-based count of own earlier pulls
  double reward = 0.0;           // r_{k_t,t}, just observed
  double savings = 0.0;          // accumulated r - x over own earlier pulls
  std::span<const OwnRound> own_history;
  std::span<const int> pull_sequence;
};

class ArmStrategy {
 public:
  virtual ~ArmStrategy() = default;
  // Must return a value in [0, view.reward]; the engine clamps as a backstop.
  virtual double report(const ArmView& view, Rng& rng) = 0;
};

// --- report rules as free functions (unit-testable in isolation) -----------

inline double truthful_report(double reward) { return reward; }

inline double fractional_report(double reward, Rng& rng, const std::vector<double>& fractions,
                                const std::vector<double>& weights) {
  double f;
  if (weights.empty()) {
    f = fractions[static_cast<std::size_t>(rng.next_below(fractions.size()))];
  } else {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.next_unit() * total;
    std::size_t i = 0;
    for (; i + 1 < weights.size(); ++i) {
      if (u < weights[i]) break;
      u -= weights[i];
    }
    f = fractions[i];
  }
  return f * reward;
}

// `true_rank` is 0-based rank by true mean (simulation-side knowledge).
inline double top_two_truthful_report(int true_rank, double reward) {
  return true_rank <= 1 ? reward : 0.0;
}

// Withhold until the savings budget M is exhausted, then report truthfully.
inline double m_bounded_report(double reward, double savings_so_far, double budget) {
  double withhold = std::min(reward, std::max(0.0, budget - savings_so_far));
  return reward - withhold;
}

// --- strategy objects -------------------------------------------------------

class TruthfulStrategy final : public ArmStrategy {
 public:
  double report(const ArmView& v, Rng&) override { return truthful_report(v.reward); }
};

class FractionalRandomStrategy final : public ArmStrategy {
 public:
  explicit FractionalRandomStrategy(FractionalRandomId id) : id_(std::move(id)) {}
  double report(const ArmView& v, Rng& rng) override {
    return fractional_report(v.reward, rng, id_.fractions, id_.weights);
  }

 private:
  FractionalRandomId id_;
};

class TopTwoTruthfulStrategy final : public ArmStrategy {
 public:
  explicit TopTwoTruthfulStrategy(int true_rank) : true_rank_(true_rank) {}
  double report(const ArmView& v, Rng&) override {
    return top_two_truthful_report(true_rank_, v.reward);
  }

 private:
  int true_rank_;
};

class MBoundedStrategy final : public ArmStrategy {
 public:
  explicit MBoundedStrategy(double budget) : budget_(budget) {}
  double report(const ArmView& v, Rng&) override {
    return m_bounded_report(v.reward, v.savings, budget_);
  }

 private:
  double budget_;
};

class ScriptedStrategy final : public ArmStrategy {
 public:
  explicit ScriptedStrategy(std::vector<double> reports) : reports_(std::move(reports)) {}
  double report(const ArmView& v, Rng&) override {
    if (reports_.empty()) return 0.0;
    std::size_t i = std::min(static_cast<std::size_t>(v.pull_index), reports_.size() - 1);
    return std::clamp(reports_[i], 0.0, v.reward);
  }

 private:
  std::vector<double> reports_;
};

// Reports fraction[pull_index] * reward; the deviation policies the
// equilibrium checker enumerates.
class FractionPolicyStrategy final : public ArmStrategy {
 public:
  explicit FractionPolicyStrategy(std::vector<double> fractions)
      : fractions_(std::move(fractions)) {}
  double report(const ArmView& v, Rng&) override {
    std::size_t i = static_cast<std::size_t>(v.pull_index);
    double f = i < fractions_.size() ? fractions_[i] : 1.0;
    return std::clamp(f, 0.0, 1.0) * v.reward;
  }

 private:
  std::vector<double> fractions_;
};

// `true_rank` feeds TopTwoTruthful; pass the arm's 0-based rank by true mean.
inline std::unique_ptr<ArmStrategy> make_strategy(const StrategyId& id, int true_rank) {
  struct V {
    int rank;
    std::unique_ptr<ArmStrategy> operator()(const TruthfulId&) const {
      return std::make_unique<TruthfulStrategy>();
    }
    std::unique_ptr<ArmStrategy> operator()(const FractionalRandomId& f) const {
      return std::make_unique<FractionalRandomStrategy>(f);
    }
    std::unique_ptr<ArmStrategy> operator()(const TopTwoTruthfulId&) const {
      return std::make_unique<TopTwoTruthfulStrategy>(rank);
    }
    std::unique_ptr<ArmStrategy> operator()(const MBoundedId& m) const {
      return std::make_unique<MBoundedStrategy>(m.budget);
    }
    std::unique_ptr<ArmStrategy> operator()(const ScriptedId& s) const {
      return std::make_unique<ScriptedStrategy>(s.reports);
    }
  };
  return std::visit(V{true_rank}, id);
}

}  // namespace sbandit
