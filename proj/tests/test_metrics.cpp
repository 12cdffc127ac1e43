#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbandit/engine.hpp"
#include "sbandit/metrics.hpp"

using namespace sbandit;

namespace {

Trajectory reports_only(std::vector<double> reports) {
  Trajectory traj;
  for (std::size_t i = 0; i < reports.size(); ++i)
    traj.rounds.push_back({static_cast<std::int64_t>(i) + 1, 0, 1.0, reports[i]});
  return traj;
}

BonusReport flat_bonus(int arms, double each) {
  BonusReport rep;
  rep.arms.resize(static_cast<std::size_t>(arms));
  for (auto& a : rep.arms) a.psi = each;
  return rep;
}

}  // namespace

TEST_CASE("regret is shortfall plus payouts") {
  // Two rounds of 0.5 against a 0.6 benchmark, one unit of bonus.
  auto traj = reports_only({0.5, 0.5});
  auto rep = regret(traj, flat_bonus(1, 1.0), 0.6);
  CHECK(rep.total == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(rep.report_total == doctest::Approx(0.2));
  CHECK(rep.cumulative.size() == 2);
  CHECK(rep.cumulative[1] == doctest::Approx(0.2));

  // Reporting the benchmark exactly with no payouts: zero regret.
  auto zero = regret(reports_only({0.6, 0.6, 0.6}), flat_bonus(1, 0.0), 0.6);
  CHECK(zero.total == doctest::Approx(0.0));

  // All-zero reports: the benchmark accrues linearly.
  auto worst = regret(reports_only(std::vector<double>(10, 0.0)), flat_bonus(1, 0.0), 0.6);
  CHECK(worst.total == doctest::Approx(6.0));
}

TEST_CASE("regret splits at the commitment round") {
  auto traj = reports_only({0.1, 0.2, 0.3, 0.4});
  auto rep = regret(traj, flat_bonus(1, 0.5), 0.5, /*tau=*/2);
  CHECK(rep.exploration == doctest::Approx((0.5 - 0.1) + (0.5 - 0.2)));
  CHECK(rep.exploitation == doctest::Approx((0.5 - 0.3) + (0.5 - 0.4)));
  CHECK(rep.total == doctest::Approx(rep.exploration + rep.exploitation + 0.5));
}

TEST_CASE("revenue identity holds on every trajectory") {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    GameConfig cfg;
    cfg.arms = {ArmSpec{1, Bernoulli{0.7}}, ArmSpec{2, Bernoulli{0.3}}};
    cfg.horizon = 100 + static_cast<std::int64_t>(rng.next_below(200));
    cfg.strategy_profile = {FractionalRandomId{}, FractionalRandomId{}};
    cfg.master_seed = rng.next_u64();
    GameResult r = run_game(cfg, 0);
    const double comparator = true_second_mean(*r.config);
    auto rep = regret(r, comparator);
    double revenue = 0.0;
    for (const auto& round : r.trajectory.rounds) revenue += round.report;
    const double rounds = static_cast<double>(r.trajectory.num_rounds());
    CHECK(revenue ==
          doctest::Approx(comparator * rounds - (rep.total - rep.bonus_total)).epsilon(1e-9));
  }
}

TEST_CASE("utilities are savings plus payout") {
  GameConfig cfg;
  cfg.arms = {ArmSpec{1, PointMass{0.9}}, ArmSpec{2, PointMass{0.1}}};
  cfg.horizon = 2000;
  cfg.strategy_profile = {TruthfulId{}, TruthfulId{}};
  GameResult r = run_game(cfg, 0);
  auto rep = utilities(r);
  // Truthful arms save nothing: utility equals the payout.
  CHECK(rep.savings[0] == 0.0);
  CHECK(rep.utility[0] == doctest::Approx(rep.bonus[0]));
  CHECK(rep.utility[1] == doctest::Approx(rep.bonus[1]));

  // A pure withholder's utility is its savings.
  GameConfig held = cfg;
  held.strategy_profile = {TruthfulId{}, ScriptedId{std::vector<double>(2000, 0.0)}};
  EngineOptions opt;
  opt.bonus.ablate = true;
  GameResult r2 = run_game(held, 0, opt);
  auto rep2 = utilities(r2);
  CHECK(rep2.utility[1] == doctest::Approx(0.1 * static_cast<double>(r2.pulls(1))));
}

TEST_CASE("a budgeted arm's utility is capped by budget plus payout") {
  GameConfig cfg;
  cfg.arms = {ArmSpec{1, PointMass{0.9}}, ArmSpec{2, Bernoulli{0.6}}};
  cfg.horizon = 3000;
  cfg.strategy_profile = {TruthfulId{}, MBoundedId{0.5}};
  GameResult r = run_game(cfg, 0);
  auto rep = utilities(r);
  CHECK(rep.savings[1] <= 0.5 + 1e-12);
  CHECK(rep.utility[1] <= 0.5 + rep.bonus[1] + 1e-12);
}

TEST_CASE("windowed savings isolate a time slice") {
  Trajectory traj;
  traj.rounds = {{1, 0, 0.8, 0.5}, {2, 1, 0.6, 0.6}, {3, 0, 0.9, 0.0}, {4, 0, 0.4, 0.4}};
  CHECK(windowed_savings(traj, 0, 1, 4) == doctest::Approx(0.3 + 0.9));
  CHECK(windowed_savings(traj, 0, 3, 4) == doctest::Approx(0.9));
  CHECK(windowed_savings(traj, 1, 1, 4) == doctest::Approx(0.0));
  CHECK(windowed_savings(traj, 0, 4, 4) == doctest::Approx(0.0));
}

TEST_CASE("pull-bound oracles at the default instance") {
  GameConfig cfg;
  cfg.arms = {ArmSpec{1, Bernoulli{0.9}}, ArmSpec{2, Bernoulli{0.1}}};
  cfg.horizon = 10000;
  cfg.strategy_profile = {TruthfulId{}, TruthfulId{}};
  Thresholds th = thresholds(cfg);
  CHECK(th.se_pull_bound[1] == doctest::Approx(460.51701859880916).epsilon(1e-12));
  CHECK(std::isinf(th.se_pull_bound[0]));
  // Two arms: the first-phase bound collapses to twice the loser's bound.
  CHECK(th.exploration_phase_bound == doctest::Approx(2 * 460.51701859880916).epsilon(1e-12));
  CHECK(th.best_utility_bound == doctest::Approx(2.0 * 10000 * 0.8 + 1.0));
}

TEST_CASE("pull bounds shrink as gaps grow") {
  double prev = std::numeric_limits<double>::infinity();
  for (double gap : {0.1, 0.2, 0.4, 0.8}) {
    GameConfig cfg;
    cfg.arms = {ArmSpec{1, PointMass{0.9}}, ArmSpec{2, PointMass{0.9 - gap}}};
    cfg.horizon = 1000;
    cfg.strategy_profile = {TruthfulId{}, TruthfulId{}};
    double bound = thresholds(cfg).se_pull_bound[1];
    CHECK(bound < prev);
    prev = bound;
  }
}

TEST_CASE("budget-limited pull bound uses the looser savings constant") {
  // With no savings budget the logarithmic term is everything.
  const double log_t = std::log(10000.0);
  CHECK(m_bounded_pull_bound(10000, 0.0, 0.3) ==
        doctest::Approx(162.0 * log_t / 0.09).epsilon(1e-12));
  // A large budget switches the max over.
  CHECK(m_bounded_pull_bound(10000, 1e6, 0.3) == doctest::Approx(6.0 * 1e6 / 0.3));
  CHECK(m_bounded_pull_bound(10000, 1e6, 0.3, /*tight=*/true) ==
        doctest::Approx(3.0 * 1e6 / 0.3));
  CHECK(std::isinf(m_bounded_pull_bound(10000, 1.0, 0.0)));
}

TEST_CASE("explicit-constant regret bound at the bundled means") {
  GameConfig cfg;
  const double means[] = {0.9, 0.8, 0.6, 0.5, 0.4, 0.3};
  for (int k = 0; k < 6; ++k) {
    cfg.arms.push_back(ArmSpec{k + 1, Bernoulli{means[k]}});
    cfg.strategy_profile.push_back(TruthfulId{});
  }
  cfg.horizon = 10000;
  Thresholds th = thresholds(cfg);
  CHECK(th.regret_upper_bound == doctest::Approx(19346.80570330497).epsilon(1e-9));
}

TEST_CASE("effective means track reports, not rewards") {
  GameConfig cfg;
  cfg.arms = {ArmSpec{1, PointMass{0.9}}, ArmSpec{2, PointMass{0.4}}};
  cfg.horizon = 600;
  cfg.strategy_profile = {TruthfulId{}, TruthfulId{}};
  GameResult truthful = run_game(cfg, 0);
  auto rep = effective_means(truthful);
  CHECK(rep.effective_mean[0].value() == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(rep.effective_mean[1].value() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(rep.effective_gap_from_best[1] == doctest::Approx(0.5).epsilon(1e-9));

  cfg.strategy_profile = {TruthfulId{}, ScriptedId{std::vector<double>(600, 0.0)}};
  GameResult silent = run_game(cfg, 0);
  CHECK(effective_means(silent).effective_mean[1].value() == 0.0);
}

TEST_CASE("fractional reporting lands near the fraction-set average") {
  GameConfig cfg;
  cfg.arms = {ArmSpec{1, PointMass{1.0}}, ArmSpec{2, PointMass{1.0}}};
  cfg.horizon = 20000;
  cfg.strategy_profile = {FractionalRandomId{}, FractionalRandomId{}};
  GameResult r = run_game(cfg, 0);
  auto rep = effective_means(r);
  CHECK(std::abs(rep.effective_mean[0].value() - 0.42) < 0.02);
  CHECK(std::abs(rep.effective_mean[1].value() - 0.42) < 0.02);
}

TEST_CASE("under truthful play the effective benchmark approaches the true one") {
  GameConfig cfg;
  const double means[] = {0.9, 0.8, 0.6, 0.5, 0.4, 0.3};
  for (int k = 0; k < 6; ++k) {
    cfg.arms.push_back(ArmSpec{k + 1, Bernoulli{means[k]}});
    cfg.strategy_profile.push_back(TruthfulId{});
  }
  double tolerance = 0.1;
  for (std::int64_t horizon : {1000, 10000}) {
    cfg.horizon = horizon;
    double worst = 0.0;
    for (std::int64_t e = 0; e < 20; ++e) {
      GameResult r = run_game(cfg, e);
      worst = std::max(worst, std::abs(effective_second_mean(r) - 0.8));
    }
    CHECK(worst < tolerance);
    tolerance /= 2.0;  // the gap shrinks with the horizon
  }
}

TEST_CASE("thresholds are pure functions of the configuration") {
  GameConfig cfg;
  cfg.arms = {ArmSpec{1, Bernoulli{0.9}}, ArmSpec{2, Bernoulli{0.2}}};
  cfg.horizon = 5000;
  cfg.strategy_profile = {TruthfulId{}, TruthfulId{}};
  Thresholds a = thresholds(cfg);
  Thresholds b = thresholds(cfg);
  CHECK(a.se_pull_bound[1] == b.se_pull_bound[1]);
  CHECK(a.regret_upper_bound == b.regret_upper_bound);
  CHECK(a.exploration_phase_bound == b.exploration_phase_bound);
}
