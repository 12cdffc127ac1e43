#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "engine.hpp"
#include "metrics.hpp"

namespace sbandit {

struct NamedProfile {
  std::string name;
  std::vector<StrategyId> per_arm;
};

struct ExperimentConfig {
  GameConfig base;  // strategy_profile filled per profile at run time
  std::vector<NamedProfile> profiles;
  Algo algo = Algo::kStrategicSe;
  std::string out_dir = "out";
};

// --- presets ----------------------------------------------------------------

inline std::vector<StrategyId> preset_profile(const std::string& name, int num_arms) {
  std::vector<StrategyId> p;
  if (name == "truthful") {
    p.assign(static_cast<std::size_t>(num_arms), TruthfulId{});
  } else if (name == "untruthful_arbitrary") {
    p.assign(static_cast<std::size_t>(num_arms), FractionalRandomId{});
  } else if (name == "optimal_reporting") {
    p.assign(static_cast<std::size_t>(num_arms), TopTwoTruthfulId{});
  } else if (name.rfind("m_bounded:", 0) == 0) {
    double m = std::stod(name.substr(10));
    p.assign(static_cast<std::size_t>(num_arms), MBoundedId{m});
  } else {
    throw std::invalid_argument("unknown profile preset: " + name);
  }
  return p;
}

// --- strict JSON parsing ------------------------------------------------------

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw std::invalid_argument(where + ": unknown key '" + it.key() + "'");
  }
}

inline Distribution parse_distribution(const json& j) {
  if (!j.is_object() || !j.contains("dist"))
    throw std::invalid_argument("arm entry must be an object with a 'dist' key");
  const std::string name = j.at("dist").get<std::string>();
  if (name == "bernoulli") {
    reject_unknown_keys(j, {"dist", "p"}, "bernoulli arm");
    return Bernoulli{j.at("p").get<double>()};
  }
  if (name == "uniform") {
    reject_unknown_keys(j, {"dist", "lo", "hi"}, "uniform arm");
    return Uniform{j.at("lo").get<double>(), j.at("hi").get<double>()};
  }
  if (name == "beta") {
    reject_unknown_keys(j, {"dist", "alpha", "beta"}, "beta arm");
    return BetaLaw{j.at("alpha").get<double>(), j.at("beta").get<double>()};
  }
  if (name == "pointmass") {
    reject_unknown_keys(j, {"dist", "v"}, "pointmass arm");
    return PointMass{j.at("v").get<double>()};
  }
  throw std::invalid_argument("unknown distribution: " + name);
}

inline StrategyId parse_strategy(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "truthful") return TruthfulId{};
    if (s == "untruthful_arbitrary" || s == "fractional") return FractionalRandomId{};
    if (s == "top_two_truthful") return TopTwoTruthfulId{};
    if (s.rfind("m_bounded:", 0) == 0) return MBoundedId{std::stod(s.substr(10))};
    throw std::invalid_argument("unknown strategy: " + s);
  }
  if (!j.is_object() || j.size() != 1)
    throw std::invalid_argument("strategy entry must be a name or a one-key object");
  if (j.contains("fractional")) {
    const json& f = j.at("fractional");
    reject_unknown_keys(f, {"fractions", "weights"}, "fractional strategy");
    FractionalRandomId id;
    if (f.contains("fractions")) id.fractions = f.at("fractions").get<std::vector<double>>();
    if (f.contains("weights")) id.weights = f.at("weights").get<std::vector<double>>();
    return id;
  }
  if (j.contains("m_bounded")) return MBoundedId{j.at("m_bounded").get<double>()};
  if (j.contains("scripted")) return ScriptedId{j.at("scripted").get<std::vector<double>>()};
  throw std::invalid_argument("unknown strategy object");
}

}  // namespace detail

inline ExperimentConfig parse_config_json(const nlohmann::json& j, const std::string& where) {
  using detail::reject_unknown_keys;
  if (!j.is_object()) throw std::invalid_argument(where + ": top level must be an object");
  reject_unknown_keys(j,
                      {"arms", "horizon", "epochs", "master_seed", "profile", "profiles", "algo",
                       "outputs"},
                      where);
  ExperimentConfig cfg;
  if (!j.contains("arms")) throw std::invalid_argument(where + ": missing 'arms'");
  int id = 1;
  for (const auto& a : j.at("arms"))
    cfg.base.arms.push_back(ArmSpec{id++, detail::parse_distribution(a)});
  cfg.base.horizon = j.at("horizon").get<std::int64_t>();
  cfg.base.epochs = j.value("epochs", std::int64_t{1});
  cfg.base.master_seed = j.value("master_seed", std::uint64_t{0});
  cfg.out_dir = j.value("outputs", std::string{"out"});

  const std::string algo = j.value("algo", std::string{"s_se"});
  if (algo == "s_se" || algo == "s-se")
    cfg.algo = Algo::kStrategicSe;
  else if (algo == "classic_se" || algo == "classic-se")
    cfg.algo = Algo::kClassicSe;
  else
    throw std::invalid_argument(where + ": unknown algo '" + algo + "'");

  auto parse_profile_entry = [&](const nlohmann::json& p) {
    NamedProfile np;
    if (p.is_string()) {
      np.name = p.get<std::string>();
      np.per_arm = preset_profile(np.name, cfg.base.num_arms());
    } else if (p.is_object()) {
      reject_unknown_keys(p, {"name", "arms"}, where + ": profile");
      np.name = p.at("name").get<std::string>();
      for (const auto& s : p.at("arms")) np.per_arm.push_back(detail::parse_strategy(s));
      if (np.per_arm.size() != cfg.base.arms.size())
        throw std::invalid_argument(where + ": profile must name one strategy per arm");
    } else {
      throw std::invalid_argument(where + ": profile entries must be strings or objects");
    }
    return np;
  };
  if (j.contains("profiles"))
    for (const auto& p : j.at("profiles")) cfg.profiles.push_back(parse_profile_entry(p));
  if (j.contains("profile")) cfg.profiles.push_back(parse_profile_entry(j.at("profile")));
  if (cfg.profiles.empty())
    cfg.profiles.push_back({"truthful", preset_profile("truthful", cfg.base.num_arms())});

  // Full validation: every profile must yield a valid game.
  for (const auto& p : cfg.profiles) {
    GameConfig g = cfg.base;
    g.strategy_profile = p.per_arm;
    g.validate();
  }
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return parse_config_json(j, path);
}

// --- CSV / plot-data emission -------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class OutputSet {
 public:
  ~OutputSet() {
    if (!committed_) {
      for (const auto& p : paths_) {
        std::error_code ec;
        std::filesystem::remove(p, ec);
      }
    }
  }
  std::ofstream open(const std::filesystem::path& p) {
    paths_.push_back(p);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
  }
  void commit() { committed_ = true; }

 private:
  std::vector<std::filesystem::path> paths_;
  bool committed_ = false;
};

}  // namespace detail

struct ProfileArtifacts {
  std::string profile;
  std::filesystem::path trace_csv;
  std::filesystem::path summary_csv;
  std::filesystem::path aggregate_csv;
  std::filesystem::path curve_dat;
  double mean_total_regret = 0.0;       // bonus-inclusive, epoch mean
  double mean_bonus_total = 0.0;
  std::vector<double> mean_cumulative;  // reports-only curve, length T
};

// Runs every profile of the experiment and writes, per profile:
//   trace_<p>.csv     epoch,t,arm,reward,report,phase,active_count
//   summary_<p>.csv   per-epoch stopping data, pulls, bonuses, savings,
//                     utilities and the regret decomposition
//   aggregate_<p>.csv t,mean_cum_regret,stderr   (reports-only, vs mu_2)
//   curve_<p>.dat     two-column plot data; the final point folds in the
//                     mean total bonus
// Partial outputs are removed if anything throws.
inline std::vector<ProfileArtifacts> run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  detail::OutputSet files;
  std::vector<ProfileArtifacts> out;

  for (const auto& profile : cfg.profiles) {
    GameConfig game = cfg.base;
    game.strategy_profile = profile.per_arm;
    game.validate();
    EngineOptions opt;
    opt.algo = cfg.algo;

    const double comparator = true_second_mean(game);
    const int num_arms = game.num_arms();
    const auto horizon = static_cast<std::size_t>(game.horizon);

    ProfileArtifacts art;
    art.profile = profile.name;
    art.trace_csv = fs::path(cfg.out_dir) / ("trace_" + profile.name + ".csv");
    art.summary_csv = fs::path(cfg.out_dir) / ("summary_" + profile.name + ".csv");
    art.aggregate_csv = fs::path(cfg.out_dir) / ("aggregate_" + profile.name + ".csv");
    art.curve_dat = fs::path(cfg.out_dir) / ("curve_" + profile.name + ".dat");

    auto trace = files.open(art.trace_csv);
    trace << "epoch,t,arm,reward,report,phase,active_count\n";
    auto summary = files.open(art.summary_csv);
    summary << "epoch,tau,halted";
    for (int k = 1; k <= num_arms; ++k) summary << ",n_" << k;
    for (int k = 1; k <= num_arms; ++k) summary << ",psi_" << k;
    for (int k = 1; k <= num_arms; ++k) summary << ",s_" << k;
    for (int k = 1; k <= num_arms; ++k) summary << ",u_" << k;
    summary << ",regret_total,regret_exploration,regret_exploitation,regret_bonus\n";

    std::vector<double> sum(horizon, 0.0), sumsq(horizon, 0.0);
    double bonus_sum = 0.0, total_sum = 0.0;

    for (std::int64_t e = 0; e < game.epochs; ++e) {
      GameResult result = run_game(game, e, opt);
      const RegretReport reg = regret(result, comparator);
      const UtilityReport util = utilities(result);

      // Phase label per round: explore until tau, exploit after, halt at end.
      std::int64_t active = num_arms;
      for (const auto& r : result.trajectory.rounds) {
        const char* phase = "explore";
        if (result.tau() && r.t > *result.tau())
          phase = (result.trajectory.halted_at && r.t == *result.trajectory.halted_at)
                      ? "halted"
                      : "exploit";
        // Track the active count as eliminations land.
        active = num_arms;
        for (int k = 0; k < num_arms; ++k)
          if (result.player.tau_of(k) && *result.player.tau_of(k) < r.t) --active;
        trace << e << ',' << r.t << ',' << (r.chosen + 1) << ',' << detail::fmt(r.reward) << ','
              << detail::fmt(r.report) << ',' << phase << ',' << active << '\n';
      }

      summary << e << ',' << (result.tau() ? *result.tau() : -1) << ','
              << (result.halted() ? 1 : 0);
      for (int k = 0; k < num_arms; ++k) summary << ',' << result.pulls(k);
      for (int k = 0; k < num_arms; ++k)
        summary << ',' << detail::fmt(result.bonuses.arms[static_cast<std::size_t>(k)].psi);
      for (int k = 0; k < num_arms; ++k)
        summary << ',' << detail::fmt(result.savings[static_cast<std::size_t>(k)]);
      for (int k = 0; k < num_arms; ++k)
        summary << ',' << detail::fmt(util.utility[static_cast<std::size_t>(k)]);
      summary << ',' << detail::fmt(reg.total) << ',' << detail::fmt(reg.exploration) << ','
              << detail::fmt(reg.exploitation) << ',' << detail::fmt(reg.bonus_total) << '\n';

      // Cumulative curve, held constant past a halt.
      double last = 0.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        if (t < reg.cumulative.size()) last = reg.cumulative[t];
        sum[t] += last;
        sumsq[t] += last * last;
      }
      bonus_sum += reg.bonus_total;
      total_sum += reg.total;
    }

    const double n_ep = static_cast<double>(game.epochs);
    auto aggregate = files.open(art.aggregate_csv);
    aggregate << "t,mean_cum_regret,stderr\n";
    auto curve = files.open(art.curve_dat);
    art.mean_cumulative.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const double mean = sum[t] / n_ep;
      double se = 0.0;
      if (game.epochs > 1) {
        double var = (sumsq[t] - n_ep * mean * mean) / (n_ep - 1.0);
        se = std::sqrt(std::max(0.0, var) / n_ep);
      }
      art.mean_cumulative[t] = mean;
      aggregate << (t + 1) << ',' << detail::fmt(mean) << ',' << detail::fmt(se) << '\n';
      const double curve_value = (t + 1 == horizon) ? mean + bonus_sum / n_ep : mean;
      curve << (t + 1) << ' ' << detail::fmt(curve_value) << '\n';
    }
    art.mean_bonus_total = bonus_sum / n_ep;
    art.mean_total_regret = total_sum / n_ep;
    out.push_back(std::move(art));
  }
  files.commit();
  return out;
}

}  // namespace sbandit
