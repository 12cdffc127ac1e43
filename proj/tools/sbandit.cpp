// Command-line front end: `run` executes a configured experiment and writes
// CSV/plot artifacts; `verify` runs the small-scale equilibrium dominance
// check and prints its certificate.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbandit/experiment.hpp"
#include "sbandit/verifier.hpp"

namespace {

sbandit::ArmSpec parse_arm_flag(const std::string& text, int id) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw CLI::ValidationError("--arm", "empty arm spec");
  const std::string& kind = parts[0];
  auto num = [&](std::size_t i) { return std::stod(parts.at(i)); };
  sbandit::Distribution dist;
  if (kind == "bernoulli" && parts.size() == 2)
    dist = sbandit::Bernoulli{num(1)};
  else if (kind == "pointmass" && parts.size() == 2)
    dist = sbandit::PointMass{num(1)};
  else if (kind == "uniform" && parts.size() == 3)
    dist = sbandit::Uniform{num(1), num(2)};
  else if (kind == "beta" && parts.size() == 3)
    dist = sbandit::BetaLaw{num(1), num(2)};
  else
    throw CLI::ValidationError("--arm", "expected dist:param[:param], e.g. bernoulli:0.5");
  return sbandit::ArmSpec{id, dist};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strategic multi-armed bandit simulator"};
  app.require_subcommand(1);

  // --- run -------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run a configured experiment");
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::int64_t> epochs_override;
  std::optional<std::string> out_override, algo_override, profile_override;
  run->add_option("--config", config_path, "experiment config file (JSON)")->required();
  run->add_option("--seed", seed_override, "override master seed");
  run->add_option("--epochs", epochs_override, "override epoch count");
  run->add_option("--out", out_override, "override output directory");
  run->add_option("--algo", algo_override, "player algorithm: s-se | classic-se");
  run->add_option("--profile", profile_override,
                  "run a single profile: a configured name or a preset");

  // --- verify ----------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "equilibrium dominance check at desk scale");
  std::int64_t v_horizon = 6;
  std::vector<std::string> v_arms;
  std::string v_grid = "0,1";
  int v_deviator = 2;
  std::int64_t v_budget = 1 << 14;
  int v_sampled = 64;
  std::uint64_t v_seed = 1;
  bool v_ablate = false;
  std::string v_out;
  verify->add_option("--horizon", v_horizon, "game length (2..8)");
  verify->add_option("--arm", v_arms,
                     "arm spec dist:params (repeatable); default pointmass:1.0 bernoulli:0.5");
  verify->add_option("--grid", v_grid, "comma-separated report fractions; must include 1");
  verify->add_option("--deviator", v_deviator, "1-based index of the deviating arm");
  verify->add_option("--budget", v_budget, "policy enumeration budget");
  verify->add_option("--sampled-tapes", v_sampled, "tape count when not exhaustive");
  verify->add_option("--tape-seed", v_seed, "seed for sampled tapes");
  verify->add_flag("--ablate-bonus", v_ablate, "pay no bonuses (expects a counterexample)");
  verify->add_option("--out", v_out, "also write the certificate to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      sbandit::ExperimentConfig cfg = sbandit::parse_config(config_path);
      if (seed_override) cfg.base.master_seed = *seed_override;
      if (epochs_override) cfg.base.epochs = *epochs_override;
      if (out_override) cfg.out_dir = *out_override;
      if (algo_override) {
        if (*algo_override == "s-se" || *algo_override == "s_se")
          cfg.algo = sbandit::Algo::kStrategicSe;
        else if (*algo_override == "classic-se" || *algo_override == "classic_se")
          cfg.algo = sbandit::Algo::kClassicSe;
        else
          throw std::invalid_argument("unknown --algo: " + *algo_override);
      }
      if (profile_override) {
        std::vector<sbandit::NamedProfile> keep;
        for (auto& p : cfg.profiles)
          if (p.name == *profile_override) keep.push_back(p);
        if (keep.empty())
          keep.push_back({*profile_override,
                          sbandit::preset_profile(*profile_override, cfg.base.num_arms())});
        cfg.profiles = std::move(keep);
      }
      auto artifacts = sbandit::run_experiment(cfg);
      for (const auto& a : artifacts) {
        std::cout << "profile " << a.profile << ": mean total regret (with bonuses) = "
                  << a.mean_total_regret << ", mean bonus = " << a.mean_bonus_total << "\n";
        std::cout << "  wrote " << a.trace_csv.string() << ", " << a.summary_csv.string() << ", "
                  << a.aggregate_csv.string() << ", " << a.curve_dat.string() << "\n";
      }
      return 0;
    }

    if (*verify) {
      sbandit::DeviationSpace space;
      space.horizon = v_horizon;
      space.policy_budget = v_budget;
      space.sampled_tapes = v_sampled;
      space.tape_seed = v_seed;
      space.ablate_bonus = v_ablate;
      if (v_arms.empty()) {
        space.arms = {sbandit::ArmSpec{1, sbandit::PointMass{1.0}},
                      sbandit::ArmSpec{2, sbandit::Bernoulli{0.5}}};
      } else {
        int id = 1;
        for (const auto& s : v_arms) space.arms.push_back(parse_arm_flag(s, id++));
      }
      space.deviator = v_deviator - 1;
      space.grid.clear();
      std::stringstream ss(v_grid);
      std::string item;
      while (std::getline(ss, item, ',')) space.grid.push_back(std::stod(item));

      auto cert = sbandit::verify_dominance(space);
      const std::string report = sbandit::format_certificate(cert, space);
      std::cout << report;
      if (!v_out.empty()) {
        std::ofstream out(v_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + v_out);
        out << report;
      }
      return cert.certified ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
