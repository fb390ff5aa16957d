#include <iostream>

#include "command.hpp"
#include "lasrl/bandit.hpp"
#include "lasrl/csv.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/stats.hpp"
#include "tool_support.hpp"

namespace lasrl::cli {

namespace {

std::vector<std::size_t> parse_hidden(const std::string& text) {
  std::vector<std::size_t> widths;
  for (const auto& item : split_list(text)) {
    std::size_t w = 0;
    try {
      std::size_t used = 0;
      w = std::stoul(item, &used);
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw ConfigError("hidden layer widths must be comma separated integers, got '" + text + "'");
    }
    if (w == 0) {
      throw ConfigError("hidden layer widths must be positive");
    }
    widths.push_back(w);
  }
  return widths;
}

}  // namespace

std::vector<Option> bandit_options(const std::string& hidden) {
  return {
      {"K", json(std::uint64_t{10}), "number of base actions"},
      {"a", json(std::uint64_t{400}), "copies of every base action"},
      {"context_dim", json(std::uint64_t{10}), "context dimension"},
      {"noise_sd", json(0.1), "reward noise standard deviation"},
      {"steps", json(std::uint64_t{5000}), "steps per trial"},
      {"trials", json(std::uint64_t{50}), "trials per variant"},
      {"variants", json("all"), "comma separated variants, or all"},
      {"hidden", json(hidden), "hidden layer widths"},
      {"lr", json(0.3), "learning rate"},
      {"momentum", json(0.0), "Nesterov momentum"},
      {"clip", json(0.1), "gradient norm clip"},
      {"output_scale", json(1.0), "output layer init bound, times 1/sqrt(fan_in)"},
      {"baseline_decay", json(0.99), "decay of the moving-average reward baseline"},
      {"window", json(std::uint64_t{20}), "moving-average window of the learning curves"},
      {"final_window", json(std::uint64_t{1000}), "steps averaged for the final reward"},
      {"trial_log", json(true), "write the per-step trials.csv"},
      {"seed", json(std::uint64_t{1}), "master seed"},
  };
}

bandit::ExperimentConfig bandit_config(const RunContext& ctx) {
  bandit::ExperimentConfig c;
  c.env.num_base = ctx.size("K");
  c.env.duplication = ctx.size("a");
  c.env.context_dim = ctx.size("context_dim");
  c.env.noise_sd = ctx.real("noise_sd");
  c.steps = ctx.size("steps");
  c.trials = ctx.size("trials");
  c.agent.hidden = parse_hidden(ctx.text("hidden"));
  c.agent.sgd = SgdOptions{ctx.real("lr"), ctx.real("momentum"), ctx.real("clip")};
  c.agent.output_scale = ctx.real("output_scale");
  c.agent.baseline_decay = ctx.real("baseline_decay");
  c.window = ctx.size("window");
  c.final_window = ctx.size("final_window");
  c.seed = ctx.seed();
  if (ctx.text("variants") != "all") {
    c.variants.clear();
    for (const auto& name : split_list(ctx.text("variants"))) {
      c.variants.push_back(bandit::parse_variant(name));
    }
  }
  if (c.env.num_base < 2 || c.env.duplication == 0 || c.env.context_dim == 0) {
    throw ConfigError("bandit needs K >= 2, a >= 1 and a positive context dimension");
  }
  if (c.steps == 0 || c.trials == 0 || c.variants.empty()) {
    throw ConfigError("bandit needs positive steps, trials and at least one variant");
  }
  if (c.window == 0 || c.final_window == 0 || c.final_window > c.steps) {
    throw ConfigError("windows must be positive and final_window at most steps");
  }
  return c;
}

void write_bandit_bundle(RunContext& ctx, const bandit::ExperimentConfig& config,
                         const bandit::ExperimentResult& result) {
  bandit::write_curves_csv(result, ctx.artifact("curves.csv"));
  if (ctx.flag("trial_log")) {
    bandit::write_trials_csv(result, ctx.artifact("trials.csv"));
  }
  {
    CsvWriter csv(ctx.artifact("summary.csv"), {"variant", "trials", "final_mean", "final_sd"});
    for (const auto& vr : result.variants) {
      const double m = stats::mean(vr.final_means);
      const double sd = stats::stddev(vr.final_means);
      csv.row(bandit::variant_name(vr.variant), vr.final_means.size(), m, sd);
      std::cout << bandit::variant_name(vr.variant) << ": final reward " << m << " (sd " << sd << ")\n";
    }
  }
  using bandit::Variant;
  const std::pair<Variant, Variant> comparisons[] = {{Variant::InformativeFrozen, Variant::Informative},
                                                     {Variant::Informative, Variant::FullNet},
                                                     {Variant::InformativeFrozen, Variant::FullNet}};
  auto ran = [&](Variant v) {
    for (Variant x : config.variants) {
      if (x == v) return true;
    }
    return false;
  };
  CsvWriter csv(ctx.artifact("tests.csv"), {"greater", "lesser", "mean_diff", "t", "p_value"});
  for (const auto& [a, b] : comparisons) {
    if (!ran(a) || !ran(b) || config.trials < 2) {
      continue;
    }
    const auto t = stats::paired_t_greater(result.get(a).final_means, result.get(b).final_means);
    csv.row(bandit::variant_name(a), bandit::variant_name(b), t.mean_diff, t.t, t.p_value);
  }
}

std::vector<Command> bandit_commands() {
  Command c;
  c.name = "bandit";
  c.help = "REINFORCE on the duplicated-action contextual bandit";
  c.options = bandit_options("300,300");
  c.run = [](RunContext& ctx) {
    const auto config = bandit_config(ctx);
    const auto result = bandit::run_experiment(config);
    write_bandit_bundle(ctx, config, result);
    return 0;
  };
  return {c};
}

}  // namespace lasrl::cli
