#include "lasrl/bandit.hpp"

#include <cmath>

#include "lasrl/csv.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/layers.hpp"
#include "lasrl/parallel.hpp"
#include "lasrl/stats.hpp"

namespace lasrl::bandit {

Classifier::Classifier(std::size_t context_dim, Rng& rng) : context_dim_(context_dim) {
  if (context_dim == 0) {
    throw ConfigError("context dimension must be positive");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    draw(rng);
    std::size_t first = 0;
    Vector probe(context_dim_);
    for (std::size_t i = 0; i < kProbes; ++i) {
      for (double& x : probe) {
        x = normal(rng);
      }
      first += (*this)(probe) == 0 ? 1 : 0;
    }
    const double share = static_cast<double>(first) / static_cast<double>(kProbes);
    if (share >= kMinClassShare && share <= 1.0 - kMinClassShare) {
      return;
    }
  }
}

void Classifier::draw(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(context_dim_));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(kHidden));
  w1_ = Matrix(kHidden, context_dim_);
  for (double& v : w1_.values()) {
    v = 2.0 * s1 * normal(rng);
  }
  b1_.assign(kHidden, 0.0);
  for (double& v : b1_) {
    v = 0.5 * normal(rng);
  }
  w2_.assign(kHidden, 0.0);
  for (double& v : w2_) {
    v = s2 * normal(rng);
  }
  b2_ = 0.1 * normal(rng);
}

double Classifier::score(std::span<const double> context) const {
  Vector h = matvec(w1_, context);
  double out = b2_;
  for (std::size_t i = 0; i < h.size(); ++i) {
    out += w2_[i] * std::tanh(h[i] + b1_[i]);
  }
  return out;
}

std::size_t Classifier::operator()(std::span<const double> context) const { return score(context) > 0.0 ? 0 : 1; }

Env::Env(EnvConfig config, std::uint64_t seed)
    : config_(config),
      classifier_rng_(make_rng(seed, "classifier")),
      classifier_(config.context_dim, classifier_rng_),
      context_rng_(make_rng(seed, "env-context")),
      noise_rng_(make_rng(seed, "env-noise")) {
  if (config_.num_base < 2) {
    throw ConfigError("need at least two base actions");
  }
  if (config_.duplication == 0) {
    throw ConfigError("duplication factor must be positive");
  }
  if (config_.noise_sd < 0.0) {
    throw ConfigError("noise sd must be non-negative");
  }
}

Vector Env::sample_context() { return gaussian_vector(context_rng_, config_.context_dim); }

StepOutcome Env::step(std::span<const double> context, std::size_t action) {
  if (action >= num_actions()) {
    throw IndexError("action " + std::to_string(action) + " out of range for " + std::to_string(num_actions()) +
                     " actions");
  }
  StepOutcome out;
  out.underlying = base_action(action) == classifier_(context) ? 1 : 0;
  double z = 0.0;
  if (config_.noise_sd > 0.0) {
    z = std::normal_distribution<double>(0.0, config_.noise_sd)(noise_rng_);
  }
  out.reward = out.underlying + z;
  return out;
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::FullNet:
      return "full-net";
    case Variant::Informative:
      return "informative";
    case Variant::FrozenRandom:
      return "frozen-random";
    case Variant::InformativeFrozen:
      return "informative-frozen";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (variant_name(v) == name) {
      return v;
    }
  }
  throw ConfigError("unknown bandit variant '" + std::string(name) +
                    "' (expected full-net, informative, frozen-random or informative-frozen)");
}

bool is_informative(Variant v) { return v == Variant::Informative || v == Variant::InformativeFrozen; }
bool is_frozen(Variant v) { return v == Variant::FrozenRandom || v == Variant::InformativeFrozen; }

void informative_init(PolicyNet& policy, std::size_t num_base, std::size_t duplication, Rng& rng,
                      double scale) {
  const std::size_t last = policy.num_layers() - 1;
  auto& w = policy.weight(last).value;
  if (w.rows() != num_base * duplication) {
    throw DimensionError("output width " + std::to_string(w.rows()) + " does not equal K*a = " +
                         std::to_string(num_base * duplication));
  }
  const double bound = scale / std::sqrt(static_cast<double>(w.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix base(num_base, w.cols());
  for (double& v : base.values()) {
    v = dist(rng);
  }
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const auto src = base.row(i % num_base);
    std::copy(src.begin(), src.end(), w.row(i).begin());
  }
  policy.bias(last).value.fill(0.0);
}

namespace {

std::vector<std::size_t> agent_widths(const EnvConfig& env, const AgentConfig& config) {
  std::vector<std::size_t> widths{env.context_dim};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(env.num_base * env.duplication);
  return widths;
}

PolicyNet make_policy(const EnvConfig& env, const AgentConfig& config, Variant variant, std::uint64_t seed) {
  Rng init = make_rng(seed, "init");
  PolicyNet net(agent_widths(env, config), init);
  const std::size_t last = net.num_layers() - 1;
  if (is_informative(variant)) {
    Rng out_rng = make_rng(seed, "init-informative");
    informative_init(net, env.num_base, env.duplication, out_rng, config.output_scale);
  } else if (config.output_scale != 1.0) {
    for (double& v : net.weight(last).value.values()) {
      v *= config.output_scale;
    }
  }
  if (is_frozen(variant)) {
    net.set_layer_frozen(last, true);
  }
  return net;
}

}  // namespace

Agent::Agent(const EnvConfig& env, const AgentConfig& config, Variant variant, std::uint64_t trial_seed)
    : variant_(variant),
      config_(config),
      policy_(make_policy(env, config, variant, trial_seed)),
      sgd_(config.sgd),
      action_rng_(make_rng(trial_seed, "policy")) {
  if (!(config.baseline_decay >= 0.0 && config.baseline_decay < 1.0)) {
    throw ConfigError("baseline decay must lie in [0, 1)");
  }
}

std::size_t Agent::sample_action(std::span<const double> probs) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(action_rng_);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (probs[i] > 0.0) {
      last_positive = i;
    }
    if (u < acc) {
      return i;
    }
  }
  return last_positive;
}

Vector Agent::policy_gradient_logits(std::span<const double> probs, std::size_t action, double advantage) {
  Vector d(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d[i] = advantage * probs[i];
  }
  d[action] -= advantage;
  return d;
}

void Agent::learn(const PolicyNet::Activations& acts, std::span<const double> probs, std::size_t action,
                  double reward) {
  const double advantage = reward - baseline_;
  const Vector dlogits = policy_gradient_logits(probs, action, advantage);
  zero_grads(policy_.params());
  policy_.backward(acts, dlogits);
  sgd_step(policy_.params(), sgd_);
  baseline_ = config_.baseline_decay * baseline_ + (1.0 - config_.baseline_decay) * reward;
}

TrialStep reinforce_step(Agent& agent, Env& env) {
  const Vector context = env.sample_context();
  const auto acts = agent.policy().forward(context);
  const Vector probs = softmax(acts.logits);
  const std::size_t action = agent.sample_action(probs);
  const StepOutcome outcome = env.step(context, action);
  agent.learn(acts, probs, action, outcome.reward);
  return {action, outcome.underlying};
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) { return derive_seed(master, "trial", trial); }

TrialRecord run_trial(const ExperimentConfig& config, Variant variant, std::size_t trial) {
  TrialRecord record;
  record.seed = trial_seed(config.seed, trial);
  Env env(config.env, record.seed);
  Agent agent(config.env, config.agent, variant, record.seed);
  record.steps.reserve(config.steps);
  for (std::size_t s = 0; s < config.steps; ++s) {
    record.steps.push_back(reinforce_step(agent, env));
  }
  return record;
}

const VariantResult& ExperimentResult::get(Variant v) const {
  for (const auto& r : variants) {
    if (r.variant == v) {
      return r;
    }
  }
  throw ConfigError("variant '" + std::string(variant_name(v)) + "' was not run");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.steps == 0 || config.trials == 0) {
    throw ConfigError("bandit experiment needs positive steps and trials");
  }
  if (config.final_window == 0 || config.final_window > config.steps) {
    throw ConfigError("final window must lie in [1, steps]");
  }
  ExperimentResult result;
  for (Variant v : config.variants) {
    VariantResult vr{v, {}, {}, {}, {}};
    vr.trials.resize(config.trials);
    parallel_for(config.trials, [&](std::size_t t) { vr.trials[t] = run_trial(config, v, t); });

    std::vector<Vector> curves;
    curves.reserve(config.trials);
    for (const auto& tr : vr.trials) {
      Vector r(tr.steps.size());
      for (std::size_t s = 0; s < r.size(); ++s) {
        r[s] = tr.steps[s].underlying;
      }
      curves.push_back(stats::moving_average(r, config.window));
      const std::span<const double> tail(r.data() + r.size() - config.final_window, config.final_window);
      vr.final_means.push_back(stats::mean(tail));
    }
    vr.curve_mean.resize(config.steps);
    vr.curve_sd.resize(config.steps);
    Vector column(config.trials);
    for (std::size_t s = 0; s < config.steps; ++s) {
      for (std::size_t t = 0; t < config.trials; ++t) {
        column[t] = curves[t][s];
      }
      vr.curve_mean[s] = stats::mean(column);
      vr.curve_sd[s] = stats::stddev(column);
    }
    result.variants.push_back(std::move(vr));
  }
  return result;
}

void write_curves_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  CsvWriter csv(path, {"variant", "step", "mean", "sd"});
  for (const auto& vr : result.variants) {
    for (std::size_t s = 0; s < vr.curve_mean.size(); ++s) {
      csv.row(variant_name(vr.variant), s, vr.curve_mean[s], vr.curve_sd[s]);
    }
  }
}

void write_trials_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  CsvWriter csv(path, {"variant", "trial", "seed", "step", "action", "underlying_r"});
  for (const auto& vr : result.variants) {
    for (std::size_t t = 0; t < vr.trials.size(); ++t) {
      const auto& tr = vr.trials[t];
      for (std::size_t s = 0; s < tr.steps.size(); ++s) {
        csv.row(variant_name(vr.variant), t, tr.seed, s, tr.steps[s].action, tr.steps[s].underlying);
      }
    }
  }
}

}  // namespace lasrl::bandit
