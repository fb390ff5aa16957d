#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lasrl/optim.hpp"
#include "lasrl/policy_net.hpp"
#include "lasrl/rng.hpp"

namespace lasrl::bandit {

/// Fixed random 2-layer MLP (context_dim-16-1, tanh hidden). Its sign picks
/// which of base actions 0 and 1 pays out.
class Classifier {
 public:
  static constexpr std::size_t kHidden = 16;
  static constexpr std::size_t kProbes = 10000;
  static constexpr double kMinClassShare = 0.3;

  // Redraws until both classes cover at least 30% of 10^4 probe contexts.
  Classifier(std::size_t context_dim, Rng& rng);

  std::size_t operator()(std::span<const double> context) const;
  double score(std::span<const double> context) const;

 private:
  void draw(Rng& rng);

  std::size_t context_dim_;
  Matrix w1_;
  Vector b1_;
  Vector w2_;
  double b2_ = 0.0;
};

struct EnvConfig {
  std::size_t context_dim = 10;
  std::size_t num_base = 10;     // K
  std::size_t duplication = 400;  // a
  double noise_sd = 0.1;
};

struct StepOutcome {
  double reward = 0.0;
  int underlying = 0;  // noiseless r in {0, 1}
};

/// Duplicated-action contextual bandit: K base actions, each visible as `a`
/// copies. Visible action i folds onto base action i mod K.
class Env {
 public:
  Env(EnvConfig config, std::uint64_t seed);

  const EnvConfig& config() const { return config_; }
  std::size_t num_actions() const { return config_.num_base * config_.duplication; }
  std::size_t base_action(std::size_t action) const { return action % config_.num_base; }
  const Classifier& classifier() const { return classifier_; }

  Vector sample_context();
  StepOutcome step(std::span<const double> context, std::size_t action);

 private:
  EnvConfig config_;
  Rng classifier_rng_;
  Classifier classifier_;
  Rng context_rng_;
  Rng noise_rng_;
};

enum class Variant { FullNet, Informative, FrozenRandom, InformativeFrozen };

inline constexpr Variant kAllVariants[] = {Variant::FullNet, Variant::Informative, Variant::FrozenRandom,
                                           Variant::InformativeFrozen};

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);  // ConfigError on unknown names
bool is_informative(Variant v);
bool is_frozen(Variant v);

/// Makes every copy of a base action share one output weight row (and a zero
/// bias). One vector per base action is drawn from `rng`, uniform in
/// +-scale/sqrt(fan_in); the draw never sees the environment.
void informative_init(PolicyNet& policy, std::size_t num_base, std::size_t duplication, Rng& rng,
                      double scale = 1.0);

struct AgentConfig {
  std::vector<std::size_t> hidden = {300, 300};
  SgdOptions sgd{0.3, 0.0, 0.1};
  // Output-layer init bound is output_scale/sqrt(fan_in), random or informative.
  double output_scale = 1.0;
  double baseline_decay = 0.99;
};

class Agent {
 public:
  Agent(const EnvConfig& env, const AgentConfig& config, Variant variant, std::uint64_t trial_seed);

  PolicyNet& policy() { return policy_; }
  const PolicyNet& policy() const { return policy_; }
  double baseline() const { return baseline_; }
  Variant variant() const { return variant_; }

  std::size_t sample_action(std::span<const double> probs);

  /// dL/dlogits for L = -(reward - baseline) * log pi(action); equals
  /// (reward - baseline) * (pi - onehot(action)).
  static Vector policy_gradient_logits(std::span<const double> probs, std::size_t action, double advantage);

  /// One REINFORCE update from an already observed (context, action, reward).
  void learn(const PolicyNet::Activations& acts, std::span<const double> probs, std::size_t action,
             double reward);

 private:
  Variant variant_;
  AgentConfig config_;
  PolicyNet policy_;
  SgdState sgd_;
  double baseline_ = 0.0;
  Rng action_rng_;
};

struct TrialStep {
  std::size_t action = 0;
  int underlying = 0;
};

/// Sample context, act from the softmax policy, observe reward, update.
TrialStep reinforce_step(Agent& agent, Env& env);

struct TrialRecord {
  std::uint64_t seed = 0;
  std::vector<TrialStep> steps;
};

struct ExperimentConfig {
  EnvConfig env;
  AgentConfig agent;
  std::size_t steps = 5000;
  std::size_t trials = 50;
  std::size_t window = 20;
  std::size_t final_window = 1000;
  std::uint64_t seed = 1;
  std::vector<Variant> variants = {std::begin(kAllVariants), std::end(kAllVariants)};
};

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

TrialRecord run_trial(const ExperimentConfig& config, Variant variant, std::size_t trial);

struct VariantResult {
  Variant variant;
  std::vector<TrialRecord> trials;
  Vector curve_mean;  // per step, over trials, of the 20-step moving average
  Vector curve_sd;
  Vector final_means;  // per trial: mean underlying reward over the final window
};

struct ExperimentResult {
  std::vector<VariantResult> variants;
  const VariantResult& get(Variant v) const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

void write_curves_csv(const ExperimentResult& result, const std::filesystem::path& path);
void write_trials_csv(const ExperimentResult& result, const std::filesystem::path& path);

}  // namespace lasrl::bandit
