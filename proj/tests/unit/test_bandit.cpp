#include <algorithm>

#include "doctest.h"
#include "lasrl/bandit.hpp"
#include "lasrl/errors.hpp"
#include "support.hpp"

using namespace lasrl;
using namespace lasrl::bandit;

namespace {

EnvConfig small_env() {
  EnvConfig e;
  e.context_dim = 4;
  e.num_base = 3;
  e.duplication = 5;
  return e;
}

AgentConfig small_agent() {
  AgentConfig a;
  a.hidden = {8};
  return a;
}

}  // namespace

TEST_CASE("classifier classes are balanced on fresh contexts") {
  Rng rng(21);
  Classifier c(10, rng);
  Rng probe(22);
  std::size_t first = 0;
  for (int i = 0; i < 4000; ++i) {
    first += c(gaussian_vector(probe, 10)) == 0;
  }
  const double share = first / 4000.0;
  CHECK(share > 0.27);
  CHECK(share < 0.73);
}

TEST_CASE("environment folds duplicated actions onto their base") {
  EnvConfig cfg = small_env();
  cfg.noise_sd = 0.0;
  Env env(cfg, 3);
  CHECK(env.num_actions() == 15);
  const Vector ctx = env.sample_context();
  const std::size_t good = env.classifier()(ctx);
  for (std::size_t copy = 0; copy < cfg.duplication; ++copy) {
    const auto out = env.step(ctx, good + copy * cfg.num_base);
    CHECK(out.underlying == 1);
    CHECK(out.reward == 1.0);
  }
  CHECK(env.step(ctx, 2).underlying == 0);  // base 2 never pays
  CHECK_THROWS_AS(env.step(ctx, 15), IndexError);
}

TEST_CASE("environment rejects degenerate configurations") {
  EnvConfig one = small_env();
  one.num_base = 1;
  CHECK_THROWS_AS(Env(one, 1), ConfigError);
  EnvConfig none = small_env();
  none.duplication = 0;
  CHECK_THROWS_AS(Env(none, 1), ConfigError);
  EnvConfig noisy = small_env();
  noisy.noise_sd = -1.0;
  CHECK_THROWS_AS(Env(noisy, 1), ConfigError);
}

TEST_CASE("REINFORCE logit gradient is the derivative of -A log pi") {
  Rng rng(23);
  Vector logits = test::random_vector(rng, 6, 2.0);
  const std::size_t action = 4;
  const double advantage = 0.7;
  const Vector d = Agent::policy_gradient_logits(softmax(logits), action, advantage);
  auto loss = [&] { return -advantage * log_softmax(logits)[action]; };
  CHECK(test::gradcheck(logits, d, loss) < test::kGradTol);
}

TEST_CASE("informative init gives every copy its base action's row") {
  Rng rng(24);
  PolicyNet net({4, 8, 15}, rng);
  Rng init(25);
  informative_init(net, 3, 5, init);
  const auto& w = net.weight(1).value;
  for (std::size_t i = 0; i < 15; ++i) {
    const auto a = w.row(i);
    const auto b = w.row(i % 3);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
  CHECK(w.row(0)[0] != w.row(1)[0]);
  for (double v : net.bias(1).value.values()) {
    CHECK(v == 0.0);
  }
  PolicyNet wrong({4, 8, 14}, rng);
  CHECK_THROWS_AS(informative_init(wrong, 3, 5, init), DimensionError);
}

TEST_CASE("frozen variants never move the output layer") {
  ExperimentConfig cfg;
  cfg.env = small_env();
  cfg.agent = small_agent();
  cfg.steps = 200;
  for (Variant v : {Variant::FrozenRandom, Variant::InformativeFrozen}) {
    Agent agent(cfg.env, cfg.agent, v, 9);
    const Matrix w = agent.policy().weight(1).value;
    const Matrix b = agent.policy().bias(1).value;
    const Matrix hidden = agent.policy().weight(0).value;
    Env env(cfg.env, 9);
    for (int s = 0; s < 200; ++s) {
      reinforce_step(agent, env);
    }
    CHECK(agent.policy().weight(1).value == w);
    CHECK(agent.policy().bias(1).value == b);
    CHECK_FALSE(agent.policy().weight(0).value == hidden);
  }
}

TEST_CASE("informative copies stay tied under training when frozen") {
  ExperimentConfig cfg;
  cfg.env = small_env();
  cfg.agent = small_agent();
  Agent agent(cfg.env, cfg.agent, Variant::InformativeFrozen, 4);
  Env env(cfg.env, 4);
  for (int s = 0; s < 100; ++s) {
    const Vector ctx = env.sample_context();
    const Vector p = softmax(agent.policy().forward(ctx).logits);
    for (std::size_t i = 3; i < 15; ++i) {
      CHECK(p[i] == p[i % 3]);
    }
    reinforce_step(agent, env);
  }
}

TEST_CASE("trials are deterministic functions of the master seed") {
  ExperimentConfig cfg;
  cfg.env = small_env();
  cfg.agent = small_agent();
  cfg.steps = 100;
  const auto a = run_trial(cfg, Variant::FullNet, 2);
  const auto b = run_trial(cfg, Variant::FullNet, 2);
  const auto c = run_trial(cfg, Variant::FullNet, 3);
  REQUIRE(a.steps.size() == 100);
  bool same = true;
  bool differs = false;
  for (std::size_t s = 0; s < 100; ++s) {
    same = same && a.steps[s].action == b.steps[s].action && a.steps[s].underlying == b.steps[s].underlying;
    differs = differs || a.steps[s].action != c.steps[s].action;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("experiment summaries: curves and final means") {
  ExperimentConfig cfg;
  cfg.env = small_env();
  cfg.agent = small_agent();
  cfg.steps = 60;
  cfg.trials = 3;
  cfg.window = 5;
  cfg.final_window = 10;
  cfg.variants = {Variant::FullNet, Variant::FrozenRandom};
  const auto r = run_experiment(cfg);
  REQUIRE(r.variants.size() == 2);
  const auto& full = r.get(Variant::FullNet);
  CHECK(full.curve_mean.size() == 60);
  CHECK(full.final_means.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    double tail = 0.0;
    for (std::size_t s = 50; s < 60; ++s) {
      tail += full.trials[t].steps[s].underlying;
    }
    CHECK(full.final_means[t] == doctest::Approx(tail / 10.0));
  }
  for (double m : full.curve_mean) {
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
  CHECK_THROWS_AS(r.get(Variant::Informative), ConfigError);
  cfg.final_window = 61;
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("variant names round trip") {
  for (Variant v : kAllVariants) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("bogus"), ConfigError);
}
