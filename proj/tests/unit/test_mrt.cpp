#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lasrl/bleu.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/mrt.hpp"
#include "support.hpp"

using namespace lasrl;
using namespace lasrl::mrt;

namespace {

CandidateSet set_from(const Vector& probs, const Vector& risks) {
  CandidateSet s;
  for (std::size_t u = 0; u < probs.size(); ++u) {
    s.candidates.push_back({{}, std::log(probs[u]), risks[u]});
  }
  return s;
}

seq::SeqModel five_token_model(std::uint64_t seed) {
  Rng rng(seed);
  // Five target tokens: pad, bos, eos and two words.
  return seq::SeqModel({6, 5, 4}, rng);
}

}  // namespace

TEST_CASE("risk loss: two-candidate hand example") {
  // w = (0.2, 0.6) / 0.8 = (0.25, 0.75): expected reward 0.25*100 + 0.75*50
  const auto reward_view = risk_loss(set_from({0.2, 0.6}, {100.0, 50.0}), 1.0);
  CHECK(std::abs(reward_view.loss - 62.5) <= 1e-9);
  const auto risk_view = risk_loss(set_from({0.2, 0.6}, {0.0, 50.0}), 1.0);
  CHECK(std::abs(risk_view.loss - 37.5) <= 1e-9);
  CHECK(risk_view.weights[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("risk loss and its log-probability gradient match autograd") {
  struct Case {
    Vector probs, risks;
    double beta, loss;
    Vector grad;
  };
  // tests/oracles/mrt_oracle.py
  const Case cases[] = {
      {{0.2, 0.6}, {0.0, 50.0}, 1.0, 37.49999999999999, {-9.374999999999998, 9.375000000000004}},
      {{0.1, 0.3, 0.05, 0.2},
       {10.0, 70.0, 100.0, 35.0},
       1.0,
       52.3076923076923,
       {-6.508875739644971, 8.165680473372783, 3.668639053254439, -5.3254437869822455}},
      {{0.1, 0.3, 0.05, 0.2},
       {10.0, 70.0, 100.0, 35.0},
       0.5,
       51.80970123685394,
       {-4.307284559015462, 3.24583889028354, 3.510517327209037, -2.449071658477117}},
      {{0.4, 0.4, 0.01}, {20.0, 80.0, 0.0}, 2.0, 49.984379881287104,
       {-29.975012689821536, 30.006243167722985, -0.031230477901460264}},
  };
  for (const auto& c : cases) {
    const auto r = risk_loss(set_from(c.probs, c.risks), c.beta);
    CHECK(r.loss == doctest::Approx(c.loss).epsilon(1e-12));
    for (std::size_t u = 0; u < c.grad.size(); ++u) {
      CHECK(r.dlog_prob[u] == doctest::Approx(c.grad[u]).epsilon(1e-10));
    }
  }
}

TEST_CASE("risk loss properties") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    Vector probs(n);
    Vector risks(n);
    for (std::size_t u = 0; u < n; ++u) {
      probs[u] = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
      risks[u] = std::uniform_real_distribution<double>(0.0, 100.0)(rng);
    }
    const auto r = risk_loss(set_from(probs, risks), 1.0);
    double wsum = 0.0;
    double gsum = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      wsum += r.weights[u];
      gsum += r.dlog_prob[u];
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(gsum) < 1e-9);  // renormalization: gradient sums to zero
    CHECK(r.loss >= *std::min_element(risks.begin(), risks.end()) - 1e-9);
    CHECK(r.loss <= *std::max_element(risks.begin(), risks.end()) + 1e-9);
  }
  // Equal risks: loss is that risk and the gradient vanishes.
  const auto flat = risk_loss(set_from({0.3, 0.1, 0.6}, {40.0, 40.0, 40.0}), 1.0);
  CHECK(flat.loss == doctest::Approx(40.0));
  for (double g : flat.dlog_prob) {
    CHECK(std::abs(g) < 1e-12);
  }
}

TEST_CASE("risk loss errors") {
  CHECK_THROWS_AS(risk_loss(CandidateSet{}, 1.0), ConfigError);
  CHECK_THROWS_AS(risk_loss(set_from({0.5}, {1.0}), 0.0), ConfigError);
  CandidateSet bad = set_from({0.5, 0.5}, {1.0, 2.0});
  bad.candidates[1].log_prob = -INFINITY;
  CHECK_THROWS_AS(risk_loss(bad, 1.0), NumericError);
}

TEST_CASE("combined loss mixes losses and gradients") {
  const LossAndGrad mle{2.0, {1.0, -1.0}};
  const LossAndGrad risk{10.0, {0.0, 4.0}};
  const auto c = combined_loss(mle, risk, 0.3);
  CHECK(c.loss == doctest::Approx(0.6 + 7.0));
  CHECK(c.grad[1] == doctest::Approx(-0.3 + 2.8));
  CHECK(combined_loss(mle, risk, 1.0).loss == doctest::Approx(2.0));
  CHECK_THROWS_AS(combined_loss(mle, risk, 1.5), ConfigError);
  CHECK_THROWS_AS(combined_loss(mle, LossAndGrad{0.0, {1.0}}, 0.5), DimensionError);
}

TEST_CASE("full-model risk gradient matches finite differences on a 5-token vocabulary") {
  seq::SeqModel model = five_token_model(62);
  const TokenIds src{3, 4, 5};
  const TokenIds ref{3, 4};
  MrtConfig cfg;
  cfg.k = 4;
  const auto cands = make_candidates(model, src, ref, cfg, make_reward("smoothed_bleu"));
  REQUIRE(cands.candidates.size() == 4);
  zero_grads(model.params());
  risk_gradient(model, cands, cfg.beta, 1.0);
  auto loss = [&] { return risk_gradient(model, cands, cfg.beta, 0.0); };
  for (auto& g : model.params()) {
    INFO(g.name);
    CHECK(test::gradcheck(g.value.values(), g.grad.values(), loss, 1e-6) < 1e-3);
  }
}

TEST_CASE("combined sentence gradient matches finite differences") {
  seq::SeqModel model = five_token_model(63);
  const TokenIds src{5, 3};
  const TokenIds ref{4, 3, 4};
  MrtConfig cfg;
  cfg.k = 3;
  cfg.beta = 0.7;
  const auto cands = make_candidates(model, src, ref, cfg, make_reward("smoothed_bleu"));
  zero_grads(model.params());
  const auto l = accumulate_sentence_gradient(model, cands, cfg);
  auto loss = [&] {
    return cfg.alpha * seq::sentence_mle_loss(model, src, ref, cfg.epsilon) +
           (1.0 - cfg.alpha) * risk_gradient(model, cands, cfg.beta, 0.0);
  };
  CHECK(l.combined == doctest::Approx(loss()).epsilon(1e-12));
  for (auto& g : model.params()) {
    INFO(g.name);
    CHECK(test::gradcheck(g.value.values(), g.grad.values(), loss, 1e-6) < 1e-3);
  }
}

TEST_CASE("candidates carry beam scores and risk = 100 - reward") {
  seq::SeqModel model = five_token_model(64);
  MrtConfig cfg;
  cfg.k = 5;
  const TokenIds ref{3, 4};
  const auto cands = make_candidates(model, {3, 4}, ref, cfg, make_reward("smoothed_bleu"));
  for (const auto& c : cands.candidates) {
    CHECK(c.log_prob == doctest::Approx(model.log_prob({3, 4}, c.tokens)).epsilon(1e-12));
    TokenIds words = c.tokens;
    if (!words.empty() && words.back() == seq::Vocabulary::kEos) {
      words.pop_back();
    }
    CHECK(c.risk == doctest::Approx(100.0 - seq::smoothed_bleu(words, ref)));
    CHECK(c.tokens.size() <= 2 + cfg.extra_len);
  }
  const auto constant = make_candidates(model, {3, 4}, ref, cfg, make_reward("constant"));
  for (const auto& c : constant.candidates) {
    CHECK(c.risk == 0.0);
  }
  CHECK_THROWS_AS(make_reward("meteor"), ConfigError);
}

TEST_CASE("MRT configuration validation") {
  auto bad = [](auto edit) {
    MrtConfig c;
    edit(c);
    return c;
  };
  CHECK_NOTHROW(MrtConfig{}.validate());
  CHECK_THROWS_AS(bad([](MrtConfig& c) { c.alpha = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MrtConfig& c) { c.beta = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MrtConfig& c) { c.k = 1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MrtConfig& c) { c.epsilon = 1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MrtConfig& c) { c.reward = "x"; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MrtConfig& c) { c.sgd.learning_rate = 0.0; }).validate(), ConfigError);
}

TEST_CASE("MRT fine-tuning: log layout, warning, frozen theta2 and determinism") {
  seq::TaskSpec spec;
  spec.source_lexemes = 5;
  spec.min_length = 2;
  spec.max_length = 3;
  spec.seed = 3;
  const auto task = seq::make_task(spec);
  const auto train = seq::generate_corpus(task, 12, "train");
  const auto valid = seq::generate_corpus(task, 6, "valid");
  MrtConfig cfg;
  cfg.k = 3;
  cfg.epochs = 2;
  cfg.sgd = SgdOptions{0.05, 0.9, 0.1};
  auto run = [&](bool frozen) {
    Rng rng(5);
    seq::SeqModel model({task.source_vocab.size(), task.target_vocab.size(), 4}, rng);
    model.set_output_frozen(frozen);
    const Matrix out = model.group(seq::SeqModel::kOutEmbed).value;
    const auto r = mrt_finetune(model, train, valid, cfg);
    CHECK(r.log.size() == 3);
    CHECK(r.log[0].epoch == 0);
    CHECK(r.best_epoch >= 1);
    if (frozen) {
      CHECK(model.group(seq::SeqModel::kOutEmbed).value == out);
    }
    return std::make_pair(r, seq::snapshot(model));
  };
  const auto [a, pa] = run(false);
  const auto [b, pb] = run(false);
  run(true);
  CHECK(pa == pb);
  CHECK(a.log[2].val_loss == b.log[2].val_loss);
  CHECK(a.warnings.empty());

  // A model with a zero output layer is exactly uniform.
  Rng rng(6);
  seq::SeqModel flat({task.source_vocab.size(), task.target_vocab.size(), 4}, rng);
  flat.set_output_embedding(Matrix(task.target_vocab.size(), 4));
  cfg.epochs = 1;
  CHECK_FALSE(mrt_finetune(flat, train, valid, cfg).warnings.empty());

  const auto path = std::filesystem::temp_directory_path() / "lasrl_mrt_log.csv";
  write_train_log(a, path);
  std::ifstream in(path);
  std::string header;
  std::string first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "epoch,mle_loss,risk_loss,val_loss,val_bleu");
  CHECK(first.rfind("0,,,", 0) == 0);
  std::filesystem::remove(path);
}
