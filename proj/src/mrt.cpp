#include "lasrl/mrt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lasrl/bleu.hpp"
#include "lasrl/csv.hpp"
#include "lasrl/decode.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/parallel.hpp"

namespace lasrl::mrt {

RiskResult risk_loss(const CandidateSet& cands, double beta) {
  const auto& cs = cands.candidates;
  if (cs.empty()) {
    throw ConfigError("risk loss needs at least one candidate");
  }
  if (!(beta > 0.0)) {
    throw ConfigError("beta must be positive");
  }
  Vector scaled(cs.size());
  for (std::size_t u = 0; u < cs.size(); ++u) {
    if (!std::isfinite(cs[u].log_prob)) {
      throw NumericError("candidate " + std::to_string(u) + " has a non-finite log-probability");
    }
    scaled[u] = beta * cs[u].log_prob;
  }
  RiskResult r;
  r.weights = softmax(scaled);
  for (std::size_t u = 0; u < cs.size(); ++u) {
    r.loss += r.weights[u] * cs[u].risk;
  }
  r.dlog_prob.resize(cs.size());
  for (std::size_t u = 0; u < cs.size(); ++u) {
    r.dlog_prob[u] = beta * r.weights[u] * (cs[u].risk - r.loss);
  }
  return r;
}

LossAndGrad combined_loss(const LossAndGrad& mle, const LossAndGrad& risk, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (mle.grad.size() != risk.grad.size()) {
    throw DimensionError("MLE gradient has " + std::to_string(mle.grad.size()) + " entries, risk gradient " +
                         std::to_string(risk.grad.size()));
  }
  LossAndGrad out;
  out.loss = alpha * mle.loss + (1.0 - alpha) * risk.loss;
  out.grad.resize(mle.grad.size());
  for (std::size_t i = 0; i < out.grad.size(); ++i) {
    out.grad[i] = alpha * mle.grad[i] + (1.0 - alpha) * risk.grad[i];
  }
  return out;
}

RewardFn make_reward(const std::string& name) {
  if (name == "smoothed_bleu") {
    return [](const TokenIds& h, const TokenIds& r) { return seq::smoothed_bleu(h, r); };
  }
  if (name == "constant") {
    return [](const TokenIds&, const TokenIds&) { return 100.0; };
  }
  throw ConfigError("unknown reward '" + name + "' (expected smoothed_bleu or constant)");
}

void MrtConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (!(beta > 0.0)) {
    throw ConfigError("beta must be positive");
  }
  if (k < 2) {
    throw ConfigError("MRT needs k >= 2 candidates");
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ConfigError("label smoothing epsilon must lie in [0, 1)");
  }
  make_reward(reward);
  SgdState check(sgd);
}

CandidateSet make_candidates(const seq::SeqModel& model, const TokenIds& source, const TokenIds& reference,
                             const MrtConfig& config, const RewardFn& reward) {
  CandidateSet set;
  set.source = source;
  set.reference = reference;
  for (auto& h : seq::beam_search(model, source, config.k, source.size() + config.extra_len)) {
    const double r = reward(h.words(), reference);
    set.candidates.push_back({std::move(h.tokens), h.score, 100.0 - r});
  }
  return set;
}

double risk_gradient(seq::SeqModel& model, const CandidateSet& cands, double beta, double scale) {
  CandidateSet scored = cands;
  std::vector<seq::SeqModel::Trace> traces;
  std::vector<std::vector<Vector>> probs;
  traces.reserve(cands.candidates.size());
  for (auto& c : scored.candidates) {
    traces.push_back(model.forward(cands.source, c.tokens));
    const auto& tr = traces.back();
    std::vector<Vector> p(tr.logits.size());
    c.log_prob = 0.0;
    for (std::size_t t = 0; t < tr.logits.size(); ++t) {
      c.log_prob += log_softmax(tr.logits[t])[c.tokens[t]];
      p[t] = softmax(tr.logits[t]);
    }
    probs.push_back(std::move(p));
  }
  const RiskResult r = risk_loss(scored, beta);
  if (scale == 0.0) {
    return r.loss;
  }
  for (std::size_t u = 0; u < traces.size(); ++u) {
    const double c = scale * r.dlog_prob[u];
    if (c == 0.0) {
      continue;
    }
    // d log P_u / d logits_t = onehot(u_t) - p_t
    std::vector<Vector> dlogits = probs[u];
    for (std::size_t t = 0; t < dlogits.size(); ++t) {
      for (double& g : dlogits[t]) {
        g *= -c;
      }
      dlogits[t][scored.candidates[u].tokens[t]] += c;
    }
    model.backward(traces[u], dlogits);
  }
  return r.loss;
}

SentenceLoss accumulate_sentence_gradient(seq::SeqModel& model, const CandidateSet& cands, const MrtConfig& config) {
  SentenceLoss out;
  out.mle = seq::sentence_mle(model, cands.source, cands.reference, config.epsilon, config.alpha);
  out.risk = risk_gradient(model, cands, config.beta, 1.0 - config.alpha);
  out.combined = config.alpha * out.mle + (1.0 - config.alpha) * out.risk;
  return out;
}

ValidationScore evaluate(const seq::SeqModel& model, const seq::ParallelCorpus& validation, const MrtConfig& config,
                         const RewardFn& reward) {
  if (validation.size() == 0) {
    throw ConfigError("validation corpus is empty");
  }
  Vector losses(validation.size());
  Vector bleus(validation.size());
  parallel_for(validation.size(), [&](std::size_t i) {
    const auto cands = make_candidates(model, validation.source[i], validation.target[i], config, reward);
    const double mle = seq::sentence_mle_loss(model, validation.source[i], validation.target[i], config.epsilon);
    const double risk = risk_loss(cands, config.beta).loss;
    losses[i] = config.alpha * mle + (1.0 - config.alpha) * risk;
    TokenIds best = cands.candidates.front().tokens;
    if (!best.empty() && best.back() == seq::Vocabulary::kEos) {
      best.pop_back();
    }
    bleus[i] = seq::smoothed_bleu(best, validation.target[i]);
  });
  ValidationScore s;
  s.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
  s.bleu = std::accumulate(bleus.begin(), bleus.end(), 0.0) / static_cast<double>(bleus.size());
  return s;
}

namespace {

// Normalized entropy of the first decoding step of the first validation
// sentence; close to 1 means an untrained model.
double first_step_entropy(const seq::SeqModel& model, const seq::ParallelCorpus& validation) {
  const Vector p = model.forward_step(validation.source.front(), {seq::Vocabulary::kBos});
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) {
      h -= x * std::log(x);
    }
  }
  return h / std::log(static_cast<double>(p.size()));
}

}  // namespace

MrtResult mrt_finetune(seq::SeqModel& model, const seq::ParallelCorpus& train, const seq::ParallelCorpus& validation,
                       const MrtConfig& config) {
  config.validate();
  if (train.size() == 0) {
    throw ConfigError("training corpus is empty");
  }
  if (validation.size() == 0) {
    throw ConfigError("validation corpus is empty");
  }
  const RewardFn reward = make_reward(config.reward);
  MrtResult result;
  if (first_step_entropy(model, validation) > 0.999) {
    result.warnings.push_back("model output is close to uniform; MRT expects an MLE-pretrained model");
  }
  const ValidationScore start = evaluate(model, validation, config, reward);
  result.log.push_back({0, 0.0, 0.0, start.loss, start.bleu});

  SgdState sgd(config.sgd);
  std::vector<Matrix> best;
  double best_loss = 0.0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng = make_rng(config.seed, "mrt-shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double mle_sum = 0.0;
    double risk_sum = 0.0;
    for (std::size_t i : order) {
      const auto cands = make_candidates(model, train.source[i], train.target[i], config, reward);
      zero_grads(model.params());
      const SentenceLoss l = accumulate_sentence_gradient(model, cands, config);
      sgd_step(model.params(), sgd);
      mle_sum += l.mle;
      risk_sum += l.risk;
    }
    const ValidationScore v = evaluate(model, validation, config, reward);
    const double n = static_cast<double>(train.size());
    result.log.push_back({epoch, mle_sum / n, risk_sum / n, v.loss, v.bleu});
    if (best.empty() || v.loss < best_loss) {
      best_loss = v.loss;
      best = seq::snapshot(model);
      result.best_epoch = epoch;
    }
  }
  if (!best.empty()) {
    seq::restore(model, best);
  }
  return result;
}

void write_train_log(const MrtResult& result, const std::filesystem::path& path) {
  CsvWriter csv(path, {"epoch", "mle_loss", "risk_loss", "val_loss", "val_bleu"});
  for (const auto& e : result.log) {
    if (e.epoch == 0) {
      csv.row(e.epoch, std::string(), std::string(), e.val_loss, e.val_bleu);
    } else {
      csv.row(e.epoch, e.mle_loss, e.risk_loss, e.val_loss, e.val_bleu);
    }
  }
}

}  // namespace lasrl::mrt
