#include "lasrl/seq_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lasrl/errors.hpp"
#include "lasrl/layers.hpp"

namespace lasrl::seq {

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : m.values()) {
    v = dist(rng);
  }
  return m;
}

Matrix* grad_of(ParamGroup& g) { return g.frozen ? nullptr : &g.grad; }

}  // namespace

SeqModel::SeqModel(SeqModelConfig config, Rng& rng) : config_(config) {
  if (config.source_vocab <= Vocabulary::kNumSpecials || config.target_vocab <= Vocabulary::kNumSpecials) {
    throw ConfigError("vocabularies must hold at least one token besides the specials");
  }
  if (config.dim == 0) {
    throw ConfigError("model dimension must be positive");
  }
  const std::size_t d = config.dim;
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  params_.resize(kNumGroups);
  params_[kSrcEmbed] = ParamGroup("src_embed", uniform_matrix(config.source_vocab, d, s, rng));
  params_[kInitProj] = ParamGroup("init_proj", uniform_matrix(d, d, s, rng));
  params_[kInitBias] = ParamGroup("init_bias", Matrix(1, d));
  params_[kRecurrent] = ParamGroup("recurrent", uniform_matrix(d, d, s, rng));
  params_[kSrcProj] = ParamGroup("src_proj", uniform_matrix(d, d, s, rng));
  params_[kTgtEmbed] = ParamGroup("tgt_embed", uniform_matrix(config.target_vocab, d, s, rng));
  params_[kRecBias] = ParamGroup("rec_bias", Matrix(1, d));
  params_[kOutEmbed] = ParamGroup("out_embed", uniform_matrix(config.target_vocab, d, s, rng));
  params_[kOutBias] = ParamGroup("out_bias", Matrix(1, config.target_vocab));
}

void SeqModel::set_output_frozen(bool frozen) {
  params_[kOutEmbed].frozen = frozen;
  params_[kOutBias].frozen = frozen;
}

void SeqModel::set_output_embedding(const Matrix& table) {
  if (!table.same_shape(params_[kOutEmbed].value)) {
    throw DimensionError("embedding table " + table.shape_string() + " does not match output layer " +
                         params_[kOutEmbed].value.shape_string());
  }
  params_[kOutEmbed].value = table;
  params_[kOutBias].value.fill(0.0);
}

void SeqModel::check_token(std::size_t id, std::size_t vocab, const char* side) const {
  if (id >= vocab) {
    throw IndexError(std::string(side) + " token id " + std::to_string(id) + " out of range for vocabulary of " +
                     std::to_string(vocab));
  }
}

std::size_t SeqModel::source_at(const TokenIds& source, std::size_t t) const {
  return t < source.size() ? source[t] : Vocabulary::kEos;
}

SeqModel::Decoder SeqModel::start(const TokenIds& source) const {
  for (std::size_t id : source) {
    check_token(id, config_.source_vocab, "source");
  }
  Decoder dec;
  dec.source = source;
  dec.pooled = layers::mean_pool_forward(params_[kSrcEmbed].value, source);
  dec.hidden = layers::tanh_forward(
      layers::dense_forward(params_[kInitProj].value, &params_[kInitBias].value, dec.pooled));
  dec.prev_token = Vocabulary::kBos;
  return dec;
}

Vector SeqModel::advance(Decoder& dec) const {
  check_token(dec.prev_token, config_.target_vocab, "target");
  const auto& src_embed = params_[kSrcEmbed].value;
  Vector a = layers::dense_forward(params_[kRecurrent].value, &params_[kRecBias].value, dec.hidden);
  axpy(1.0, params_[kTgtEmbed].value.row(dec.prev_token), a);
  const Vector proj = matvec(params_[kSrcProj].value, src_embed.row(source_at(dec.source, dec.position)));
  axpy(1.0, proj, a);
  dec.hidden = layers::tanh_forward(a);
  ++dec.position;
  return layers::dense_forward(params_[kOutEmbed].value, &params_[kOutBias].value, dec.hidden);
}

Vector SeqModel::forward_step(const TokenIds& source, const TokenIds& prefix) const {
  if (prefix.empty() || prefix.front() != Vocabulary::kBos) {
    throw ConfigError("decoding prefix must start with bos");
  }
  Decoder dec = start(source);
  Vector logits;
  for (std::size_t t = 0; t < prefix.size(); ++t) {
    feed(dec, prefix[t]);
    logits = advance(dec);
  }
  return softmax(logits);
}

SeqModel::Trace SeqModel::forward(const TokenIds& source, const TokenIds& target) const {
  Trace tr;
  tr.source = source;
  tr.target = target;
  Decoder dec = start(source);
  tr.pooled = dec.pooled;
  tr.hidden.reserve(target.size() + 1);
  tr.logits.reserve(target.size());
  tr.hidden.push_back(dec.hidden);
  for (std::size_t t = 0; t < target.size(); ++t) {
    check_token(target[t], config_.target_vocab, "target");
    tr.logits.push_back(advance(dec));
    tr.hidden.push_back(dec.hidden);
    feed(dec, target[t]);
  }
  return tr;
}

void SeqModel::backward(const Trace& tr, std::span<const Vector> dlogits) {
  if (dlogits.size() != tr.logits.size()) {
    throw DimensionError("backward got " + std::to_string(dlogits.size()) + " logit gradients for " +
                         std::to_string(tr.logits.size()) + " steps");
  }
  auto& p = params_;
  const std::size_t d = config_.dim;
  Vector dh(d, 0.0);
  for (std::size_t t = tr.target.size(); t-- > 0;) {
    const Vector& h = tr.hidden[t + 1];
    const Vector& h_prev = tr.hidden[t];
    const Vector from_out = layers::dense_backward(p[kOutEmbed].value, grad_of(p[kOutEmbed]), grad_of(p[kOutBias]),
                                                   h, dlogits[t]);
    axpy(1.0, from_out, dh);
    const Vector da = layers::tanh_backward(h, dh);

    const std::size_t prev = t == 0 ? Vocabulary::kBos : tr.target[t - 1];
    if (!p[kTgtEmbed].frozen) {
      layers::embedding_backward(p[kTgtEmbed].grad, prev, da);
    }
    const std::size_t src = source_at(tr.source, t);
    const auto src_row = p[kSrcEmbed].value.row(src);
    const Vector dsrc = layers::dense_backward(p[kSrcProj].value, grad_of(p[kSrcProj]), nullptr, src_row, da);
    if (!p[kSrcEmbed].frozen) {
      layers::embedding_backward(p[kSrcEmbed].grad, src, dsrc);
    }
    dh = layers::dense_backward(p[kRecurrent].value, grad_of(p[kRecurrent]), grad_of(p[kRecBias]), h_prev, da);
  }
  const Vector da0 = layers::tanh_backward(tr.hidden[0], dh);
  const Vector dpooled =
      layers::dense_backward(p[kInitProj].value, grad_of(p[kInitProj]), grad_of(p[kInitBias]), tr.pooled, da0);
  if (!p[kSrcEmbed].frozen) {
    layers::mean_pool_backward(p[kSrcEmbed].grad, tr.source, dpooled);
  }
}

double SeqModel::log_prob(const TokenIds& source, const TokenIds& target) const {
  const Trace tr = forward(source, target);
  double total = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    total += log_softmax(tr.logits[t])[target[t]];
  }
  return total;
}

std::string SeqModel::config_json() const {
  return "{\"dim\":" + std::to_string(config_.dim) + ",\"source_vocab\":" + std::to_string(config_.source_vocab) +
         ",\"target_vocab\":" + std::to_string(config_.target_vocab) + "}";
}

TokenIds with_eos(const TokenIds& target) {
  TokenIds out = target;
  out.push_back(Vocabulary::kEos);
  return out;
}

double sentence_mle(SeqModel& model, const TokenIds& source, const TokenIds& target, double epsilon,
                    double grad_scale) {
  const TokenIds gold = with_eos(target);
  const auto tr = model.forward(source, gold);
  const double inv = 1.0 / static_cast<double>(gold.size());
  double loss = 0.0;
  std::vector<Vector> dlogits(gold.size());
  for (std::size_t t = 0; t < gold.size(); ++t) {
    LossAndGrad ce = cross_entropy_smoothed(tr.logits[t], gold[t], epsilon);
    loss += ce.loss;
    for (double& g : ce.grad) {
      g *= grad_scale * inv;
    }
    dlogits[t] = std::move(ce.grad);
  }
  if (grad_scale != 0.0) {
    model.backward(tr, dlogits);
  }
  return loss * inv;
}

double sentence_mle_loss(const SeqModel& model, const TokenIds& source, const TokenIds& target, double epsilon) {
  const TokenIds gold = with_eos(target);
  const auto tr = model.forward(source, gold);
  double loss = 0.0;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    loss += cross_entropy_smoothed(tr.logits[t], gold[t], epsilon).loss;
  }
  return loss / static_cast<double>(gold.size());
}

double corpus_mle(const SeqModel& model, const ParallelCorpus& corpus, double epsilon) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const TokenIds gold = with_eos(corpus.target[i]);
    const auto tr = model.forward(corpus.source[i], gold);
    for (std::size_t t = 0; t < gold.size(); ++t) {
      total += cross_entropy_smoothed(tr.logits[t], gold[t], epsilon).loss;
    }
    tokens += gold.size();
  }
  return tokens == 0 ? 0.0 : total / static_cast<double>(tokens);
}

std::vector<Matrix> snapshot(const SeqModel& model) {
  std::vector<Matrix> out;
  for (const auto& g : model.params()) {
    out.push_back(g.value);
  }
  return out;
}

void restore(SeqModel& model, const std::vector<Matrix>& values) {
  auto& params = model.params();
  if (values.size() != params.size()) {
    throw DimensionError("snapshot holds " + std::to_string(values.size()) + " groups, model has " +
                         std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(params[i].value)) {
      throw DimensionError("snapshot shape mismatch for group '" + params[i].name + "'");
    }
    if (!params[i].frozen) {
      params[i].value = values[i];
    }
  }
}

MleResult train_mle(SeqModel& model, const ParallelCorpus& train, const ParallelCorpus& validation,
                    const MleConfig& config) {
  if (train.size() == 0) {
    throw ConfigError("training corpus is empty");
  }
  if (validation.size() == 0) {
    throw ConfigError("validation corpus is empty");
  }
  if (config.batch_size == 0) {
    throw ConfigError("batch size must be positive");
  }
  SgdState sgd(config.sgd);
  MleResult result;
  result.val_loss.push_back(corpus_mle(model, validation, config.epsilon));
  result.train_loss.push_back(corpus_mle(model, train, config.epsilon));
  auto best = snapshot(model);
  double best_loss = result.val_loss.front();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng = make_rng(config.seed, "mle-shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::size_t batch_tokens = 0;
      for (std::size_t b = start; b < stop; ++b) {
        batch_tokens += train.target[order[b]].size() + 1;
      }
      zero_grads(model.params());
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const double len = static_cast<double>(train.target[i].size() + 1);
        const double loss =
            sentence_mle(model, train.source[i], train.target[i], config.epsilon, len / static_cast<double>(batch_tokens));
        epoch_loss += loss * len;
      }
      epoch_tokens += batch_tokens;
      sgd_step(model.params(), sgd);
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(epoch_tokens));
    const double val = corpus_mle(model, validation, config.epsilon);
    result.val_loss.push_back(val);
    if (val < best_loss) {
      best_loss = val;
      best = snapshot(model);
      result.best_epoch = epoch;
    }
  }
  restore(model, best);
  return result;
}

}  // namespace lasrl::seq
