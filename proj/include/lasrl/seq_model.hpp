#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lasrl/corpus.hpp"
#include "lasrl/optim.hpp"
#include "lasrl/rng.hpp"

namespace lasrl::seq {

struct SeqModelConfig {
  std::size_t source_vocab = 0;
  std::size_t target_vocab = 0;
  std::size_t dim = 32;
};

/// f = h(theta2) . g(theta1). g is a tanh recurrent decoder whose initial
/// state comes from the mean-pooled source embeddings and which, at step t,
/// also reads the source token at position t (source eos once past the end).
/// h is the target-embedding layer: logits = theta2 v + bias.
///
///   h0  = tanh(W_init mean(E_src[x]) + b_init)
///   h_t = tanh(W_rec h_{t-1} + E_tgt[y_{t-1}] + W_src E_src[x_t] + b_rec)
///   p_t = softmax(theta2 h_t + b_out)
class SeqModel {
 public:
  enum Group : std::size_t {
    kSrcEmbed,
    kInitProj,
    kInitBias,
    kRecurrent,
    kSrcProj,
    kTgtEmbed,
    kRecBias,
    kOutEmbed,  // theta2: one row per target token
    kOutBias,
    kNumGroups
  };

  SeqModel(SeqModelConfig config, Rng& rng);

  const SeqModelConfig& config() const { return config_; }
  std::size_t dim() const { return config_.dim; }
  std::size_t target_vocab() const { return config_.target_vocab; }

  std::vector<ParamGroup>& params() { return params_; }
  const std::vector<ParamGroup>& params() const { return params_; }
  ParamGroup& group(Group g) { return params_[g]; }
  const ParamGroup& group(Group g) const { return params_[g]; }

  // theta2 and its bias are frozen and unfrozen together.
  void set_output_frozen(bool frozen);
  bool output_frozen() const { return params_[kOutEmbed].frozen; }
  // Copies `table` into theta2 and zeroes the output bias.
  void set_output_embedding(const Matrix& table);

  /// Incremental decoding state for one source sentence.
  struct Decoder {
    TokenIds source;
    Vector pooled;
    Vector hidden;  // h_{t-1}
    std::size_t position = 0;
    std::size_t prev_token = 0;
  };

  Decoder start(const TokenIds& source) const;
  // Advances by one step and returns the logits for the next token.
  Vector advance(Decoder& dec) const;
  // Feeds `token` as the previous output for the next advance().
  static void feed(Decoder& dec, std::size_t token) { dec.prev_token = token; }

  /// Next-token distribution given the source and a bos-led prefix.
  Vector forward_step(const TokenIds& source, const TokenIds& prefix) const;

  /// Teacher-forced pass over `target` (which must already end in eos when
  /// eos is to be scored).
  struct Trace {
    TokenIds source;
    TokenIds target;
    Vector pooled;
    std::vector<Vector> hidden;  // hidden[0] = h0, hidden[t+1] = h_t
    std::vector<Vector> logits;  // logits[t] predicts target[t]
  };
  Trace forward(const TokenIds& source, const TokenIds& target) const;

  /// Accumulates parameter gradients given dL/dlogits for every step.
  void backward(const Trace& trace, std::span<const Vector> dlogits);

  double log_prob(const TokenIds& source, const TokenIds& target) const;

  std::string config_json() const;

 private:
  std::size_t source_at(const TokenIds& source, std::size_t t) const;
  void check_token(std::size_t id, std::size_t vocab, const char* side) const;

  SeqModelConfig config_;
  std::vector<ParamGroup> params_;
};

/// Target with eos appended.
TokenIds with_eos(const TokenIds& target);

/// Mean per-token smoothed cross-entropy of one sentence (eos included).
/// When `grad_scale` is non-zero the gradient of grad_scale * loss is
/// accumulated into the model.
double sentence_mle(SeqModel& model, const TokenIds& source, const TokenIds& target, double epsilon,
                    double grad_scale);

double sentence_mle_loss(const SeqModel& model, const TokenIds& source, const TokenIds& target, double epsilon);

/// Token-weighted mean smoothed cross-entropy over a corpus.
double corpus_mle(const SeqModel& model, const ParallelCorpus& corpus, double epsilon);

struct MleConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double epsilon = 0.1;
  SgdOptions sgd{};
  std::uint64_t seed = 1;
};

struct MleResult {
  // Entry 0 of both is the loss before training; later training entries
  // are running means over the epoch.
  std::vector<double> val_loss;
  std::vector<double> train_loss;
  std::size_t best_epoch = 0;
};

/// Teacher-forced training with minibatch SGD. Keeps the parameters of the
/// epoch with the lowest validation loss.
MleResult train_mle(SeqModel& model, const ParallelCorpus& train, const ParallelCorpus& validation,
                    const MleConfig& config);

std::vector<Matrix> snapshot(const SeqModel& model);
void restore(SeqModel& model, const std::vector<Matrix>& values);

}  // namespace lasrl::seq
