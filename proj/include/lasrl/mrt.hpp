#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lasrl/corpus.hpp"
#include "lasrl/optim.hpp"
#include "lasrl/seq_model.hpp"

namespace lasrl::mrt {

using seq::TokenIds;

struct Candidate {
  TokenIds tokens;  // as scored, eos included when the hypothesis finished
  double log_prob = 0.0;
  double risk = 0.0;  // cost to minimize
};

struct CandidateSet {
  TokenIds source;
  TokenIds reference;
  std::vector<Candidate> candidates;
};

struct RiskResult {
  double loss = 0.0;
  Vector weights;   // w_u = softmax(beta * log P)_u
  Vector dlog_prob;  // dL/dlog P_u = beta * w_u * (R_u - L)
};

/// Expected risk over the renormalized candidate set,
///   L = sum_u w_u R_u,  w = softmax(beta * log P).
/// The gradient goes through the weights and their normalizer.
RiskResult risk_loss(const CandidateSet& cands, double beta);

/// alpha * mle + (1 - alpha) * risk, gradients mixed the same way.
LossAndGrad combined_loss(const LossAndGrad& mle, const LossAndGrad& risk, double alpha);

/// Reward of a hypothesis against its reference, on the 0..100 scale.
using RewardFn = std::function<double(const TokenIds& hypothesis, const TokenIds& reference)>;
RewardFn make_reward(const std::string& name);  // "smoothed_bleu" or "constant"; ConfigError otherwise

struct MrtConfig {
  double alpha = 0.3;
  double beta = 1.0;
  std::size_t k = 8;
  std::size_t epochs = 15;
  std::string reward = "smoothed_bleu";
  double epsilon = 0.1;       // label smoothing of the MLE term
  std::size_t extra_len = 2;  // candidate length bound: source length + extra_len
  SgdOptions sgd{};
  std::uint64_t seed = 1;

  void validate() const;  // ConfigError
};

/// Beam candidates for one sentence, with log P re-scored by teacher forcing
/// and risk = 100 - reward.
CandidateSet make_candidates(const seq::SeqModel& model, const TokenIds& source, const TokenIds& reference,
                             const MrtConfig& config, const RewardFn& reward);

/// Loss and parameter gradient of alpha * MLE + (1 - alpha) * risk on one
/// sentence; gradients are accumulated into the model.
struct SentenceLoss {
  double mle = 0.0;
  double risk = 0.0;
  double combined = 0.0;
};
SentenceLoss accumulate_sentence_gradient(seq::SeqModel& model, const CandidateSet& cands, const MrtConfig& config);

/// Evaluates the risk of a fixed candidate set under the current model
/// (log P recomputed) and accumulates d(scale * risk)/dtheta.
double risk_gradient(seq::SeqModel& model, const CandidateSet& cands, double beta, double scale);

struct EpochLog {
  std::size_t epoch = 0;
  double mle_loss = 0.0;   // training means; not defined for epoch 0
  double risk_loss = 0.0;
  double val_loss = 0.0;   // combined objective on validation
  double val_bleu = 0.0;   // mean sentence BLEU of the beam 1-best
};

struct ValidationScore {
  double loss = 0.0;
  double bleu = 0.0;
};
ValidationScore evaluate(const seq::SeqModel& model, const seq::ParallelCorpus& validation, const MrtConfig& config,
                         const RewardFn& reward);

struct MrtResult {
  std::vector<EpochLog> log;  // log[0] is the starting model
  std::size_t best_epoch = 0;
  std::vector<std::string> warnings;
};

/// One sentence per update. Keeps the parameters of the epoch (>= 1) with
/// the lowest validation loss.
MrtResult mrt_finetune(seq::SeqModel& model, const seq::ParallelCorpus& train, const seq::ParallelCorpus& validation,
                       const MrtConfig& config);

void write_train_log(const MrtResult& result, const std::filesystem::path& path);

}  // namespace lasrl::mrt
