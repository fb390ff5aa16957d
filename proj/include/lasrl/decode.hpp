#pragma once

#include <cstddef>
#include <vector>

#include "lasrl/corpus.hpp"
#include "lasrl/seq_model.hpp"

namespace lasrl::seq {

struct Hypothesis {
  TokenIds tokens;  // no bos; ends in eos unless the length bound was hit
  double score = 0.0;  // sum of per-step log-probabilities
  bool finished = false;

  // Output tokens without the trailing eos.
  TokenIds words() const;
};

/// Score descending, then token ids lexicographically ascending.
bool better(const Hypothesis& a, const Hypothesis& b);

/// Length-bounded beam search over summed log-probabilities, no length
/// normalization. Each step ranks every one-token expansion of the live
/// beam; expansions ending in eos that rank within the top k are finished,
/// and the best k non-eos expansions stay live. A live hypothesis reaching
/// max_len tokens is closed as is. Returns up to k hypotheses, best first;
/// with k at least the number of possible outputs this enumerates them all.
std::vector<Hypothesis> beam_search(const SeqModel& model, const TokenIds& source, std::size_t k,
                                    std::size_t max_len);

/// Beam-search 1-best for every source sentence (parallel over sentences).
std::vector<TokenIds> decode_corpus(const SeqModel& model, const std::vector<TokenIds>& sources, std::size_t k,
                                    std::size_t extra_len);

}  // namespace lasrl::seq
