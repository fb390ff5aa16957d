#include "lasrl/decode.hpp"

#include <algorithm>

#include "lasrl/errors.hpp"
#include "lasrl/parallel.hpp"

namespace lasrl::seq {

TokenIds Hypothesis::words() const {
  TokenIds out = tokens;
  if (!out.empty() && out.back() == Vocabulary::kEos) {
    out.pop_back();
  }
  return out;
}

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) {
    return a.score > b.score;
  }
  return a.tokens < b.tokens;
}

namespace {

struct Live {
  Hypothesis hyp;
  SeqModel::Decoder dec;
};

struct Expansion {
  std::size_t parent;
  std::size_t token;
  double score;
};

}  // namespace

std::vector<Hypothesis> beam_search(const SeqModel& model, const TokenIds& source, std::size_t k,
                                    std::size_t max_len) {
  if (k == 0) {
    throw ConfigError("beam size must be at least 1");
  }
  std::vector<Hypothesis> done;
  std::size_t finished = 0;
  std::vector<Live> live;
  live.push_back({Hypothesis{}, model.start(source)});
  if (max_len == 0) {
    return {live.front().hyp};
  }

  const std::size_t vocab = model.target_vocab();
  std::vector<Expansion> cands;
  while (!live.empty() && finished < k) {
    cands.clear();
    std::vector<SeqModel::Decoder> next_states;
    next_states.reserve(live.size());
    for (std::size_t i = 0; i < live.size(); ++i) {
      SeqModel::Decoder dec = live[i].dec;
      const Vector logp = log_softmax(model.advance(dec));
      next_states.push_back(std::move(dec));
      // pad and bos are never emitted.
      for (std::size_t tok = Vocabulary::kEos; tok < vocab; ++tok) {
        cands.push_back({i, tok, live[i].hyp.score + logp[tok]});
      }
    }
    // Tie-break on the full token sequence: parent prefixes first, then the
    // new token.
    const auto before = [&](const Expansion& a, const Expansion& b) {
      if (a.score != b.score) {
        return a.score > b.score;
      }
      const TokenIds& pa = live[a.parent].hyp.tokens;
      const TokenIds& pb = live[b.parent].hyp.tokens;
      if (pa != pb) {
        return pa < pb;
      }
      return a.token < b.token;
    };
    const std::size_t keep = std::min(cands.size(), 2 * k);
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), before);

    std::vector<Live> next;
    for (std::size_t pos = 0; pos < keep; ++pos) {
      const Expansion& e = cands[pos];
      if (e.token == Vocabulary::kEos) {
        if (pos < k) {
          Hypothesis h = live[e.parent].hyp;
          h.tokens.push_back(e.token);
          h.score = e.score;
          h.finished = true;
          done.push_back(std::move(h));
          ++finished;
        }
        continue;
      }
      if (next.size() == k) {
        continue;
      }
      Live l{live[e.parent].hyp, next_states[e.parent]};
      l.hyp.tokens.push_back(e.token);
      l.hyp.score = e.score;
      SeqModel::feed(l.dec, e.token);
      if (l.hyp.tokens.size() >= max_len) {
        done.push_back(std::move(l.hyp));
      } else {
        next.push_back(std::move(l));
      }
    }
    live = std::move(next);
  }
  std::sort(done.begin(), done.end(), better);
  if (done.size() > k) {
    done.resize(k);
  }
  return done;
}

std::vector<TokenIds> decode_corpus(const SeqModel& model, const std::vector<TokenIds>& sources, std::size_t k,
                                    std::size_t extra_len) {
  std::vector<TokenIds> out(sources.size());
  parallel_for(sources.size(), [&](std::size_t i) {
    const auto hyps = beam_search(model, sources[i], k, sources[i].size() + extra_len);
    if (!hyps.empty()) {
      out[i] = hyps.front().words();
    }
  });
  return out;
}

}  // namespace lasrl::seq
