#include "lasrl/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "lasrl/errors.hpp"

namespace lasrl::seq {

namespace {

using Ngram = std::vector<std::size_t>;

std::map<Ngram, std::size_t> count_ngrams(std::span<const std::size_t> tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double smoothed_bleu(std::span<const std::size_t> hypothesis, std::span<const std::size_t> reference) {
  if (reference.empty()) {
    throw ConfigError("BLEU reference must be non-empty");
  }
  if (hypothesis.empty()) {
    return 0.0;
  }
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    const auto hyp = count_ngrams(hypothesis, n);
    const auto ref = count_ngrams(reference, n);
    std::size_t matches = 0;
    for (const auto& [gram, c] : hyp) {
      const auto it = ref.find(gram);
      if (it != ref.end()) {
        matches += std::min(c, it->second);
      }
    }
    const std::size_t total = hypothesis.size() >= n ? hypothesis.size() - n + 1 : 0;
    const double add = n >= 2 ? 1.0 : 0.0;
    const double num = static_cast<double>(matches) + add;
    const double den = static_cast<double>(total) + add;
    if (num == 0.0) {
      return 0.0;
    }
    log_sum += std::log(num / den);
  }
  const double c = static_cast<double>(hypothesis.size());
  const double r = static_cast<double>(reference.size());
  const double log_bp = std::min(0.0, 1.0 - r / c);
  return 100.0 * std::exp(log_sum / kBleuOrder + log_bp);
}

}  // namespace lasrl::seq
