#pragma once

#include <cstddef>
#include <span>

namespace lasrl::seq {

inline constexpr int kBleuOrder = 4;

/// Sentence BLEU-4 on the 0..100 scale. Clipped n-gram precisions, with 1
/// added to numerator and denominator for n >= 2; geometric mean over
/// n = 1..4; brevity penalty exp(min(0, 1 - r/c)). An empty hypothesis
/// scores 0. Throws ConfigError on an empty reference.
double smoothed_bleu(std::span<const std::size_t> hypothesis, std::span<const std::size_t> reference);

}  // namespace lasrl::seq
