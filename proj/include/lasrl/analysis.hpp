#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lasrl/corpus.hpp"
#include "lasrl/rng.hpp"
#include "lasrl/seq_model.hpp"
#include "lasrl/tensor.hpp"

namespace lasrl::analysis {

/// 1 + number of tokens ranked above `gold`: strictly more probable, or
/// equally probable with a smaller id.
std::size_t gold_rank(std::span<const double> probs, std::size_t gold);

struct RankHistogram {
  std::vector<std::size_t> counts;  // counts[r - 1] for rank r in 1..|V_T|
  std::size_t total = 0;

  explicit RankHistogram(std::size_t vocab = 0) : counts(vocab, 0) {}
  void add(std::span<const double> probs, std::size_t gold);
  Vector probabilities() const;  // P^r
};

/// Forced decoding with gold prefixes; one event per reference token (eos
/// is not scored).
RankHistogram rank_distribution(const seq::SeqModel& model, const seq::ParallelCorpus& corpus);

struct RankShift {
  Vector delta;  // P^r_after - P^r_before
  std::size_t negative_top100 = 0;  // ranks 1..100 with delta < 0
};

RankShift rank_shift(const RankHistogram& before, const RankHistogram& after);  // ConfigError on size mismatch

struct Peakiness {
  double entropy = 0.0;  // mean H(p) / ln|V|
  double kl = 0.0;       // mean (ln|V| - H(p)) / ln|V|
  std::size_t steps = 0;
};

double normalized_entropy(std::span<const double> probs);
Peakiness peakiness(const seq::SeqModel& model, const seq::ParallelCorpus& corpus);

enum class PairKind { Inflections, Synonyms, Random };
std::string_view pair_kind_name(PairKind k);
PairKind parse_pair_kind(std::string_view name);  // ConfigError

struct PairList {
  PairKind kind = PairKind::Random;
  std::vector<std::pair<std::string, std::string>> pairs;
};

/// TSV: a `#kind:<name>` header, then two tab-separated tokens per line.
PairList read_pair_list(const std::filesystem::path& path);  // ParseError with line number
void write_pair_list(const PairList& list, const std::filesystem::path& path);

/// Pair lists from the task structure: inflections of one lexeme, lexeme /
/// synonym-lexeme pairs (empty without synonyms), and random pairs of
/// different base lexemes. Each list holds up to `per_list` distinct pairs.
std::vector<PairList> toy_pair_lists(const seq::Task& task, std::size_t per_list, Rng& rng);

double cosine(std::span<const double> a, std::span<const double> b);  // 0 when either vector is zero

struct ListSummary {
  PairKind kind = PairKind::Random;
  Vector cosines;
  double mean = 0.0;
  double median = 0.0;
  // NaN for an empty list; overlap also NaN without a non-empty random list.
  double overlap = 0.0;  // sum over bins of min(p, q) against the random list
  std::size_t skipped = 0;  // pairs with a token missing from the table
  std::vector<std::size_t> histogram;
};

struct SimilarityStudy {
  Vector bin_edges;  // bins + 1 edges over [-1, 1]
  std::vector<ListSummary> lists;
};

SimilarityStudy embedding_similarity_study(const std::vector<std::string>& tokens, const Matrix& table,
                                           const std::vector<PairList>& lists, std::size_t bins = 40);

template <class T>
using Labeled = std::vector<std::pair<std::string, T>>;

void write_rank_hist_csv(const Labeled<RankHistogram>& hists, const std::filesystem::path& path);
void write_rank_shift_csv(const Labeled<RankShift>& shifts, const std::filesystem::path& path);
void write_peakiness_csv(const Labeled<Peakiness>& rows, const std::filesystem::path& path);
void write_cosine_hist_csv(const SimilarityStudy& study, const std::filesystem::path& path);

}  // namespace lasrl::analysis
