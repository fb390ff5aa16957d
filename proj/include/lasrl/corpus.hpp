#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lasrl::seq {

using TokenIds = std::vector<std::size_t>;

/// Token <-> id map with pad/bos/eos at ids 0..2. Every token also carries a
/// base id: specials are their own base, and all inflections `lexN#i` of
/// lexeme N share base kNumSpecials + N. For a target vocabulary built with
/// one inflection the base id equals the token id.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;
  static constexpr std::size_t kNumSpecials = 3;

  Vocabulary();

  /// `prefix`0 .. `prefix`(lexemes-1); with inflections > 1 every lexeme
  /// expands to `prefix`N#0 .. `prefix`N#(inflections-1), adjacent in id order.
  static Vocabulary lexical(std::string_view prefix, std::size_t lexemes, std::size_t inflections = 1);

  std::size_t add(const std::string& token, std::size_t base);

  std::size_t size() const { return tokens_.size(); }
  std::size_t num_bases() const { return num_bases_; }
  const std::string& token(std::size_t id) const;
  std::optional<std::size_t> find(std::string_view token) const;
  std::size_t id(std::string_view token) const;  // IndexError when unknown
  std::size_t base_of(std::size_t id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenIds encode(std::string_view line) const;
  std::string decode(const TokenIds& ids) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> base_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t num_bases_ = 0;
};

struct TaskSpec {
  std::size_t source_lexemes = 40;
  std::size_t inflections = 1;
  // The first `synonym_lexemes` source lexemes get a second target lexeme;
  // each occurrence picks one of the two uniformly.
  std::size_t synonym_lexemes = 0;
  std::size_t min_length = 4;
  std::size_t max_length = 8;
  std::size_t reorder_window = 1;
  std::uint64_t seed = 1;

  std::size_t target_lexemes() const { return source_lexemes + synonym_lexemes; }
  void validate() const;  // ConfigError
};

/// Source/target vocabularies plus the lexicon drawn from the spec seed.
struct Task {
  TaskSpec spec;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  std::vector<std::size_t> lexicon;  // source lexeme -> target lexeme (a permutation)
  std::vector<std::size_t> synonym;  // source lexeme -> synonym target lexeme, or kNoSynonym

  static constexpr std::size_t kNoSynonym = static_cast<std::size_t>(-1);
};

Task make_task(const TaskSpec& spec);

/// Parallel sentences; targets hold neither bos nor eos.
struct ParallelCorpus {
  std::vector<TokenIds> source;
  std::vector<TokenIds> target;

  std::size_t size() const { return source.size(); }
  std::size_t target_tokens() const;
};

/// Sentence i of split `split` draws from sub-streams indexed by i, so the
/// inflection draw is independent of everything else: the inflections=1 task
/// is exactly the base-id image of any inflected task with the same seed.
ParallelCorpus generate_corpus(const Task& task, std::size_t n, std::string_view split);

/// Maps every target token onto its base id (the small-vocabulary view).
ParallelCorpus collapse_inflections(const ParallelCorpus& corpus, const Vocabulary& target_vocab);

void write_corpus(const ParallelCorpus& corpus, const Vocabulary& source_vocab, const Vocabulary& target_vocab,
                  const std::filesystem::path& stem);
ParallelCorpus read_corpus(const Vocabulary& source_vocab, const Vocabulary& target_vocab,
                           const std::filesystem::path& stem);

}  // namespace lasrl::seq
