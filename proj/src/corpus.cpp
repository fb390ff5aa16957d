#include "lasrl/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lasrl/errors.hpp"
#include "lasrl/rng.hpp"

namespace lasrl::seq {

Vocabulary::Vocabulary() {
  add("<pad>", 0);
  add("<s>", 1);
  add("</s>", 2);
}

Vocabulary Vocabulary::lexical(std::string_view prefix, std::size_t lexemes, std::size_t inflections) {
  if (inflections == 0) {
    throw ConfigError("inflections per lexeme must be positive");
  }
  Vocabulary v;
  for (std::size_t n = 0; n < lexemes; ++n) {
    const std::string stem = std::string(prefix) + std::to_string(n);
    if (inflections == 1) {
      v.add(stem, kNumSpecials + n);
      continue;
    }
    for (std::size_t i = 0; i < inflections; ++i) {
      v.add(stem + "#" + std::to_string(i), kNumSpecials + n);
    }
  }
  return v;
}

std::size_t Vocabulary::add(const std::string& token, std::size_t base) {
  if (token.empty() || token.find_first_of(" \t\r\n") != std::string::npos) {
    throw ConfigError("token '" + token + "' is empty or contains whitespace");
  }
  if (index_.contains(token)) {
    throw ConfigError("duplicate token '" + token + "'");
  }
  const std::size_t id = tokens_.size();
  tokens_.push_back(token);
  base_.push_back(base);
  index_.emplace(token, id);
  num_bases_ = std::max(num_bases_, base + 1);
  return id;
}

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) {
    throw IndexError("token id " + std::to_string(id) + " out of range for vocabulary of " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::size_t Vocabulary::id(std::string_view token) const {
  if (const auto found = find(token)) {
    return *found;
  }
  throw IndexError("unknown token '" + std::string(token) + "'");
}

std::size_t Vocabulary::base_of(std::size_t id) const {
  token(id);  // range check
  return base_[id];
}

TokenIds Vocabulary::encode(std::string_view line) const {
  TokenIds out;
  std::istringstream is{std::string(line)};
  std::string tok;
  while (is >> tok) {
    out.push_back(id(tok));
  }
  return out;
}

std::string Vocabulary::decode(const TokenIds& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) {
      out += ' ';
    }
    out += token(ids[i]);
  }
  return out;
}

void TaskSpec::validate() const {
  if (source_lexemes < 2) {
    throw ConfigError("task needs at least two source lexemes");
  }
  if (inflections == 0) {
    throw ConfigError("inflections per lexeme must be positive");
  }
  if (synonym_lexemes > source_lexemes) {
    throw ConfigError("synonym lexemes cannot exceed source lexemes");
  }
  if (min_length == 0 || min_length > max_length) {
    throw ConfigError("sentence length range must satisfy 1 <= min <= max");
  }
  if (reorder_window == 0) {
    throw ConfigError("reorder window must be at least 1");
  }
}

Task make_task(const TaskSpec& spec) {
  spec.validate();
  Task task;
  task.spec = spec;
  task.source_vocab = Vocabulary::lexical("src", spec.source_lexemes);
  task.target_vocab = Vocabulary::lexical("lex", spec.target_lexemes(), spec.inflections);
  task.lexicon.resize(spec.source_lexemes);
  std::iota(task.lexicon.begin(), task.lexicon.end(), std::size_t{0});
  Rng rng = make_rng(spec.seed, "lexicon");
  std::shuffle(task.lexicon.begin(), task.lexicon.end(), rng);
  task.synonym.assign(spec.source_lexemes, Task::kNoSynonym);
  for (std::size_t j = 0; j < spec.synonym_lexemes; ++j) {
    task.synonym[j] = spec.source_lexemes + j;
  }
  return task;
}

std::size_t ParallelCorpus::target_tokens() const {
  std::size_t n = 0;
  for (const auto& t : target) {
    n += t.size();
  }
  return n;
}

ParallelCorpus generate_corpus(const Task& task, std::size_t n, std::string_view split) {
  if (n == 0) {
    throw ConfigError("corpus size must be positive");
  }
  const TaskSpec& spec = task.spec;
  const std::string base = "data-" + std::string(split);
  ParallelCorpus corpus;
  corpus.source.reserve(n);
  corpus.target.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng src_rng = make_rng(spec.seed, base + "-source", i);
    Rng syn_rng = make_rng(spec.seed, base + "-synonym", i);
    Rng order_rng = make_rng(spec.seed, base + "-order", i);
    Rng infl_rng = make_rng(spec.seed, base + "-inflection", i);

    const std::size_t len = std::uniform_int_distribution<std::size_t>(spec.min_length, spec.max_length)(src_rng);
    std::uniform_int_distribution<std::size_t> pick_lexeme(0, spec.source_lexemes - 1);
    TokenIds src(len);
    std::vector<std::size_t> lexemes(len);
    for (std::size_t j = 0; j < len; ++j) {
      const std::size_t s = pick_lexeme(src_rng);
      src[j] = Vocabulary::kNumSpecials + s;
      lexemes[j] = task.lexicon[s];
      if (task.synonym[s] != Task::kNoSynonym && std::bernoulli_distribution(0.5)(syn_rng)) {
        lexemes[j] = task.synonym[s];
      }
    }
    for (std::size_t start = 0; start < len; start += spec.reorder_window) {
      const std::size_t stop = std::min(len, start + spec.reorder_window);
      std::shuffle(lexemes.begin() + static_cast<std::ptrdiff_t>(start),
                   lexemes.begin() + static_cast<std::ptrdiff_t>(stop), order_rng);
    }
    std::uniform_int_distribution<std::size_t> pick_inflection(0, spec.inflections - 1);
    TokenIds tgt(len);
    for (std::size_t j = 0; j < len; ++j) {
      tgt[j] = Vocabulary::kNumSpecials + lexemes[j] * spec.inflections + pick_inflection(infl_rng);
    }
    corpus.source.push_back(std::move(src));
    corpus.target.push_back(std::move(tgt));
  }
  return corpus;
}

ParallelCorpus collapse_inflections(const ParallelCorpus& corpus, const Vocabulary& target_vocab) {
  ParallelCorpus out = corpus;
  for (auto& sentence : out.target) {
    for (auto& tok : sentence) {
      tok = target_vocab.base_of(tok);
    }
  }
  return out;
}

namespace {

void write_lines(const std::vector<TokenIds>& sentences, const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  for (const auto& s : sentences) {
    out << vocab.decode(s) << '\n';
  }
}

std::vector<TokenIds> read_lines(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  std::vector<TokenIds> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      out.push_back(vocab.encode(line));
    } catch (const IndexError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return stem.string() + suffix;
}

}  // namespace

void write_corpus(const ParallelCorpus& corpus, const Vocabulary& source_vocab, const Vocabulary& target_vocab,
                  const std::filesystem::path& stem) {
  write_lines(corpus.source, source_vocab, with_suffix(stem, ".src"));
  write_lines(corpus.target, target_vocab, with_suffix(stem, ".tgt"));
}

ParallelCorpus read_corpus(const Vocabulary& source_vocab, const Vocabulary& target_vocab,
                           const std::filesystem::path& stem) {
  ParallelCorpus corpus;
  corpus.source = read_lines(source_vocab, with_suffix(stem, ".src"));
  corpus.target = read_lines(target_vocab, with_suffix(stem, ".tgt"));
  if (corpus.source.size() != corpus.target.size()) {
    throw ParseError(stem.string() + ": " + std::to_string(corpus.source.size()) + " source lines but " +
                     std::to_string(corpus.target.size()) + " target lines");
  }
  return corpus;
}

}  // namespace lasrl::seq
