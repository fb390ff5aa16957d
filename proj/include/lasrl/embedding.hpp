#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lasrl/corpus.hpp"
#include "lasrl/rng.hpp"
#include "lasrl/tensor.hpp"

namespace lasrl::seq {

/// Word-embedding text format: one `token v1 ... vd` row per line,
/// whitespace separated. A leading `count dim` header line is accepted.
struct EmbeddingTable {
  std::vector<std::string> tokens;
  Matrix vectors;
};

EmbeddingTable read_embedding_table(const std::filesystem::path& path);  // ParseError with line number
void write_embedding_table(const std::filesystem::path& path, const std::vector<std::string>& tokens,
                           const Matrix& vectors);

struct EmbeddingInit {
  Matrix table;  // |vocab| x dim, ready for SeqModel::set_output_embedding
  std::size_t covered = 0;
  std::vector<std::string> missing;

  double coverage() const;
};

/// Rows matched by token string. Tokens absent from the file get a random
/// direction scaled to the mean norm of the loaded rows; they are listed in
/// `missing`, never fatal. ConfigError when the file dimension is not `dim`.
EmbeddingInit load_embedding_table(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim,
                                   Rng& rng);
EmbeddingInit match_embedding_table(const EmbeddingTable& file, const Vocabulary& vocab, std::size_t dim,
                                    Rng& rng);

/// One random row per base id (uniform in +-1/sqrt(dim)), shared by every
/// token with that base: all inflections of a lexeme get the same vector.
Matrix shared_inflection_table(const Vocabulary& vocab, std::size_t dim, Rng& rng);

}  // namespace lasrl::seq
