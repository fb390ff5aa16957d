#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lasrl/embedding.hpp"
#include "lasrl/errors.hpp"

using namespace lasrl;
using namespace lasrl::seq;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("lasrl_emb_" + name);
  std::ofstream(path) << text;
  return path;
}

std::string parse_error_of(const std::string& text) {
  const auto path = temp_file("bad.vec", text);
  try {
    read_embedding_table(path);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("embedding tables round trip exactly") {
  Rng rng(81);
  const std::vector<std::string> tokens{"lex0#0", "lex0#1", "lex1#0"};
  Matrix m(3, 4);
  for (double& v : m.values()) {
    v = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  }
  const auto path = std::filesystem::temp_directory_path() / "lasrl_emb_roundtrip.vec";
  write_embedding_table(path, tokens, m);
  const auto back = read_embedding_table(path);
  CHECK(back.tokens == tokens);
  CHECK(back.vectors == m);
  CHECK_THROWS_AS(write_embedding_table(path, {"a"}, m), DimensionError);
  std::filesystem::remove(path);
}

TEST_CASE("a count/dim header line is accepted") {
  const auto t = read_embedding_table(temp_file("header.vec", "2 3\na 1 2 3\nb 4 5 6\n"));
  CHECK(t.tokens == std::vector<std::string>{"a", "b"});
  CHECK(t.vectors(1, 2) == 6.0);
}

TEST_CASE("malformed tables report the offending line") {
  CHECK(parse_error_of("a 1 2\nb 1\n").find("bad.vec:2") != std::string::npos);
  CHECK(parse_error_of("a 1 2\nb 1 x\n").find("bad.vec:2") != std::string::npos);
  CHECK(parse_error_of("a 1 2\n\nlonely\n").find("bad.vec:3") != std::string::npos);
  CHECK(parse_error_of("a nan 2\n").find("bad.vec:1") != std::string::npos);
  CHECK_FALSE(parse_error_of("\n\n").empty());
}

TEST_CASE("matching a table to a vocabulary: coverage and missing rows") {
  const auto vocab = Vocabulary::lexical("lex", 2, 2);  // 3 specials + 4 words
  EmbeddingTable file;
  file.tokens = {"lex0#0", "lex1#1", "unknown"};
  file.vectors = Matrix(3, 2, {3.0, 4.0, 0.0, 5.0, 9.0, 9.0});
  Rng rng(82);
  const auto init = match_embedding_table(file, vocab, 2, rng);
  CHECK(init.covered == 2);
  CHECK(init.missing.size() == vocab.size() - 2);
  CHECK(init.coverage() == doctest::Approx(2.0 / 7.0));
  CHECK(init.table(vocab.id("lex0#0"), 0) == 3.0);
  CHECK(init.table(vocab.id("lex1#1"), 1) == 5.0);
  // Missing rows take the mean norm of the loaded rows.
  CHECK(norm(init.table.row(vocab.id("lex0#1"))) == doctest::Approx(5.0));
  Rng rng2(82);
  CHECK_THROWS_AS(match_embedding_table(file, vocab, 3, rng2), ConfigError);
}

TEST_CASE("shared inflection table gives every inflection its lexeme's row") {
  const auto vocab = Vocabulary::lexical("lex", 4, 3);
  Rng rng(83);
  const Matrix t = shared_inflection_table(vocab, 5, rng);
  CHECK(t.rows() == vocab.size());
  for (std::size_t a = 0; a < vocab.size(); ++a) {
    for (std::size_t b = 0; b < vocab.size(); ++b) {
      const auto ra = t.row(a);
      const auto rb = t.row(b);
      CHECK(std::equal(ra.begin(), ra.end(), rb.begin()) == (vocab.base_of(a) == vocab.base_of(b)));
    }
  }
  CHECK_FALSE(t(vocab.id("lex0#0"), 0) == t(vocab.id("lex1#0"), 0));
}
