#include "lasrl/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lasrl/csv.hpp"
#include "lasrl/errors.hpp"

namespace lasrl::seq {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string f;
  while (is >> f) {
    out.push_back(f);
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool is_count(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

EmbeddingTable read_embedding_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  EmbeddingTable table;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& why) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) {
      continue;
    }
    if (line_no == 1 && fields.size() == 2 && is_count(fields[0]) && is_count(fields[1])) {
      continue;  // "count dim" header
    }
    if (fields.size() < 2) {
      fail("expected a token followed by at least one value");
    }
    if (dim == 0) {
      dim = fields.size() - 1;
    } else if (fields.size() - 1 != dim) {
      fail("row has " + std::to_string(fields.size() - 1) + " values, expected " + std::to_string(dim));
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      if (!parse_double(fields[i], v) || !std::isfinite(v)) {
        fail("bad number '" + fields[i] + "'");
      }
      values.push_back(v);
    }
    table.tokens.push_back(fields[0]);
  }
  if (table.tokens.empty()) {
    throw ParseError(path.string() + ": no embedding rows");
  }
  table.vectors = Matrix(table.tokens.size(), dim, std::move(values));
  return table;
}

void write_embedding_table(const std::filesystem::path& path, const std::vector<std::string>& tokens,
                           const Matrix& vectors) {
  if (tokens.size() != vectors.rows()) {
    throw DimensionError("embedding table has " + std::to_string(vectors.rows()) + " rows for " +
                         std::to_string(tokens.size()) + " tokens");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    out << tokens[r];
    for (double v : vectors.row(r)) {
      out << ' ' << format_double(v);
    }
    out << '\n';
  }
}

double EmbeddingInit::coverage() const {
  const std::size_t total = covered + missing.size();
  return total == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(total);
}

EmbeddingInit match_embedding_table(const EmbeddingTable& file, const Vocabulary& vocab, std::size_t dim,
                                    Rng& rng) {
  if (file.vectors.cols() != dim) {
    throw ConfigError("embedding dimension " + std::to_string(file.vectors.cols()) +
                      " does not match model dimension " + std::to_string(dim));
  }
  EmbeddingInit init;
  init.table = Matrix(vocab.size(), dim);
  std::vector<bool> filled(vocab.size(), false);
  double norm_sum = 0.0;
  for (std::size_t r = 0; r < file.tokens.size(); ++r) {
    const auto id = vocab.find(file.tokens[r]);
    if (!id || filled[*id]) {
      continue;
    }
    const auto row = file.vectors.row(r);
    std::copy(row.begin(), row.end(), init.table.row(*id).begin());
    filled[*id] = true;
    norm_sum += norm(row);
    ++init.covered;
  }
  const double mean_norm = init.covered == 0 ? 1.0 : norm_sum / static_cast<double>(init.covered);
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    if (filled[id]) {
      continue;
    }
    init.missing.push_back(vocab.token(id));
    Vector v = gaussian_vector(rng, dim);
    const double n = norm(v);
    const double scale = n > 0.0 ? mean_norm / n : 0.0;
    auto dst = init.table.row(id);
    for (std::size_t c = 0; c < dim; ++c) {
      dst[c] = v[c] * scale;
    }
  }
  return init;
}

EmbeddingInit load_embedding_table(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim,
                                   Rng& rng) {
  return match_embedding_table(read_embedding_table(path), vocab, dim, rng);
}

Matrix shared_inflection_table(const Vocabulary& vocab, std::size_t dim, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix base(vocab.num_bases(), dim);
  for (double& v : base.values()) {
    v = dist(rng);
  }
  Matrix table(vocab.size(), dim);
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const auto src = base.row(vocab.base_of(id));
    std::copy(src.begin(), src.end(), table.row(id).begin());
  }
  return table;
}

}  // namespace lasrl::seq
