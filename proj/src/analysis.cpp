#include "lasrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lasrl/csv.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/parallel.hpp"
#include "lasrl/stats.hpp"

namespace lasrl::analysis {

std::size_t gold_rank(std::span<const double> probs, std::size_t gold) {
  if (gold >= probs.size()) {
    throw IndexError("gold token " + std::to_string(gold) + " out of range for " + std::to_string(probs.size()) +
                     " probabilities");
  }
  const double pg = probs[gold];
  std::size_t above = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > pg || (probs[k] == pg && k < gold)) {
      ++above;
    }
  }
  return above + 1;
}

void RankHistogram::add(std::span<const double> probs, std::size_t gold) {
  if (probs.size() != counts.size()) {
    throw DimensionError("distribution over " + std::to_string(probs.size()) + " tokens for a histogram of " +
                         std::to_string(counts.size()) + " ranks");
  }
  ++counts[gold_rank(probs, gold) - 1];
  ++total;
}

Vector RankHistogram::probabilities() const {
  Vector p(counts.size(), 0.0);
  if (total == 0) {
    return p;
  }
  for (std::size_t r = 0; r < counts.size(); ++r) {
    p[r] = static_cast<double>(counts[r]) / static_cast<double>(total);
  }
  return p;
}

RankHistogram rank_distribution(const seq::SeqModel& model, const seq::ParallelCorpus& corpus) {
  std::vector<RankHistogram> parts(corpus.size(), RankHistogram(model.target_vocab()));
  parallel_for(corpus.size(), [&](std::size_t i) {
    const auto& ref = corpus.target[i];
    const auto tr = model.forward(corpus.source[i], ref);
    for (std::size_t t = 0; t < ref.size(); ++t) {
      parts[i].add(softmax(tr.logits[t]), ref[t]);
    }
  });
  RankHistogram hist(model.target_vocab());
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < p.counts.size(); ++r) {
      hist.counts[r] += p.counts[r];
    }
    hist.total += p.total;
  }
  return hist;
}

RankShift rank_shift(const RankHistogram& before, const RankHistogram& after) {
  if (before.counts.size() != after.counts.size()) {
    throw ConfigError("rank histograms cover " + std::to_string(before.counts.size()) + " and " +
                      std::to_string(after.counts.size()) + " ranks");
  }
  const Vector pb = before.probabilities();
  const Vector pa = after.probabilities();
  RankShift s;
  s.delta.resize(pb.size());
  for (std::size_t r = 0; r < pb.size(); ++r) {
    s.delta[r] = pa[r] - pb[r];
    if (r < 100 && s.delta[r] < 0.0) {
      ++s.negative_top100;
    }
  }
  return s;
}

double normalized_entropy(std::span<const double> probs) {
  if (probs.size() < 2) {
    return 0.0;
  }
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) {
      h -= p * std::log(p);
    }
  }
  return std::clamp(h / std::log(static_cast<double>(probs.size())), 0.0, 1.0);
}

Peakiness peakiness(const seq::SeqModel& model, const seq::ParallelCorpus& corpus) {
  Vector ent(corpus.size(), 0.0);
  std::vector<std::size_t> steps(corpus.size(), 0);
  parallel_for(corpus.size(), [&](std::size_t i) {
    const auto& ref = corpus.target[i];
    const auto tr = model.forward(corpus.source[i], ref);
    for (std::size_t t = 0; t < ref.size(); ++t) {
      ent[i] += normalized_entropy(softmax(tr.logits[t]));
    }
    steps[i] = ref.size();
  });
  Peakiness out;
  double total = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    total += ent[i];
    out.steps += steps[i];
  }
  if (out.steps > 0) {
    out.entropy = total / static_cast<double>(out.steps);
    out.kl = 1.0 - out.entropy;
  }
  return out;
}

std::string_view pair_kind_name(PairKind k) {
  switch (k) {
    case PairKind::Inflections:
      return "inflections";
    case PairKind::Synonyms:
      return "synonyms";
    case PairKind::Random:
      return "random";
  }
  return "?";
}

PairKind parse_pair_kind(std::string_view name) {
  for (PairKind k : {PairKind::Inflections, PairKind::Synonyms, PairKind::Random}) {
    if (pair_kind_name(k) == name) {
      return k;
    }
  }
  throw ConfigError("unknown pair list kind '" + std::string(name) + "' (expected inflections, synonyms or random)");
}

PairList read_pair_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot read " + path.string());
  }
  PairList list;
  bool have_kind = false;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& why) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (line.starts_with("#kind:")) {
      try {
        list.kind = parse_pair_kind(line.substr(6));
      } catch (const ConfigError& e) {
        fail(e.what());
      }
      have_kind = true;
      continue;
    }
    if (line.starts_with("#")) {
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      fail("expected two tab-separated tokens");
    }
    std::string a = line.substr(0, tab);
    std::string b = line.substr(tab + 1);
    if (a.empty() || b.empty()) {
      fail("empty token");
    }
    if (a == b) {
      fail("self-pair '" + a + "'");
    }
    list.pairs.emplace_back(std::move(a), std::move(b));
  }
  if (!have_kind) {
    throw ParseError(path.string() + ": missing #kind: header");
  }
  return list;
}

void write_pair_list(const PairList& list, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << "#kind:" << pair_kind_name(list.kind) << '\n';
  for (const auto& [a, b] : list.pairs) {
    out << a << '\t' << b << '\n';
  }
}

namespace {

// Draws up to `want` distinct unordered pairs from `draw`, giving up after a
// bounded number of attempts when the pool is small.
template <class Draw>
std::vector<std::pair<std::size_t, std::size_t>> distinct_pairs(std::size_t want, Draw&& draw) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t attempt = 0; attempt < want * 50 && out.size() < want; ++attempt) {
    auto [a, b] = draw();
    if (a == b) {
      continue;
    }
    if (seen.insert({std::min(a, b), std::max(a, b)}).second) {
      out.emplace_back(a, b);
    }
  }
  return out;
}

}  // namespace

std::vector<PairList> toy_pair_lists(const seq::Task& task, std::size_t per_list, Rng& rng) {
  const auto& spec = task.spec;
  const auto& vocab = task.target_vocab;
  const std::size_t infl = spec.inflections;
  const auto token_of = [&](std::size_t lexeme, std::size_t i) {
    return seq::Vocabulary::kNumSpecials + lexeme * infl + i;
  };
  const auto to_pairs = [&](PairKind kind, const std::vector<std::pair<std::size_t, std::size_t>>& ids) {
    PairList list{kind, {}};
    for (auto [a, b] : ids) {
      list.pairs.emplace_back(vocab.token(a), vocab.token(b));
    }
    return list;
  };
  std::uniform_int_distribution<std::size_t> pick_lexeme(0, spec.target_lexemes() - 1);
  std::uniform_int_distribution<std::size_t> pick_infl(0, infl - 1);

  std::vector<PairList> lists;
  std::vector<std::pair<std::size_t, std::size_t>> ids;
  if (infl >= 2) {
    ids = distinct_pairs(per_list, [&] {
      const std::size_t lex = pick_lexeme(rng);
      return std::pair{token_of(lex, pick_infl(rng)), token_of(lex, pick_infl(rng))};
    });
  }
  lists.push_back(to_pairs(PairKind::Inflections, ids));

  ids.clear();
  if (spec.synonym_lexemes > 0) {
    std::uniform_int_distribution<std::size_t> pick_source(0, spec.synonym_lexemes - 1);
    ids = distinct_pairs(per_list, [&] {
      const std::size_t s = pick_source(rng);
      return std::pair{token_of(task.lexicon[s], pick_infl(rng)), token_of(task.synonym[s], pick_infl(rng))};
    });
  }
  lists.push_back(to_pairs(PairKind::Synonyms, ids));

  // Random pairs never share a lexeme and are never a lexeme/synonym pair.
  std::vector<std::size_t> partner(spec.target_lexemes(), seq::Task::kNoSynonym);
  for (std::size_t s = 0; s < spec.source_lexemes; ++s) {
    if (task.synonym[s] != seq::Task::kNoSynonym) {
      partner[task.lexicon[s]] = task.synonym[s];
      partner[task.synonym[s]] = task.lexicon[s];
    }
  }
  ids = distinct_pairs(per_list, [&]() -> std::pair<std::size_t, std::size_t> {
    const std::size_t la = pick_lexeme(rng);
    const std::size_t lb = pick_lexeme(rng);
    if (la == lb || partner[la] == lb) {
      return {0, 0};
    }
    return {token_of(la, pick_infl(rng)), token_of(lb, pick_infl(rng))};
  });
  lists.push_back(to_pairs(PairKind::Random, ids));
  return lists;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine of vectors with " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                         " entries");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

SimilarityStudy embedding_similarity_study(const std::vector<std::string>& tokens, const Matrix& table,
                                           const std::vector<PairList>& lists, std::size_t bins) {
  if (tokens.size() != table.rows()) {
    throw DimensionError("embedding table has " + std::to_string(table.rows()) + " rows for " +
                         std::to_string(tokens.size()) + " tokens");
  }
  if (bins == 0) {
    throw ConfigError("histogram needs at least one bin");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    index.emplace(tokens[i], i);
  }
  SimilarityStudy study;
  study.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    study.bin_edges[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(bins);
  }
  for (const auto& list : lists) {
    ListSummary s;
    s.kind = list.kind;
    s.histogram.assign(bins, 0);
    for (const auto& [a, b] : list.pairs) {
      const auto ia = index.find(a);
      const auto ib = index.find(b);
      if (ia == index.end() || ib == index.end()) {
        ++s.skipped;
        continue;
      }
      const double c = cosine(table.row(ia->second), table.row(ib->second));
      s.cosines.push_back(c);
      const auto bin = static_cast<std::size_t>((c + 1.0) / 2.0 * static_cast<double>(bins));
      ++s.histogram[std::min(bin, bins - 1)];
    }
    if (s.cosines.empty()) {
      s.mean = s.median = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.mean = stats::mean(s.cosines);
      s.median = stats::median(s.cosines);
    }
    study.lists.push_back(std::move(s));
  }
  const auto random = std::find_if(study.lists.begin(), study.lists.end(),
                                   [](const ListSummary& s) { return s.kind == PairKind::Random; });
  for (auto& s : study.lists) {
    if (random == study.lists.end() || random->cosines.empty() || s.cosines.empty()) {
      s.overlap = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double ov = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double p = static_cast<double>(s.histogram[b]) / static_cast<double>(s.cosines.size());
      const double q = static_cast<double>(random->histogram[b]) / static_cast<double>(random->cosines.size());
      ov += std::min(p, q);
    }
    s.overlap = ov;
  }
  return study;
}

void write_rank_hist_csv(const Labeled<RankHistogram>& hists, const std::filesystem::path& path) {
  CsvWriter csv(path, {"model", "rank", "count", "probability"});
  for (const auto& [label, h] : hists) {
    const Vector p = h.probabilities();
    for (std::size_t r = 0; r < h.counts.size(); ++r) {
      csv.row(label, r + 1, h.counts[r], p[r]);
    }
  }
}

void write_rank_shift_csv(const Labeled<RankShift>& shifts, const std::filesystem::path& path) {
  CsvWriter csv(path, {"model", "rank", "delta_p"});
  for (const auto& [label, s] : shifts) {
    for (std::size_t r = 0; r < s.delta.size(); ++r) {
      csv.row(label, r + 1, s.delta[r]);
    }
  }
}

void write_peakiness_csv(const Labeled<Peakiness>& rows, const std::filesystem::path& path) {
  CsvWriter csv(path, {"model", "normalized_entropy", "normalized_kl", "steps"});
  for (const auto& [label, p] : rows) {
    csv.row(label, p.entropy, p.kl, p.steps);
  }
}

void write_cosine_hist_csv(const SimilarityStudy& study, const std::filesystem::path& path) {
  CsvWriter csv(path, {"list", "bin_lo", "bin_hi", "count"});
  for (const auto& s : study.lists) {
    for (std::size_t b = 0; b < s.histogram.size(); ++b) {
      csv.row(pair_kind_name(s.kind), study.bin_edges[b], study.bin_edges[b + 1], s.histogram[b]);
    }
  }
}

}  // namespace lasrl::analysis
