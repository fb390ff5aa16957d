#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "lasrl/analysis.hpp"
#include "lasrl/errors.hpp"
#include "support.hpp"

using namespace lasrl;
using namespace lasrl::analysis;

TEST_CASE("gold rank: ties go to the smaller id") {
  const Vector p{0.2, 0.5, 0.2, 0.1};
  CHECK(gold_rank(p, 1) == 1);
  CHECK(gold_rank(p, 0) == 2);
  CHECK(gold_rank(p, 2) == 3);
  CHECK(gold_rank(p, 3) == 4);
  CHECK_THROWS_AS(gold_rank(p, 4), IndexError);
}

TEST_CASE("gold rank agrees with a stable sort on three tokens (brute force)") {
  // Values drawn from a small grid so ties are common.
  const double grid[] = {0.1, 0.3, 0.6};
  for (double a : grid) {
    for (double b : grid) {
      for (double c : grid) {
        const Vector p{a, b, c};
        std::vector<std::size_t> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return p[x] > p[y]; });
        for (std::size_t r = 0; r < 3; ++r) {
          CHECK(gold_rank(p, order[r]) == r + 1);
        }
      }
    }
  }
}

TEST_CASE("rank distribution counts one event per reference token") {
  seq::TaskSpec spec;
  spec.source_lexemes = 6;
  spec.seed = 4;
  const auto task = seq::make_task(spec);
  const auto corpus = seq::generate_corpus(task, 25, "valid");
  Rng rng(3);
  const seq::SeqModel model({task.source_vocab.size(), task.target_vocab.size(), 5}, rng);
  const auto h = rank_distribution(model, corpus);
  std::size_t tokens = 0;
  for (const auto& t : corpus.target) {
    tokens += t.size();
  }
  CHECK(h.total == tokens);
  CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == tokens);
  const Vector p = h.probabilities();
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
  CHECK(p.size() == task.target_vocab.size());

  const auto self = rank_shift(h, h);
  for (double d : self.delta) {
    CHECK(d == 0.0);
  }
  CHECK(self.negative_top100 == 0);
}

TEST_CASE("rank shift sums to zero and counts negative entries") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    RankHistogram a(7);
    RankHistogram b(7);
    for (int e = 0; e < 50; ++e) {
      const Vector pa = softmax(test::random_vector(rng, 7, 2.0));
      const Vector pb = softmax(test::random_vector(rng, 7, 2.0));
      a.add(pa, rng() % 7);
      b.add(pb, rng() % 7);
    }
    const auto s = rank_shift(a, b);
    CHECK(std::abs(std::accumulate(s.delta.begin(), s.delta.end(), 0.0)) <= 1e-12);
    CHECK(s.negative_top100 ==
          static_cast<std::size_t>(std::count_if(s.delta.begin(), s.delta.end(), [](double d) { return d < 0; })));
  }
  CHECK_THROWS_AS(rank_shift(RankHistogram(3), RankHistogram(4)), ConfigError);
  RankHistogram h(3);
  CHECK_THROWS_AS(h.add(Vector{0.5, 0.5}, 0), DimensionError);
}

TEST_CASE("normalized entropy: uniform, one-hot and a hand value") {
  CHECK(normalized_entropy(Vector(8, 0.125)) == doctest::Approx(1.0));
  CHECK(normalized_entropy(Vector{0.0, 1.0, 0.0}) == 0.0);
  // 1.5 ln 2 / ln 3
  CHECK(normalized_entropy(Vector{0.5, 0.25, 0.25}) == doctest::Approx(0.9463946303571863).epsilon(1e-12));
}

TEST_CASE("peakiness of a model is the mean over reference steps") {
  seq::TaskSpec spec;
  spec.source_lexemes = 5;
  spec.seed = 8;
  const auto task = seq::make_task(spec);
  const auto corpus = seq::generate_corpus(task, 10, "valid");
  Rng rng(6);
  const seq::SeqModel model({task.source_vocab.size(), task.target_vocab.size(), 4}, rng);
  const auto pk = peakiness(model, corpus);
  double total = 0.0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto tr = model.forward(corpus.source[i], corpus.target[i]);
    for (std::size_t t = 0; t < corpus.target[i].size(); ++t) {
      total += normalized_entropy(softmax(tr.logits[t]));
      ++steps;
    }
  }
  CHECK(pk.steps == steps);
  CHECK(pk.entropy == doctest::Approx(total / steps).epsilon(1e-12));
  CHECK(pk.kl == doctest::Approx(1.0 - pk.entropy).epsilon(1e-12));
}

TEST_CASE("cosine similarity") {
  CHECK(cosine(Vector{1, 0}, Vector{0, 2}) == doctest::Approx(0.0));
  CHECK(cosine(Vector{1, 1}, Vector{-3, -3}) == doctest::Approx(-1.0));
  CHECK(cosine(Vector{0, 0}, Vector{1, 2}) == 0.0);
  CHECK_THROWS_AS(cosine(Vector{1}, Vector{1, 2}), DimensionError);
  Rng rng(72);
  for (int i = 0; i < 50; ++i) {
    const Vector a = test::random_vector(rng, 6, 1.0);
    Vector b = test::random_vector(rng, 6, 1.0);
    const double c = cosine(a, b);
    CHECK(c == doctest::Approx(cosine(b, a)).epsilon(1e-14));
    for (double& v : b) {
      v *= 3.7;
    }
    CHECK(c == doctest::Approx(cosine(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("pair lists round trip and report bad lines") {
  const auto dir = std::filesystem::temp_directory_path() / "lasrl_test_pairs";
  std::filesystem::create_directories(dir);
  const PairList list{PairKind::Synonyms, {{"a", "b"}, {"c", "d"}}};
  write_pair_list(list, dir / "ok.tsv");
  const auto back = read_pair_list(dir / "ok.tsv");
  CHECK(back.kind == PairKind::Synonyms);
  CHECK(back.pairs == list.pairs);

  auto line_of_error = [&](const std::string& text) -> std::string {
    std::ofstream(dir / "bad.tsv") << text;
    try {
      read_pair_list(dir / "bad.tsv");
    } catch (const ParseError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(line_of_error("#kind:random\na\tb\nx y\n").find("bad.tsv:3") != std::string::npos);
  CHECK(line_of_error("#kind:random\na\ta\n").find(":2") != std::string::npos);
  CHECK(line_of_error("#kind:nope\n").find(":1") != std::string::npos);
  CHECK_FALSE(line_of_error("a\tb\n").empty());
  CHECK_THROWS_AS(parse_pair_kind("nope"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("toy pair lists follow the task structure") {
  seq::TaskSpec spec;
  spec.source_lexemes = 12;
  spec.inflections = 4;
  spec.synonym_lexemes = 3;
  spec.seed = 9;
  const auto task = seq::make_task(spec);
  Rng rng(1);
  const auto lists = toy_pair_lists(task, 30, rng);
  REQUIRE(lists.size() == 3);
  const auto& vocab = task.target_vocab;
  for (const auto& [a, b] : lists[0].pairs) {
    CHECK(vocab.base_of(vocab.id(a)) == vocab.base_of(vocab.id(b)));
    CHECK(a != b);
  }
  CHECK(lists[1].pairs.size() > 0);
  for (const auto& [a, b] : lists[2].pairs) {
    CHECK(vocab.base_of(vocab.id(a)) != vocab.base_of(vocab.id(b)));
  }
  CHECK(lists[2].pairs.size() == 30);

  spec.synonym_lexemes = 0;
  Rng rng2(1);
  CHECK(toy_pair_lists(seq::make_task(spec), 30, rng2)[1].pairs.empty());
}

TEST_CASE("similarity study: histograms, overlap and skipped pairs") {
  const std::vector<std::string> tokens{"a", "b", "c", "d"};
  Matrix table(4, 2);
  table(0, 0) = 1.0;  // a = (1, 0)
  table(1, 0) = 2.0;  // b = (2, 0)
  table(2, 1) = 1.0;  // c = (0, 1)
  table(3, 0) = -1.0;  // d = (-1, 0)
  const std::vector<PairList> lists{
      {PairKind::Inflections, {{"a", "b"}, {"a", "zzz"}}},
      {PairKind::Synonyms, {}},
      {PairKind::Random, {{"a", "c"}, {"a", "d"}}},
  };
  const auto study = embedding_similarity_study(tokens, table, lists, 4);
  CHECK(study.bin_edges.size() == 5);
  const auto& infl = study.lists[0];
  CHECK(infl.skipped == 1);
  CHECK(infl.cosines == Vector{1.0});
  CHECK(infl.histogram == std::vector<std::size_t>{0, 0, 0, 1});
  CHECK(infl.overlap == 0.0);
  CHECK(std::isnan(study.lists[1].mean));
  CHECK(std::isnan(study.lists[1].overlap));
  const auto& rnd = study.lists[2];
  CHECK(rnd.histogram == std::vector<std::size_t>{1, 0, 1, 0});
  CHECK(rnd.mean == doctest::Approx(-0.5));
  CHECK(rnd.overlap == doctest::Approx(1.0));
  CHECK_THROWS_AS(embedding_similarity_study(tokens, Matrix(3, 2), lists, 4), DimensionError);
  CHECK_THROWS_AS(embedding_similarity_study(tokens, table, lists, 0), ConfigError);
}
