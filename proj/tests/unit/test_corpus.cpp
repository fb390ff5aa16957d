#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lasrl/corpus.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/experiment.hpp"

using namespace lasrl;
using namespace lasrl::seq;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lasrl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TaskSpec spec_with(std::size_t inflections, std::size_t window, std::size_t synonyms = 0) {
  TaskSpec s;
  s.source_lexemes = 12;
  s.inflections = inflections;
  s.reorder_window = window;
  s.synonym_lexemes = synonyms;
  s.seed = 77;
  return s;
}

}  // namespace

TEST_CASE("vocabulary layout: specials, inflections and bases") {
  const auto v = Vocabulary::lexical("lex", 3, 2);
  CHECK(v.size() == 3 + 6);
  CHECK(v.num_bases() == 6);
  CHECK(v.token(Vocabulary::kEos) == "</s>");
  CHECK(v.id("lex1#0") == 5);
  CHECK(v.base_of(v.id("lex1#1")) == 4);
  CHECK(v.base_of(Vocabulary::kBos) == Vocabulary::kBos);
  const auto plain = Vocabulary::lexical("lex", 3);
  CHECK(plain.id("lex2") == 5);
  CHECK(plain.base_of(5) == 5);
  CHECK(v.decode(v.encode(" lex0#1  lex2#0 ")) == "lex0#1 lex2#0");
}

TEST_CASE("vocabulary errors") {
  Vocabulary v;
  CHECK_THROWS_AS(v.add("a b", 3), ConfigError);
  CHECK_THROWS_AS(v.add("</s>", 3), ConfigError);
  CHECK_THROWS_AS(v.id("nope"), IndexError);
  CHECK_THROWS_AS(v.token(99), IndexError);
  CHECK_THROWS_AS(Vocabulary::lexical("x", 2, 0), ConfigError);
}

TEST_CASE("task spec validation") {
  auto bad = [](auto edit) {
    TaskSpec s;
    edit(s);
    return s;
  };
  CHECK_THROWS_AS(make_task(bad([](TaskSpec& s) { s.source_lexemes = 1; })), ConfigError);
  CHECK_THROWS_AS(make_task(bad([](TaskSpec& s) { s.inflections = 0; })), ConfigError);
  CHECK_THROWS_AS(make_task(bad([](TaskSpec& s) { s.synonym_lexemes = 41; })), ConfigError);
  CHECK_THROWS_AS(make_task(bad([](TaskSpec& s) { s.min_length = 5, s.max_length = 4; })), ConfigError);
  CHECK_THROWS_AS(make_task(bad([](TaskSpec& s) { s.reorder_window = 0; })), ConfigError);
}

TEST_CASE("lexicon is a permutation and synonyms are extra lexemes") {
  const Task t = make_task(spec_with(1, 1, 3));
  auto sorted = t.lexicon;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    CHECK(sorted[i] == i);
  }
  CHECK(t.synonym[0] == 12);
  CHECK(t.synonym[2] == 14);
  CHECK(t.synonym[3] == Task::kNoSynonym);
  CHECK(t.target_vocab.num_bases() == 3 + 15);
}

TEST_CASE("monotone task translates word by word through the lexicon") {
  const Task t = make_task(spec_with(1, 1));
  const auto c = generate_corpus(t, 50, "train");
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE(c.source[i].size() == c.target[i].size());
    CHECK(c.source[i].size() >= t.spec.min_length);
    CHECK(c.source[i].size() <= t.spec.max_length);
    for (std::size_t j = 0; j < c.source[i].size(); ++j) {
      CHECK(c.target[i][j] == Vocabulary::kNumSpecials + t.lexicon[c.source[i][j] - Vocabulary::kNumSpecials]);
    }
  }
}

TEST_CASE("reordering only permutes within blocks") {
  const Task t = make_task(spec_with(1, 3));
  const auto c = generate_corpus(t, 100, "train");
  bool any_moved = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& src = c.source[i];
    for (std::size_t start = 0; start < src.size(); start += 3) {
      const std::size_t stop = std::min(src.size(), start + 3);
      std::vector<std::size_t> want;
      for (std::size_t j = start; j < stop; ++j) {
        want.push_back(Vocabulary::kNumSpecials + t.lexicon[src[j] - Vocabulary::kNumSpecials]);
      }
      std::vector<std::size_t> got(c.target[i].begin() + start, c.target[i].begin() + stop);
      any_moved = any_moved || got != want;
      std::sort(want.begin(), want.end());
      std::sort(got.begin(), got.end());
      CHECK(got == want);
    }
  }
  CHECK(any_moved);
}

TEST_CASE("inflected task collapses exactly onto the uninflected one") {
  const Task big = make_task(spec_with(10, 3, 2));
  const Task small = make_task(spec_with(1, 3, 2));
  const auto cb = generate_corpus(big, 200, "valid");
  const auto cs = generate_corpus(small, 200, "valid");
  CHECK(cb.source == cs.source);
  const auto collapsed = collapse_inflections(cb, big.target_vocab);
  CHECK(collapsed.target == cs.target);
  CHECK(cb.target != collapsed.target);
}

TEST_CASE("splits are independent and generation is deterministic") {
  const Task t = make_task(spec_with(10, 3));
  CHECK(generate_corpus(t, 30, "train").target == generate_corpus(t, 30, "train").target);
  CHECK(generate_corpus(t, 30, "train").source != generate_corpus(t, 30, "valid").source);
  // Prefix property: sentence i does not depend on the corpus size.
  const auto longer = generate_corpus(t, 40, "train");
  const auto shorter = generate_corpus(t, 30, "train");
  CHECK(std::equal(shorter.source.begin(), shorter.source.end(), longer.source.begin()));
  CHECK_THROWS_AS(generate_corpus(t, 0, "train"), ConfigError);
}

TEST_CASE("corpus files round trip and report bad lines") {
  const auto dir = scratch_dir("corpus");
  const Task t = make_task(spec_with(4, 2));
  const auto c = generate_corpus(t, 20, "test");
  write_corpus(c, t.source_vocab, t.target_vocab, dir / "test");
  const auto back = read_corpus(t.source_vocab, t.target_vocab, dir / "test");
  CHECK(back.source == c.source);
  CHECK(back.target == c.target);

  std::ofstream(dir / "bad.src") << "src1 src2\nsrc1 zzz\n";
  std::ofstream(dir / "bad.tgt") << "lex0#0\nlex1#1\n";
  try {
    read_corpus(t.source_vocab, t.target_vocab, dir / "bad");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.src:2") != std::string::npos);
  }
  std::ofstream(dir / "short.src") << "src1\nsrc2\n";
  std::ofstream(dir / "short.tgt") << "lex0#0\n";
  CHECK_THROWS_AS(read_corpus(t.source_vocab, t.target_vocab, dir / "short"), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("data directory and task spec round trip") {
  const auto dir = scratch_dir("datadir");
  const Task t = make_task(spec_with(3, 2, 1));
  const auto train = generate_corpus(t, 15, "train");
  write_data_dir(dir, t, {{"train", train}});
  const Task back = read_task(dir);
  CHECK(task_spec_json(back.spec) == task_spec_json(t.spec));
  CHECK(back.lexicon == t.lexicon);
  CHECK(read_split(back, dir, "train", false).target == train.target);
  CHECK(read_split(back, dir, "train", true).target == collapse_inflections(train, t.target_vocab).target);
  CHECK_THROWS_AS(parse_task_spec("{\"source_lexemes\": 3}"), ParseError);
  CHECK_THROWS_AS(parse_task_spec("not json"), ParseError);
  std::filesystem::remove_all(dir);
}
