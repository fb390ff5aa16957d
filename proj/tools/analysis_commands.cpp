#include <iostream>

#include "command.hpp"
#include "lasrl/analysis.hpp"
#include "lasrl/csv.hpp"
#include "lasrl/embedding.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/experiment.hpp"
#include "lasrl/lemma.hpp"
#include "lasrl/parallel.hpp"
#include "lasrl/rng.hpp"
#include "tool_support.hpp"

namespace lasrl::cli {

namespace {

struct LoadedModel {
  seq::ModelBundle bundle;
  seq::ParallelCorpus corpus;
};

LoadedModel load_with_split(const std::string& model_path, const std::filesystem::path& dir, const std::string& split) {
  auto bundle = seq::load_model(model_path);
  const seq::Task task = seq::read_task(dir);
  if (seq::task_spec_json(task.spec) != seq::task_spec_json(bundle.task)) {
    throw ConfigError("data directory does not belong to the task of " + model_path);
  }
  auto corpus = seq::read_split(task, dir, split, bundle.small_vocab);
  return {std::move(bundle), std::move(corpus)};
}

Command rank_analysis() {
  Command c;
  c.name = "rank-analysis";
  c.help = "gold-token rank distribution under forced decoding, and its shift between two models";
  c.options = {
      {"before", json(""), "model checkpoint (e.g. after MLE)"},
      {"after", json(""), "second checkpoint (e.g. after MRT); optional"},
      {"data", json(""), "data directory"},
      {"split", json("valid"), "split to analyse"},
  };
  c.run = [](RunContext& ctx) {
    const std::filesystem::path dir = ctx.required_path("data");
    const auto before = load_with_split(ctx.required_path("before"), dir, ctx.text("split"));
    analysis::Labeled<analysis::RankHistogram> hists;
    hists.emplace_back("before", analysis::rank_distribution(before.bundle.model, before.corpus));
    if (const std::string after_path = ctx.text("after"); !after_path.empty()) {
      const auto after = load_with_split(after_path, dir, ctx.text("split"));
      hists.emplace_back("after", analysis::rank_distribution(after.bundle.model, after.corpus));
      const auto shift = analysis::rank_shift(hists[0].second, hists[1].second);
      analysis::write_rank_shift_csv({{"after-before", shift}}, ctx.artifact("rank_shift.csv"));
      std::cout << "delta P1 " << shift.delta[0] << ", ranks 1..100 with negative delta " << shift.negative_top100
                << '\n';
    }
    analysis::write_rank_hist_csv(hists, ctx.artifact("rank_hist.csv"));
    std::cout << "P1 before " << hists[0].second.probabilities()[0] << " over " << hists[0].second.total
              << " tokens\n";
    return 0;
  };
  return c;
}

Command peakiness_cmd() {
  Command c;
  c.name = "peakiness";
  c.help = "mean normalized entropy and KL from uniform of the forced-decoding distributions";
  c.options = {
      {"models", json(""), "comma separated model checkpoints"},
      {"data", json(""), "data directory"},
      {"split", json("valid"), "split to analyse"},
  };
  c.run = [](RunContext& ctx) {
    const std::filesystem::path dir = ctx.required_path("data");
    const auto paths = split_list(ctx.required_path("models"));
    analysis::Labeled<analysis::Peakiness> rows;
    for (const auto& path : paths) {
      const auto m = load_with_split(path, dir, ctx.text("split"));
      rows.emplace_back(path, analysis::peakiness(m.bundle.model, m.corpus));
      std::cout << path << ": entropy " << rows.back().second.entropy << ", kl " << rows.back().second.kl << '\n';
    }
    analysis::write_peakiness_csv(rows, ctx.artifact("peakiness.csv"));
    return 0;
  };
  return c;
}

void write_similarity_summary(RunContext& ctx, const analysis::SimilarityStudy& study) {
  CsvWriter csv(ctx.artifact("cosine_summary.csv"), {"list", "pairs", "skipped", "mean", "median", "overlap"});
  for (const auto& l : study.lists) {
    csv.row(analysis::pair_kind_name(l.kind), l.cosines.size(), l.skipped, l.mean, l.median, l.overlap);
    std::cout << analysis::pair_kind_name(l.kind) << ": " << l.cosines.size() << " pairs, mean cosine " << l.mean
              << ", overlap with random " << l.overlap;
    if (l.skipped > 0) {
      std::cout << " (" << l.skipped << " pairs skipped: token not in table)";
    }
    std::cout << '\n';
  }
}

Command embed_analysis() {
  Command c;
  c.name = "embed-analysis";
  c.help = "cosine similarity distributions of word-pair lists in an embedding table";
  c.options = {
      {"table", json(""), "embedding file (token v1 ... vd per line)"},
      {"model", json(""), "use theta2 of this checkpoint instead of a file"},
      {"pairs", json(""), "comma separated pair-list TSV files"},
      {"data", json(""), "generate pair lists from this data directory's task when no pairs are given"},
      {"per_list", json(std::uint64_t{200}), "pairs per generated list"},
      {"bins", json(std::uint64_t{40}), "histogram bins over [-1, 1]"},
      {"seed", json(std::uint64_t{1}), "seed of the generated pair lists"},
  };
  c.run = [](RunContext& ctx) {
    std::vector<std::string> tokens;
    Matrix table;
    std::optional<seq::Task> model_task;
    if (const std::string path = ctx.text("model"); !path.empty()) {
      const auto bundle = seq::load_model(path);
      model_task = seq::make_task(bundle.task);
      tokens = seq::target_vocabulary(*model_task, bundle.small_vocab).tokens();
      table = bundle.model.group(seq::SeqModel::kOutEmbed).value;
    } else {
      auto file = seq::read_embedding_table(ctx.required_path("table"));
      tokens = std::move(file.tokens);
      table = std::move(file.vectors);
    }
    std::vector<analysis::PairList> lists;
    if (const auto files = split_list(ctx.text("pairs")); !files.empty()) {
      for (const auto& f : files) {
        lists.push_back(analysis::read_pair_list(f));
      }
    } else {
      if (!ctx.text("data").empty()) {
        model_task = seq::read_task(ctx.text("data"));
      } else if (!model_task) {
        throw ConfigError("config key 'pairs' or 'data' is required");
      }
      const seq::Task& task = *model_task;
      Rng rng = make_rng(ctx.seed(), "pairs");
      lists = analysis::toy_pair_lists(task, ctx.size("per_list"), rng);
      for (const auto& l : lists) {
        analysis::write_pair_list(l, ctx.artifact("pairs_" + std::string(analysis::pair_kind_name(l.kind)) + ".tsv"));
      }
    }
    if (ctx.size("bins") == 0) {
      throw ConfigError("bins must be positive");
    }
    const auto study = analysis::embedding_similarity_study(tokens, table, lists, ctx.size("bins"));
    analysis::write_cosine_hist_csv(study, ctx.artifact("cosine_hist.csv"));
    write_similarity_summary(ctx, study);
    return 0;
  };
  return c;
}

struct LemmaRow {
  std::uint64_t fixture_seed = 0;
  std::size_t dim = 0;
  std::size_t vocab = 0;
  lemma::Lemma1Report l1;
  lemma::Lemma2Report l2;
  bool frozen_tied = false;
};

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    try {
      out.push_back(std::stoul(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "' must list integers, got '" + text + "'");
    }
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "' is empty");
  }
  return out;
}

Command lemma_check() {
  Command c;
  c.name = "lemma-check";
  c.help = "numerical check of the duplicated-row gradient lemmas on random fixtures";
  c.options = {
      {"seeds", json(std::uint64_t{100}), "random fixtures, spread over all shapes"},
      {"dims", json("2,8,32"), "hidden sizes d"},
      {"vocabs", json("3,10,100"), "vocabulary sizes"},
      {"frozen_steps", json(std::uint64_t{20}), "training steps of the frozen-rows check"},
      {"seed", json(std::uint64_t{1}), "master seed"},
  };
  c.run = [](RunContext& ctx) {
    const auto dims = parse_sizes("dims", ctx.text("dims"));
    const auto vocabs = parse_sizes("vocabs", ctx.text("vocabs"));
    const std::size_t seeds = ctx.size("seeds");
    if (seeds == 0) {
      throw ConfigError("seeds must be positive");
    }
    // Fixture i cycles through every (d, |V|) combination.
    std::vector<LemmaRow> rows(seeds);
    for (std::size_t i = 0; i < seeds; ++i) {
      const std::size_t shape = i % (dims.size() * vocabs.size());
      rows[i].fixture_seed = derive_seed(ctx.seed(), "lemma", i);
      rows[i].dim = dims[shape % dims.size()];
      rows[i].vocab = vocabs[shape / dims.size()];
    }
    const std::size_t steps = ctx.size("frozen_steps");
    parallel_for(rows.size(), [&](std::size_t i) {
      LemmaRow& r = rows[i];
      const auto f = lemma::LemmaFixture::random(r.fixture_seed, r.dim, r.vocab);
      r.l1 = lemma::check_lemma1(f);
      r.l2 = lemma::check_lemma2(f);
      r.frozen_tied = lemma::frozen_rows_stay_tied(f, steps, r.fixture_seed);
    });
    CsvWriter csv(ctx.artifact("lemma_check.csv"),
                  {"fixture_seed", "dim", "vocab", "lemma1", "minus_v_error", "closed_form_error", "row_gap",
                   "lemma2", "theta1_max_abs_diff", "frozen_rows_tied"});
    std::size_t pass1 = 0;
    std::size_t pass2 = 0;
    std::size_t tied = 0;
    for (const auto& r : rows) {
      pass1 += r.l1.passed;
      pass2 += r.l2.passed;
      tied += r.frozen_tied;
      csv.row(r.fixture_seed, r.dim, r.vocab, r.l1.passed ? "pass" : "fail", r.l1.minus_v_error,
              r.l1.closed_form_error, r.l1.row_gap, r.l2.passed ? "pass" : "fail", r.l2.max_abs_diff,
              r.frozen_tied ? "pass" : "fail");
    }
    const std::size_t n = rows.size();
    std::cout << "lemma 1: " << pass1 << "/" << n << " pass\n"
              << "lemma 2: " << pass2 << "/" << n << " pass\n"
              << "frozen rows tied: " << tied << "/" << n << " pass\n";
    return pass1 == n && pass2 == n && tied == n ? 0 : 1;
  };
  return c;
}

}  // namespace

std::vector<Command> analysis_commands() { return {rank_analysis(), peakiness_cmd(), embed_analysis(), lemma_check()}; }

}  // namespace lasrl::cli
