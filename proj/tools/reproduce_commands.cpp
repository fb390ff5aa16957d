#include <iostream>

#include "command.hpp"
#include "lasrl/analysis.hpp"
#include "lasrl/csv.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/experiment.hpp"
#include "tool_support.hpp"

namespace lasrl::cli {

namespace {

seq::SeqExperimentConfig seq_config(const RunContext& ctx) {
  seq::SeqExperimentConfig c;
  c.train_size = ctx.size("train_size");
  c.valid_size = ctx.size("valid_size");
  c.dim = ctx.size("dim");
  c.mle = mle_config(ctx);
  c.mrt = mrt_config(ctx);
  c.seed = ctx.seed();
  return c;
}

void fig2(RunContext& ctx) {
  const auto config = bandit_config(ctx);
  write_bandit_bundle(ctx, config, bandit::run_experiment(config));
}

// Small- and large-vocabulary runs on the same task: rank histograms before
// and after MRT, their shift, peakiness and BLEU.
void fig1_analog(RunContext& ctx) {
  analysis::Labeled<analysis::RankHistogram> hists;
  analysis::Labeled<analysis::RankShift> shifts;
  analysis::Labeled<analysis::Peakiness> peaks;
  CsvWriter bleu(ctx.artifact("bleu.csv"), {"model", "mle_bleu", "mrt_bleu", "mrt_best_epoch"});
  for (const bool small : {true, false}) {
    const std::string name = small ? "stv" : "ltv";
    auto config = seq_config(ctx);
    config.small_vocab = small;
    const auto run = seq::run_seq_experiment(config);
    print_warnings(run.mrt.warnings);
    const auto before = analysis::rank_distribution(run.mle_model, run.data.valid);
    const auto after = analysis::rank_distribution(run.mrt_model, run.data.valid);
    hists.emplace_back(name + "-mle", before);
    hists.emplace_back(name + "-mrt", after);
    shifts.emplace_back(name, analysis::rank_shift(before, after));
    peaks.emplace_back(name + "-mle", analysis::peakiness(run.mle_model, run.data.valid));
    peaks.emplace_back(name + "-mrt", analysis::peakiness(run.mrt_model, run.data.valid));
    mrt::write_train_log(run.mrt, ctx.artifact(name + "_train_log.csv"));
    const double b0 = run.mrt.log.front().val_bleu;
    const double b1 = run.mrt.log[run.mrt.best_epoch].val_bleu;
    bleu.row(name, b0, b1, run.mrt.best_epoch);
    std::cout << name << ": BLEU " << b0 << " -> " << b1 << ", delta P1 " << shifts.back().second.delta[0]
              << ", negative ranks in 1..100: " << shifts.back().second.negative_top100 << '\n';
  }
  analysis::write_rank_hist_csv(hists, ctx.artifact("rank_hist.csv"));
  analysis::write_rank_shift_csv(shifts, ctx.artifact("rank_shift.csv"));
  analysis::write_peakiness_csv(peaks, ctx.artifact("peakiness.csv"));
}

// Cosine distributions of inflection, synonym and random pairs in theta2 of
// an MLE model trained from the shared-inflection table.
void fig4_analog(RunContext& ctx) {
  auto config = seq_config(ctx);
  config.task.synonym_lexemes = ctx.size("synonym_lexemes");
  config.output_init = seq::OutputInit::SharedInflection;
  const auto data = seq::make_data(config);
  auto model = seq::make_model(config, data);
  seq::train_mle(model, data.train, data.valid, config.mle);
  Rng rng = make_rng(config.seed, "pairs");
  const auto lists = analysis::toy_pair_lists(data.task, ctx.size("per_list"), rng);
  for (const auto& l : lists) {
    analysis::write_pair_list(l, ctx.artifact("pairs_" + std::string(analysis::pair_kind_name(l.kind)) + ".tsv"));
  }
  const auto study = analysis::embedding_similarity_study(
      data.task.target_vocab.tokens(), model.group(seq::SeqModel::kOutEmbed).value, lists, ctx.size("bins"));
  analysis::write_cosine_hist_csv(study, ctx.artifact("cosine_hist.csv"));
  CsvWriter csv(ctx.artifact("cosine_summary.csv"), {"list", "pairs", "skipped", "mean", "median", "overlap"});
  for (const auto& l : study.lists) {
    csv.row(analysis::pair_kind_name(l.kind), l.cosines.size(), l.skipped, l.mean, l.median, l.overlap);
    std::cout << analysis::pair_kind_name(l.kind) << ": mean cosine " << l.mean << ", overlap with random "
              << l.overlap << '\n';
  }
}

}  // namespace

std::vector<Command> reproduce_commands() {
  const seq::SeqExperimentConfig d;
  Command c;
  c.name = "reproduce";
  c.help = "end-to-end pipeline for one figure: fig2, fig1-analog or fig4-analog";
  c.positional = "figure";
  c.choices = {"fig2", "fig1-analog", "fig4-analog"};
  c.options = {{"figure", json("fig2"), "figure to reproduce"}};
  // The bandit defaults to the 64-64 fast mode here; pass --hidden 300,300
  // for the full architecture.
  for (auto& o : bandit_options("64,64")) {
    c.options.push_back(std::move(o));
  }
  for (auto& o : mle_options()) {
    c.options.push_back(std::move(o));
  }
  for (auto& o : mrt_options()) {
    c.options.push_back(std::move(o));
  }
  c.options.push_back({"train_size", json(std::uint64_t{d.train_size}), "training sentences"});
  c.options.push_back({"valid_size", json(std::uint64_t{d.valid_size}), "validation sentences"});
  c.options.push_back({"dim", json(std::uint64_t{d.dim}), "model dimension"});
  c.options.push_back({"synonym_lexemes", json(std::uint64_t{10}), "synonym lexemes of the fig4-analog task"});
  c.options.push_back({"per_list", json(std::uint64_t{200}), "pairs per list (fig4-analog)"});
  c.options.push_back({"bins", json(std::uint64_t{40}), "cosine histogram bins (fig4-analog)"});
  for (auto& o : c.options) {
    if (o.key == "trial_log") {
      o.fallback = false;
    }
  }
  c.run = [](RunContext& ctx) {
    const std::string figure = ctx.text("figure");
    if (figure == "fig2") {
      fig2(ctx);
    } else if (figure == "fig1-analog") {
      fig1_analog(ctx);
    } else if (figure == "fig4-analog") {
      fig4_analog(ctx);
    } else {
      throw ConfigError("unknown figure '" + figure + "' (expected fig2, fig1-analog or fig4-analog)");
    }
    return 0;
  };
  return {c};
}

}  // namespace lasrl::cli
