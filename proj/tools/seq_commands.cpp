#include <fstream>
#include <iostream>

#include "command.hpp"
#include "lasrl/bleu.hpp"
#include "lasrl/csv.hpp"
#include "lasrl/decode.hpp"
#include "lasrl/embedding.hpp"
#include "lasrl/errors.hpp"
#include "lasrl/experiment.hpp"
#include "lasrl/stats.hpp"
#include "tool_support.hpp"

namespace lasrl::cli {

using seq::SeqExperimentConfig;

std::vector<Option> mle_options() {
  const seq::MleConfig d = SeqExperimentConfig{}.mle;
  return {
      {"mle_epochs", json(std::uint64_t{d.epochs}), "MLE epochs (best validation epoch kept)"},
      {"batch_size", json(std::uint64_t{d.batch_size}), "MLE minibatch size in sentences"},
      {"epsilon", json(d.epsilon), "label smoothing of every MLE term"},
      {"mle_lr", json(d.sgd.learning_rate), "MLE learning rate"},
      {"mle_momentum", json(d.sgd.momentum), "MLE Nesterov momentum"},
      {"mle_clip", json(d.sgd.clip_norm), "MLE gradient norm clip"},
  };
}

seq::MleConfig mle_config(const RunContext& ctx) {
  seq::MleConfig c;
  c.epochs = ctx.size("mle_epochs");
  c.batch_size = ctx.size("batch_size");
  c.epsilon = ctx.real("epsilon");
  c.sgd = SgdOptions{ctx.real("mle_lr"), ctx.real("mle_momentum"), ctx.real("mle_clip")};
  c.seed = ctx.seed();
  if (c.batch_size == 0) {
    throw ConfigError("batch_size must be positive");
  }
  return c;
}

std::vector<Option> mrt_options() {
  const mrt::MrtConfig d = SeqExperimentConfig{}.mrt;
  return {
      {"alpha", json(d.alpha), "weight of the MLE term in the combined loss"},
      {"beta", json(d.beta), "sharpness of the candidate distribution"},
      {"k", json(std::uint64_t{d.k}), "candidates per sentence (beam size)"},
      {"mrt_epochs", json(std::uint64_t{d.epochs}), "MRT epochs (best validation epoch kept)"},
      {"reward", json(d.reward), "smoothed_bleu or constant"},
      {"extra_len", json(std::uint64_t{d.extra_len}), "candidate length bound beyond the source length"},
      {"mrt_lr", json(d.sgd.learning_rate), "MRT learning rate"},
      {"mrt_momentum", json(d.sgd.momentum), "MRT Nesterov momentum"},
      {"mrt_clip", json(d.sgd.clip_norm), "MRT gradient norm clip"},
  };
}

mrt::MrtConfig mrt_config(const RunContext& ctx) {
  mrt::MrtConfig c;
  c.alpha = ctx.real("alpha");
  c.beta = ctx.real("beta");
  c.k = ctx.size("k");
  c.epochs = ctx.size("mrt_epochs");
  c.reward = ctx.text("reward");
  c.epsilon = ctx.real("epsilon");
  c.extra_len = ctx.size("extra_len");
  c.sgd = SgdOptions{ctx.real("mrt_lr"), ctx.real("mrt_momentum"), ctx.real("mrt_clip")};
  c.seed = ctx.seed();
  c.validate();
  return c;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) {
    std::cerr << "lasrl: warning: " << w << '\n';
  }
}

namespace {

Option seed_option() { return {"seed", json(std::uint64_t{1}), "master seed"}; }

std::vector<Option> operator+(std::vector<Option> a, const std::vector<Option>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Command gen_data() {
  const seq::TaskSpec t = SeqExperimentConfig{}.task;
  const SeqExperimentConfig d;
  Command c;
  c.name = "gen-data";
  c.help = "generate a synthetic micro-translation task and its corpora";
  c.options = {
      {"source_lexemes", json(std::uint64_t{t.source_lexemes}), "source lexemes"},
      {"inflections", json(std::uint64_t{t.inflections}), "inflected forms per target lexeme"},
      {"synonym_lexemes", json(std::uint64_t{t.synonym_lexemes}), "source lexemes with a second target lexeme"},
      {"min_length", json(std::uint64_t{t.min_length}), "shortest sentence"},
      {"max_length", json(std::uint64_t{t.max_length}), "longest sentence"},
      {"reorder_window", json(std::uint64_t{t.reorder_window}), "block size of the source-to-target reordering"},
      {"train_size", json(std::uint64_t{d.train_size}), "training sentences"},
      {"valid_size", json(std::uint64_t{d.valid_size}), "validation sentences"},
      {"test_size", json(std::uint64_t{500}), "test sentences (0 for none)"},
      {"embedding_dim", json(std::uint64_t{0}), "also write a shared-inflection table of this dimension"},
      seed_option(),
  };
  c.run = [](RunContext& ctx) {
    seq::TaskSpec spec;
    spec.source_lexemes = ctx.size("source_lexemes");
    spec.inflections = ctx.size("inflections");
    spec.synonym_lexemes = ctx.size("synonym_lexemes");
    spec.min_length = ctx.size("min_length");
    spec.max_length = ctx.size("max_length");
    spec.reorder_window = ctx.size("reorder_window");
    spec.seed = ctx.seed();
    spec.validate();
    const seq::Task task = seq::make_task(spec);
    std::vector<std::pair<std::string, seq::ParallelCorpus>> splits;
    for (const char* split : {"train", "valid", "test"}) {
      const std::size_t n = ctx.size(std::string(split) + "_size");
      if (n == 0 && std::string(split) != "test") {
        throw ConfigError(std::string(split) + "_size must be positive");
      }
      if (n > 0) {
        splits.emplace_back(split, seq::generate_corpus(task, n, split));
      }
    }
    seq::write_data_dir(ctx.out(), task, splits);
    ctx.artifact("task.json");
    for (const auto& [name, corpus] : splits) {
      ctx.artifact(name + ".src");
      ctx.artifact(name + ".tgt");
    }
    if (const std::size_t dim = ctx.size("embedding_dim"); dim > 0) {
      Rng rng = make_rng(ctx.seed(), "embed");
      seq::write_embedding_table(ctx.artifact("shared_inflection.vec"), task.target_vocab.tokens(),
                                 seq::shared_inflection_table(task.target_vocab, dim, rng));
    }
    std::cout << "source vocabulary " << task.source_vocab.size() << ", target vocabulary "
              << task.target_vocab.size() << " (" << task.target_vocab.num_bases() << " bases)\n";
    return 0;
  };
  return c;
}

Command train_mle() {
  const SeqExperimentConfig d;
  Command c;
  c.name = "train-mle";
  c.help = "MLE pretraining of the micro-translation model";
  c.options = std::vector<Option>{
                  {"data", json(""), "data directory written by gen-data"},
                  {"small_vocab", json(false), "train on base lexemes instead of inflected forms"},
                  {"dim", json(std::uint64_t{d.dim}), "model dimension"},
                  {"output_init", json("random"), "theta2 initialization: random or shared-inflection"},
                  {"embedding_table", json(""), "initialize theta2 from this embedding file instead"},
                  {"freeze_output", json(false), "exclude theta2 from updates"},
                  seed_option(),
              } +
              mle_options();
  c.run = [](RunContext& ctx) {
    const std::filesystem::path dir = ctx.required_path("data");
    SeqExperimentConfig config;
    config.dim = ctx.size("dim");
    config.small_vocab = ctx.flag("small_vocab");
    config.output_init = seq::parse_output_init(ctx.text("output_init"));
    config.freeze_output = ctx.flag("freeze_output");
    config.seed = ctx.seed();
    if (config.dim == 0) {
      throw ConfigError("dim must be positive");
    }
    seq::SeqData data;
    data.task = seq::read_task(dir);
    data.train = seq::read_split(data.task, dir, "train", config.small_vocab);
    data.valid = seq::read_split(data.task, dir, "valid", config.small_vocab);
    const seq::Vocabulary vocab = seq::target_vocabulary(data.task, config.small_vocab);
    data.target_vocab = vocab.size();

    seq::SeqModel model = seq::make_model(config, data);
    if (const std::string table = ctx.text("embedding_table"); !table.empty()) {
      Rng rng = make_rng(config.seed, "embed");
      const auto init = seq::load_embedding_table(table, vocab, config.dim, rng);
      model.set_output_embedding(init.table);
      model.set_output_frozen(config.freeze_output);
      json coverage{{"covered", init.covered}, {"missing", init.missing}, {"coverage", init.coverage()}};
      std::ofstream(ctx.artifact("embedding_coverage.json")) << coverage.dump(2) << '\n';
      std::cout << "embedding coverage " << init.covered << "/" << vocab.size() << '\n';
    }
    const auto result = seq::train_mle(model, data.train, data.valid, mle_config(ctx));
    seq::save_model(ctx.artifact("model.ckpt"), model, data.task.spec, config.small_vocab);
    CsvWriter csv(ctx.artifact("mle_log.csv"), {"epoch", "train_loss", "val_loss"});
    for (std::size_t e = 0; e < result.val_loss.size(); ++e) {
      csv.row(e, result.train_loss[e], result.val_loss[e]);
    }
    std::cout << "best epoch " << result.best_epoch << ", validation loss " << result.val_loss[result.best_epoch]
              << '\n';
    return 0;
  };
  return c;
}

Command decode() {
  Command c;
  c.name = "decode";
  c.help = "beam-search decoding, scored with smoothed BLEU when references exist";
  c.options = {
      {"model", json(""), "model checkpoint"},
      {"data", json(""), "data directory (references scored)"},
      {"split", json("test"), "split of the data directory"},
      {"input", json(""), "decode this source file instead (one sentence per line)"},
      {"beam", json(std::uint64_t{5}), "beam size"},
      {"extra_len", json(std::uint64_t{2}), "output length bound beyond the source length"},
  };
  c.run = [](RunContext& ctx) {
    const auto bundle = seq::load_model(ctx.required_path("model"));
    const seq::Task task = seq::make_task(bundle.task);
    const seq::Vocabulary vocab = seq::target_vocabulary(task, bundle.small_vocab);
    const std::size_t beam = ctx.size("beam");
    if (beam == 0) {
      throw ConfigError("beam must be positive");
    }
    std::vector<seq::TokenIds> sources;
    std::optional<seq::ParallelCorpus> refs;
    if (const std::string input = ctx.text("input"); !input.empty()) {
      std::ifstream in(input);
      if (!in) {
        throw ConfigError("cannot read " + input);
      }
      for (std::string line; std::getline(in, line);) {
        sources.push_back(task.source_vocab.encode(line));
      }
    } else {
      const std::filesystem::path dir = ctx.required_path("data");
      if (seq::task_spec_json(seq::read_task(dir).spec) != seq::task_spec_json(bundle.task)) {
        throw ConfigError("data directory does not belong to the model's task");
      }
      refs = seq::read_split(task, dir, ctx.text("split"), bundle.small_vocab);
      sources = refs->source;
    }
    const auto hyps = seq::decode_corpus(bundle.model, sources, beam, ctx.size("extra_len"));
    {
      std::ofstream out(ctx.artifact("decoded.txt"), std::ios::binary | std::ios::trunc);
      for (const auto& h : hyps) {
        out << vocab.decode(h) << '\n';
      }
    }
    if (refs) {
      CsvWriter csv(ctx.artifact("bleu.csv"), {"sentence", "bleu"});
      Vector scores;
      for (std::size_t i = 0; i < hyps.size(); ++i) {
        scores.push_back(seq::smoothed_bleu(hyps[i], refs->target[i]));
        csv.row(i, scores.back());
      }
      std::cout << "mean sentence BLEU " << stats::mean(scores) << " over " << scores.size() << " sentences\n";
    }
    return 0;
  };
  return c;
}

Command mrt_finetune() {
  Command c;
  c.name = "mrt-finetune";
  c.help = "minimum risk training of an MLE-pretrained model";
  c.options = std::vector<Option>{
                  {"model", json(""), "MLE model checkpoint"},
                  {"data", json(""), "data directory written by gen-data"},
                  seed_option(),
                  {"epsilon", json(SeqExperimentConfig{}.mrt.epsilon), "label smoothing of the MLE term"},
              } +
              mrt_options();
  c.run = [](RunContext& ctx) {
    auto bundle = seq::load_model(ctx.required_path("model"));
    const std::filesystem::path dir = ctx.required_path("data");
    const seq::Task task = seq::read_task(dir);
    if (seq::task_spec_json(task.spec) != seq::task_spec_json(bundle.task)) {
      throw ConfigError("data directory does not belong to the model's task");
    }
    const auto train = seq::read_split(task, dir, "train", bundle.small_vocab);
    const auto valid = seq::read_split(task, dir, "valid", bundle.small_vocab);
    const auto result = mrt::mrt_finetune(bundle.model, train, valid, mrt_config(ctx));
    print_warnings(result.warnings);
    seq::save_model(ctx.artifact("model.ckpt"), bundle.model, bundle.task, bundle.small_vocab);
    mrt::write_train_log(result, ctx.artifact("train_log.csv"));
    const auto& first = result.log.front();
    const auto& best = result.log[result.best_epoch];
    std::cout << "validation BLEU " << first.val_bleu << " -> " << best.val_bleu << " (epoch " << result.best_epoch
              << ")\n";
    return 0;
  };
  return c;
}

}  // namespace

std::vector<Command> seq_commands() { return {gen_data(), train_mle(), decode(), mrt_finetune()}; }

}  // namespace lasrl::cli
