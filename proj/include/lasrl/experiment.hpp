#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lasrl/corpus.hpp"
#include "lasrl/mrt.hpp"
#include "lasrl/seq_model.hpp"

namespace lasrl::seq {

enum class OutputInit { Random, SharedInflection };
std::string_view output_init_name(OutputInit init);
OutputInit parse_output_init(std::string_view name);  // ConfigError

/// End-to-end micro-translation run: generate data, MLE pretraining, MRT
/// fine-tuning. Every random draw derives from `seed`.
struct SeqExperimentConfig {
  TaskSpec task = [] {
    TaskSpec t;
    t.inflections = 10;
    t.reorder_window = 3;
    return t;
  }();
  std::size_t train_size = 1000;
  std::size_t valid_size = 500;
  std::size_t dim = 32;
  bool small_vocab = false;  // train on the base-lexeme view of the targets
  OutputInit output_init = OutputInit::Random;
  bool freeze_output = false;
  MleConfig mle = [] {
    MleConfig m;
    m.epochs = 30;
    return m;
  }();
  // MRT learning rate tuned on this task, far below the MLE rate.
  mrt::MrtConfig mrt = [] {
    mrt::MrtConfig m;
    m.epochs = 3;
    m.sgd = SgdOptions{0.01, 0.99, 0.1};
    return m;
  }();
  std::uint64_t seed = 1;

  void validate() const;
};

struct SeqData {
  Task task;
  ParallelCorpus train;
  ParallelCorpus valid;
  std::size_t target_vocab = 0;
};

/// Task and corpora; targets collapsed to base ids for the small vocabulary.
SeqData make_data(const SeqExperimentConfig& config);

/// Fresh model with the configured theta2 initialization and freeze flag.
SeqModel make_model(const SeqExperimentConfig& config, const SeqData& data);

struct SeqRun {
  SeqData data;
  SeqModel mle_model;
  SeqModel mrt_model;
  MleResult mle;
  mrt::MrtResult mrt;
};

SeqRun run_seq_experiment(const SeqExperimentConfig& config);

/// Target vocabulary seen by a model: the full inflected one, or one token
/// per base lexeme.
Vocabulary target_vocabulary(const Task& task, bool small_vocab);

// On-disk data directory: task.json plus <split>.src / <split>.tgt with the
// full inflected targets. The task (vocabularies, lexicon) is rebuilt from
// the spec on load.
void write_data_dir(const std::filesystem::path& dir, const Task& task,
                    const std::vector<std::pair<std::string, ParallelCorpus>>& splits);
Task read_task(const std::filesystem::path& dir);  // ParseError / ConfigError
ParallelCorpus read_split(const Task& task, const std::filesystem::path& dir, const std::string& split,
                          bool small_vocab);

std::string task_spec_json(const TaskSpec& spec);
TaskSpec parse_task_spec(const std::string& text);  // ParseError

/// A checkpoint that also records the task spec and the vocabulary view, so
/// downstream commands can rebuild vocabularies.
struct ModelBundle {
  TaskSpec task;
  bool small_vocab = false;
  SeqModel model;
};

void save_model(const std::filesystem::path& path, const SeqModel& model, const TaskSpec& task, bool small_vocab);
ModelBundle load_model(const std::filesystem::path& path);  // ParseError on a malformed or mismatched file

}  // namespace lasrl::seq
