#include "lasrl/experiment.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lasrl/checkpoint.hpp"
#include "lasrl/embedding.hpp"
#include "lasrl/errors.hpp"

namespace lasrl::seq {

std::string_view output_init_name(OutputInit init) {
  switch (init) {
    case OutputInit::Random:
      return "random";
    case OutputInit::SharedInflection:
      return "shared-inflection";
  }
  return "?";
}

OutputInit parse_output_init(std::string_view name) {
  for (OutputInit i : {OutputInit::Random, OutputInit::SharedInflection}) {
    if (output_init_name(i) == name) {
      return i;
    }
  }
  throw ConfigError("unknown output init '" + std::string(name) + "' (expected random or shared-inflection)");
}

void SeqExperimentConfig::validate() const {
  task.validate();
  if (train_size == 0 || valid_size == 0) {
    throw ConfigError("train and validation sizes must be positive");
  }
  if (dim == 0) {
    throw ConfigError("model dimension must be positive");
  }
  mrt.validate();
}

SeqData make_data(const SeqExperimentConfig& config) {
  config.validate();
  SeqData data;
  TaskSpec spec = config.task;
  spec.seed = config.seed;
  data.task = make_task(spec);
  data.train = generate_corpus(data.task, config.train_size, "train");
  data.valid = generate_corpus(data.task, config.valid_size, "valid");
  if (config.small_vocab) {
    data.train = collapse_inflections(data.train, data.task.target_vocab);
    data.valid = collapse_inflections(data.valid, data.task.target_vocab);
    data.target_vocab = data.task.target_vocab.num_bases();
  } else {
    data.target_vocab = data.task.target_vocab.size();
  }
  return data;
}

SeqModel make_model(const SeqExperimentConfig& config, const SeqData& data) {
  Rng init = make_rng(config.seed, "init");
  SeqModel model({data.task.source_vocab.size(), data.target_vocab, config.dim}, init);
  if (config.output_init == OutputInit::SharedInflection) {
    Rng rng = make_rng(config.seed, "embed");
    const Vocabulary& vocab = config.small_vocab ? Vocabulary::lexical("lex", data.task.spec.target_lexemes())
                                                 : data.task.target_vocab;
    model.set_output_embedding(shared_inflection_table(vocab, config.dim, rng));
  }
  model.set_output_frozen(config.freeze_output);
  return model;
}

SeqRun run_seq_experiment(const SeqExperimentConfig& config) {
  SeqData data = make_data(config);
  SeqModel model = make_model(config, data);
  MleConfig mle = config.mle;
  mle.seed = config.seed;
  MleResult mle_result = train_mle(model, data.train, data.valid, mle);
  SeqModel after = model;
  mrt::MrtConfig mrt = config.mrt;
  mrt.seed = config.seed;
  mrt::MrtResult mrt_result = mrt::mrt_finetune(after, data.train, data.valid, mrt);
  return SeqRun{std::move(data), std::move(model), std::move(after), std::move(mle_result), std::move(mrt_result)};
}

Vocabulary target_vocabulary(const Task& task, bool small_vocab) {
  return small_vocab ? Vocabulary::lexical("lex", task.spec.target_lexemes()) : task.target_vocab;
}

std::string task_spec_json(const TaskSpec& spec) {
  nlohmann::json j{{"source_lexemes", spec.source_lexemes}, {"inflections", spec.inflections},
                   {"synonym_lexemes", spec.synonym_lexemes}, {"min_length", spec.min_length},
                   {"max_length", spec.max_length}, {"reorder_window", spec.reorder_window},
                   {"seed", spec.seed}};
  return j.dump(2) + "\n";
}

TaskSpec parse_task_spec(const std::string& text) {
  TaskSpec spec;
  try {
    const auto j = nlohmann::json::parse(text);
    spec.source_lexemes = j.at("source_lexemes").get<std::size_t>();
    spec.inflections = j.at("inflections").get<std::size_t>();
    spec.synonym_lexemes = j.at("synonym_lexemes").get<std::size_t>();
    spec.min_length = j.at("min_length").get<std::size_t>();
    spec.max_length = j.at("max_length").get<std::size_t>();
    spec.reorder_window = j.at("reorder_window").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("task spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_data_dir(const std::filesystem::path& dir, const Task& task,
                    const std::vector<std::pair<std::string, ParallelCorpus>>& splits) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "task.json", std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + (dir / "task.json").string());
  }
  out << task_spec_json(task.spec);
  for (const auto& [name, corpus] : splits) {
    write_corpus(corpus, task.source_vocab, task.target_vocab, dir / name);
  }
}

Task read_task(const std::filesystem::path& dir) {
  return make_task(parse_task_spec(slurp(dir / "task.json")));
}

ParallelCorpus read_split(const Task& task, const std::filesystem::path& dir, const std::string& split,
                          bool small_vocab) {
  ParallelCorpus corpus = read_corpus(task.source_vocab, task.target_vocab, dir / split);
  return small_vocab ? collapse_inflections(corpus, task.target_vocab) : corpus;
}

void save_model(const std::filesystem::path& path, const SeqModel& model, const TaskSpec& task, bool small_vocab) {
  nlohmann::json j{{"model", nlohmann::json::parse(model.config_json())},
                   {"task", nlohmann::json::parse(task_spec_json(task))},
                   {"small_vocab", small_vocab}};
  write_checkpoint(path, j.dump(), model.params());
}

ModelBundle load_model(const std::filesystem::path& path) {
  const Checkpoint ckpt = read_checkpoint(path);
  SeqModelConfig mc;
  TaskSpec spec;
  bool small = false;
  try {
    const auto j = nlohmann::json::parse(ckpt.config_json);
    mc.source_vocab = j.at("model").at("source_vocab").get<std::size_t>();
    mc.target_vocab = j.at("model").at("target_vocab").get<std::size_t>();
    mc.dim = j.at("model").at("dim").get<std::size_t>();
    spec = parse_task_spec(j.at("task").dump());
    small = j.at("small_vocab").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": bad model config: " + e.what());
  }
  const Task task = make_task(spec);
  if (mc.source_vocab != task.source_vocab.size() || mc.target_vocab != target_vocabulary(task, small).size()) {
    throw ParseError(path.string() + ": model vocabulary sizes do not match its task");
  }
  Rng unused(0);
  SeqModel model(mc, unused);
  auto& params = model.params();
  if (ckpt.groups.size() != params.size()) {
    throw ParseError(path.string() + ": expected " + std::to_string(params.size()) + " parameter groups");
  }
  for (std::size_t g = 0; g < params.size(); ++g) {
    const ParamGroup& src = ckpt.groups[g];
    if (src.name != params[g].name || src.value.rows() != params[g].value.rows() ||
        src.value.cols() != params[g].value.cols()) {
      throw ParseError(path.string() + ": group '" + src.name + "' does not match the model layout");
    }
    params[g].value = src.value;
    params[g].frozen = src.frozen;
  }
  return ModelBundle{spec, small, std::move(model)};
}

}  // namespace lasrl::seq
