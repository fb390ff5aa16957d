#pragma once

#include <string>
#include <vector>

#include "command.hpp"
#include "lasrl/bandit.hpp"
#include "lasrl/experiment.hpp"

namespace lasrl::cli {

std::vector<Option> bandit_options(const std::string& hidden);
bandit::ExperimentConfig bandit_config(const RunContext& ctx);
// curves.csv, trials.csv (optional), summary.csv and tests.csv.
void write_bandit_bundle(RunContext& ctx, const bandit::ExperimentConfig& config,
                         const bandit::ExperimentResult& result);

// MLE keys (epochs, batch_size, epsilon, lr, momentum, clip) and MRT keys
// (alpha, beta, k, reward, extra_len, mrt_lr, ...), defaults taken from the
// library configs.
std::vector<Option> mle_options();
seq::MleConfig mle_config(const RunContext& ctx);
std::vector<Option> mrt_options();
mrt::MrtConfig mrt_config(const RunContext& ctx);

void print_warnings(const std::vector<std::string>& warnings);

}  // namespace lasrl::cli
