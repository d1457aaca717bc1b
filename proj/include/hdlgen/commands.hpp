#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hdlgen/app_config.hpp"
#include "hdlgen/dataset.hpp"

namespace hdlgen::app {

struct RunSummary {
    int tasks_total = 0;
    int tasks_run = 0;
    int tasks_skipped = 0;
    int tasks_solved = 0;
};

/// Executes every task in the configured dataset to a terminal state and
/// persists artifacts under run_dir. Completed tasks are skipped on restart;
/// individual task failures never abort the run. Every LLM exchange is
/// recorded to run_dir/transcript.log.
RunSummary cmd_run(const AppConfig& cfg, const std::filesystem::path& run_dir);

struct EvalOptions {
    std::vector<std::filesystem::path> run_dirs;
    std::vector<int> k_list{1, 5, 10};
    std::optional<std::filesystem::path> hard_tasks_from;
};

/// Summary CSV (split,k,pass_at_k); also writes tasks.csv into each run dir.
std::string cmd_eval(const EvalOptions& opts);

/// Error-rate histogram CSV (bucket,count) per run dir.
std::string cmd_report(const std::vector<std::filesystem::path>& run_dirs);

struct ReplayReport {
    std::vector<std::string> divergences;
    bool clean() const { return divergences.empty(); }
};

/// Re-executes the recorded run against its transcript and diffs the
/// produced task artifacts against the originals.
ReplayReport cmd_replay(const std::filesystem::path& run_dir);

/// Backend factory shared by run/replay.
std::shared_ptr<llm::Backend> make_backend(const AppConfig& cfg);

} // namespace hdlgen::app
