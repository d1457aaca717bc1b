#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hdlgen/eval_kit.hpp"
#include "hdlgen/workflow_engine.hpp"

namespace hdlgen::app {

/// Persists one task's engine output under
/// <run_dir>/tasks/<task_id>/{events.log, attempts/<i>/...}. Event records
/// are append-only JSON lines; attempt artifacts are written byte-exact so
/// replayed runs can be diffed directly.
class FileRunObserver : public workflow::RunObserver {
public:
    explicit FileRunObserver(std::filesystem::path task_dir);

    void on_event(const workflow::Event& event) override;
    void on_attempt(const workflow::AttemptRecord& record) override;

private:
    std::filesystem::path task_dir_;
    std::ofstream events_;
};

/// Directory for a task's simulation workdirs, shared with the engine.
std::filesystem::path task_dir(const std::filesystem::path& run_dir, const std::string& task_id);

bool task_complete(const std::filesystem::path& run_dir, const std::string& task_id);

void write_task_score(const std::filesystem::path& run_dir, const std::string& task_id,
                      const workflow::TaskRunState& state);

/// Reads every tasks/<id>/score.json in the run directory.
std::vector<eval_kit::TaskScore> read_task_scores(const std::filesystem::path& run_dir);

std::string read_run_dataset_name(const std::filesystem::path& run_dir);

} // namespace hdlgen::app
