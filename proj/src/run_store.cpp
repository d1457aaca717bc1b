#include "hdlgen/run_store.hpp"

#include "hdlgen/app_config.hpp"

#include <algorithm>

#include <json.hpp>

namespace hdlgen::app {

namespace fs = std::filesystem;
using nlohmann::json;

FileRunObserver::FileRunObserver(fs::path task_dir) : task_dir_(std::move(task_dir)) {
    fs::create_directories(task_dir_);
    events_.open(task_dir_ / "events.log", std::ios::app);
}

void FileRunObserver::on_event(const workflow::Event& event) {
    json j{{"type", event.type}, {"data", event.data}};
    events_ << j.dump() << "\n";
    events_.flush();
}

void FileRunObserver::on_attempt(const workflow::AttemptRecord& record) {
    fs::path dir = task_dir_ / "attempts" / std::to_string(record.attempt_index);
    fs::create_directories(dir);
    std::ofstream(dir / "info_list.txt", std::ios::binary) << record.info_list;
    std::ofstream(dir / "intermediate.txt", std::ios::binary) << record.intermediate;
    std::ofstream(dir / "dut.v", std::ios::binary) << record.dut;
    json result{{"block", to_string(record.block)},
                {"phase", record.phase_label},
                {"status", sim::to_string(record.status)},
                {"simulated", record.simulated}};
    if (record.candidate_id)
        result["candidate"] = *record.candidate_id;
    if (record.pass_rate) {
        result["m"] = record.pass_rate->m();
        result["n"] = record.pass_rate->n();
    }
    std::ofstream(dir / "result", std::ios::binary) << result.dump() << "\n";
}

fs::path task_dir(const fs::path& run_dir, const std::string& task_id) {
    return run_dir / "tasks" / task_id;
}

bool task_complete(const fs::path& run_dir, const std::string& task_id) {
    return fs::exists(task_dir(run_dir, task_id) / "score.json");
}

void write_task_score(const fs::path& run_dir, const std::string& task_id,
                      const workflow::TaskRunState& state) {
    int n = 0, c = 0;
    Rat best(0, 1);
    for (const auto& s : state.samples) {
        if (!s.pass_rate)
            continue;
        ++n;
        if (s.pass_rate->full_pass())
            ++c;
        if (s.pass_rate->p() > best)
            best = s.pass_rate->p();
    }
    Rat err = Rat(1, 1) - best;
    json j{{"task_id", task_id},
           {"n", n},
           {"c", c},
           {"best_error_rate", err.to_string()},
           {"solved", state.solved}};
    std::ofstream(task_dir(run_dir, task_id) / "score.json", std::ios::binary)
        << j.dump() << "\n";
}

std::vector<eval_kit::TaskScore> read_task_scores(const fs::path& run_dir) {
    fs::path tasks = run_dir / "tasks";
    if (!fs::exists(tasks))
        throw IncompleteRun("no tasks directory in run: " + run_dir.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(tasks))
        if (entry.is_directory())
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());

    std::vector<eval_kit::TaskScore> scores;
    for (const auto& dir : dirs) {
        fs::path score_file = dir / "score.json";
        if (!fs::exists(score_file))
            throw IncompleteRun("task without score.json: " + dir.string());
        std::ifstream is(score_file);
        json j = json::parse(is);
        eval_kit::TaskScore s;
        s.task_id = j.at("task_id").get<std::string>();
        s.n = j.at("n").get<int>();
        s.c = j.at("c").get<int>();
        s.best_error_rate = Rat::from_decimal(j.at("best_error_rate").get<std::string>());
        scores.push_back(std::move(s));
    }
    return scores;
}

std::string read_run_dataset_name(const fs::path& run_dir) {
    auto cfg = AppConfig::from_snapshot(run_dir / "config.snapshot");
    if (cfg.dataset_path.empty())
        return "custom";
    return fs::path(cfg.dataset_path).filename().string();
}

} // namespace hdlgen::app
