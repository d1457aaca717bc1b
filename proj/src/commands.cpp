#include "hdlgen/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "hdlgen/eval_kit.hpp"
#include "hdlgen/run_store.hpp"
#include "hdlgen/workflow_engine.hpp"

namespace hdlgen::app {

namespace fs = std::filesystem;

std::shared_ptr<llm::Backend> make_backend(const AppConfig& cfg) {
    if (cfg.backend == "scripted") {
        if (cfg.script_file.empty())
            throw ValueError("scripted backend needs script_file");
        return std::make_shared<llm::ScriptedBackend>(
            llm::ScriptedBackend::from_file(cfg.script_file));
    }
    if (cfg.backend == "replay") {
        if (cfg.transcript_file.empty())
            throw ValueError("replay backend needs transcript_file");
        return std::make_shared<llm::ReplayBackend>(llm::Transcript::load(cfg.transcript_file));
    }
    if (cfg.backend == "live" || cfg.backend == "record")
        return std::make_shared<llm::LiveBackend>(cfg.live);
    throw ValueError("unknown backend: " + cfg.backend);
}

RunSummary cmd_run(const AppConfig& cfg, const fs::path& run_dir) {
    cfg.run.validate();
    auto dataset = load_dataset(cfg.dataset_path, dataset_format_from_string(cfg.dataset_format));

    fs::create_directories(run_dir);
    if (!fs::exists(run_dir / "config.snapshot"))
        std::ofstream(run_dir / "config.snapshot", std::ios::binary) << cfg.to_snapshot();

    auto inner = make_backend(cfg);
    auto backend =
        std::make_shared<llm::RecordingBackend>(inner, run_dir / "transcript.log");

    paradigm::PromptTemplates templates = paradigm::PromptTemplates::defaults();
    if (!cfg.templates_dir.empty())
        templates.load_directory(cfg.templates_dir);

    RunSummary summary;
    summary.tasks_total = static_cast<int>(dataset.tasks.size());

    std::vector<const Task*> pending;
    for (const auto& task : dataset.tasks) {
        if (task_complete(run_dir, task.task_id))
            ++summary.tasks_skipped;
        else
            pending.push_back(&task);
    }

    std::mutex summary_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= pending.size())
                return;
            const Task& task = *pending[i];
            fs::path dir = task_dir(run_dir, task.task_id);
            try {
                FileRunObserver observer(dir);
                paradigm::ParadigmBlocks blocks(*backend, templates);
                sim::SimConfig sim_cfg = cfg.sim;
                sim_cfg.timeout_seconds = cfg.run.sim_timeout_seconds;
                sim::ProcessSimRunner sim_runner(sim_cfg);
                workflow::WorkflowEngine engine(*backend, blocks, sim_runner, observer, dir,
                                                cfg.system_prompt);
                auto state = cfg.baseline ? engine.run_task_baseline(task, cfg.run)
                                          : engine.run_task(task, cfg.run);
                write_task_score(run_dir, task.task_id, state);
                std::lock_guard lock(summary_mutex);
                ++summary.tasks_run;
                if (state.solved)
                    ++summary.tasks_solved;
            } catch (const SimulatorMissing&) {
                throw;   // environment failure: abort the whole run
            } catch (const std::exception& e) {
                std::lock_guard lock(summary_mutex);
                std::cerr << "task " << task.task_id << " failed: " << e.what() << "\n";
            }
        }
    };

    int jobs = std::max(1, cfg.run.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int j = 0; j < jobs; ++j)
            threads.emplace_back(worker);
        for (auto& t : threads)
            t.join();
    }
    return summary;
}

std::string cmd_eval(const EvalOptions& opts) {
    std::optional<std::set<std::string>> hard;
    if (opts.hard_tasks_from) {
        auto baseline_scores = read_task_scores(*opts.hard_tasks_from);
        hard = eval_kit::select_hard_tasks(baseline_scores);
        if (hard->empty())
            std::cerr << "warning: baseline run has no hard tasks (all passed)\n";
    }

    std::vector<eval_kit::SummaryRow> rows;
    for (const auto& run_dir : opts.run_dirs) {
        auto scores = read_task_scores(run_dir);
        std::string split = read_run_dataset_name(run_dir);
        if (hard) {
            std::erase_if(scores, [&](const eval_kit::TaskScore& s) {
                return !hard->count(s.task_id);
            });
        }
        std::ofstream(run_dir / "tasks.csv", std::ios::binary)
            << eval_kit::task_csv(scores, split);
        if (scores.empty())
            continue;
        for (int k : opts.k_list)
            rows.push_back({split, k, eval_kit::aggregate_pass_at_k(scores, k)});
    }
    return eval_kit::summary_csv(rows);
}

std::string cmd_report(const std::vector<fs::path>& run_dirs) {
    std::ostringstream os;
    os << "run,bucket,count\n";
    static const char* kBuckets[] = {"[0.0,0.2)", "[0.2,0.4)", "[0.4,0.6)", "[0.6,0.8)",
                                     "[0.8,1.0]"};
    for (const auto& run_dir : run_dirs) {
        auto scores = read_task_scores(run_dir);
        auto buckets = eval_kit::error_rate_histogram(scores);
        for (int i = 0; i < 5; ++i)
            os << run_dir.filename().string() << "," << kBuckets[i] << ","
               << buckets[static_cast<std::size_t>(i)] << "\n";
    }
    return os.str();
}

namespace {

std::string read_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::set<std::string> relative_files(const fs::path& root) {
    std::set<std::string> files;
    if (!fs::exists(root))
        return files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            files.insert(fs::relative(entry.path(), root).generic_string());
    return files;
}

} // namespace

ReplayReport cmd_replay(const fs::path& run_dir) {
    AppConfig cfg = AppConfig::from_snapshot(run_dir / "config.snapshot");
    if (!fs::exists(run_dir / "transcript.log"))
        throw ReplayMiss("run has no transcript.log: " + run_dir.string());

    cfg.backend = "replay";
    cfg.transcript_file = (run_dir / "transcript.log").string();
    cfg.run.jobs = 1;

    fs::path verify_dir = run_dir.string() + ".replay-verify";
    fs::remove_all(verify_dir);
    cmd_run(cfg, verify_dir);

    ReplayReport report;
    auto original = relative_files(run_dir / "tasks");
    auto replayed = relative_files(verify_dir / "tasks");
    for (const auto& f : original) {
        if (!replayed.count(f)) {
            report.divergences.push_back("missing in replay: " + f);
            continue;
        }
        if (read_bytes(run_dir / "tasks" / f) != read_bytes(verify_dir / "tasks" / f))
            report.divergences.push_back("differs: " + f);
    }
    for (const auto& f : replayed)
        if (!original.count(f))
            report.divergences.push_back("extra in replay: " + f);
    return report;
}

} // namespace hdlgen::app
