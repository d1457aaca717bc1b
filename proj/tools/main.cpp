#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdlgen/commands.hpp"

namespace {

// exit codes: 0 success, 1 environment error, 2 invalid input, 3 replay divergence
int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const hdlgen::SimulatorMissing& e) {
        std::cerr << "environment error: " << e.what() << "\n";
        return 1;
    } catch (const hdlgen::BackendUnavailable& e) {
        std::cerr << "environment error: " << e.what() << "\n";
        return 1;
    } catch (const hdlgen::ReplayMiss& e) {
        std::cerr << "replay error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    using namespace hdlgen;

    CLI::App cli{"paradigm-driven Verilog generation pipeline"};
    cli.require_subcommand(1);

    // run
    auto* run = cli.add_subcommand("run", "execute the pipeline over a dataset");
    std::string dataset_path, dataset_format = "directory", config_file, backend = "scripted";
    std::string out_dir, script_file, transcript_file, templates_dir;
    int jobs = 0;
    std::uint64_t seed = 0;
    bool seed_set = false, baseline = false;
    run->add_option("--dataset", dataset_path, "dataset path")->required();
    run->add_option("--format", dataset_format, "verilogeval-jsonl | directory");
    run->add_option("--config", config_file, "flat key=value config file");
    run->add_option("--backend", backend, "live | record | replay | scripted");
    run->add_option("--out", out_dir, "run directory")->required();
    run->add_option("--jobs", jobs, "concurrent task engines");
    run->add_option("--seed", seed, "run seed")->each([&](const std::string&) { seed_set = true; });
    run->add_option("--script", script_file, "scripted backend rule file (JSON)");
    run->add_option("--transcript", transcript_file, "transcript for the replay backend");
    run->add_option("--templates", templates_dir, "prompt template directory");
    run->add_flag("--baseline", baseline, "single-conversation baseline generation");

    // eval
    auto* eval = cli.add_subcommand("eval", "compute Pass@k over finished runs");
    std::vector<std::string> eval_runs;
    std::string k_csv = "1,5,10", hard_from;
    eval->add_option("--runs", eval_runs, "run directories")->required();
    eval->add_option("--k", k_csv, "comma-separated k values");
    eval->add_option("--hard-tasks-from", hard_from, "baseline run dir for hard-task filter");

    // report
    auto* report = cli.add_subcommand("report", "emit report tables");
    std::vector<std::string> report_runs;
    bool histogram = false;
    report->add_option("--runs", report_runs, "run directories")->required();
    report->add_flag("--histogram", histogram, "error-rate histogram");

    // replay
    auto* replay = cli.add_subcommand("replay", "verify a run against its transcript");
    std::string replay_run;
    replay->add_option("--run", replay_run, "run directory")->required();

    CLI11_PARSE(cli, argc, argv);

    if (run->parsed()) {
        return guarded([&] {
            app::AppConfig cfg;
            if (!config_file.empty())
                cfg = app::AppConfig::from_file(config_file);
            cfg.dataset_path = dataset_path;
            cfg.dataset_format = dataset_format;
            if (run->count("--backend"))
                cfg.backend = backend;
            if (jobs > 0)
                cfg.run.jobs = jobs;
            if (seed_set)
                cfg.run.seed = seed;
            if (!script_file.empty())
                cfg.script_file = script_file;
            if (!transcript_file.empty())
                cfg.transcript_file = transcript_file;
            if (!templates_dir.empty())
                cfg.templates_dir = templates_dir;
            if (baseline)
                cfg.baseline = true;
            auto summary = app::cmd_run(cfg, out_dir);
            std::cout << "tasks: " << summary.tasks_total << " run: " << summary.tasks_run
                      << " skipped: " << summary.tasks_skipped
                      << " solved: " << summary.tasks_solved << "\n";
            return 0;
        });
    }
    if (eval->parsed()) {
        return guarded([&] {
            app::EvalOptions opts;
            for (const auto& r : eval_runs)
                opts.run_dirs.emplace_back(r);
            opts.k_list = app::parse_int_list(k_csv);
            if (!hard_from.empty())
                opts.hard_tasks_from = hard_from;
            std::cout << app::cmd_eval(opts);
            return 0;
        });
    }
    if (report->parsed()) {
        return guarded([&] {
            std::vector<std::filesystem::path> dirs(report_runs.begin(), report_runs.end());
            std::cout << app::cmd_report(dirs);
            return 0;
        });
    }
    if (replay->parsed()) {
        return guarded([&] {
            auto rep = app::cmd_replay(replay_run);
            if (rep.clean()) {
                std::cout << "replay verified: 0 divergences\n";
                return 0;
            }
            std::cout << "replay divergences: " << rep.divergences.size() << "\n";
            for (const auto& d : rep.divergences)
                std::cout << "  " << d << "\n";
            return 3;
        });
    }
    return 2;
}
