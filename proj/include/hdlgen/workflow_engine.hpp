#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdlgen/domain.hpp"
#include "hdlgen/llm_gateway.hpp"
#include "hdlgen/paradigm_blocks.hpp"
#include "hdlgen/sim_harness.hpp"

namespace hdlgen::workflow {

enum class Phase { PhaseI, PhaseII, FailSafe, ShortCut, Done };

std::string to_string(Phase p);

/// Append-only structured record; the stream is replay-stable (no wall-clock
/// data), so two runs from the same transcript emit identical events.
struct Event {
    std::string type;
    nlohmann::json data;
};

struct AttemptRecord {
    int attempt_index = 0;
    Block block = Block::Sequ;
    std::string phase_label;
    std::optional<int> candidate_id;
    std::string info_list;
    std::string intermediate;
    std::string dut;
    sim::SimStatus status = sim::SimStatus::RuntimeError;
    std::optional<PassRate> pass_rate;
    bool simulated = false;
};

class RunObserver {
public:
    virtual ~RunObserver() = default;
    virtual void on_event(const Event&) {}
    virtual void on_attempt(const AttemptRecord&) {}
};

struct TaskRunState {
    Phase phase = Phase::PhaseI;
    SearchBudget budget;
    FailState fail;
    std::optional<CircuitType> circuit_type;
    std::vector<InfoListCandidate> pool;
    std::vector<CodeSample> samples;
    std::optional<CodeSample> best;
    std::optional<int> shortcut_candidate;
    int round_index = 1;
    bool solved = false;
};

/// Average of the last and new pass rate, exact.
Rat update_candidate(const Rat& score_last, const Rat& p_new);

/// True iff p >= w and p < 1 (a full pass terminates the task instead).
bool should_shortcut(const Rat& p, const Rat& w);

enum class FormatErrorAction { Retry, EnterFailSafe };

/// Increments e_f; Retry while e_f <= E_f, EnterFailSafe once it exceeds.
FormatErrorAction register_format_error(FailState& fail);

/// Drives one task through classification, phase I with candidate ranking,
/// phase II BEHAV rounds, and the Fail-safe / Short-cut transitions.
class WorkflowEngine {
public:
    WorkflowEngine(llm::Backend& backend, paradigm::ParadigmBlocks& blocks,
                   sim::SimRunner& sim, RunObserver& observer,
                   std::filesystem::path work_root,
                   std::string system_prompt = "You are a Verilog RTL design expert.");

    TaskRunState run_task(const Task& task, const RunConfig& cfg);

    /// Single-conversation generation, cfg.baseline_samples per task, no
    /// paradigm blocks.
    TaskRunState run_task_baseline(const Task& task, const RunConfig& cfg);

private:
    struct FailSafeSignal {};
    struct AttemptAbort {};

    llm::ChatSession new_session(const Task& task, const RunConfig& cfg);
    void retag_retry(llm::ChatSession& session, const Task& task);

    template <typename F>
    auto step_strict(llm::ChatSession& session, const Task& task, TaskRunState& state, F fn);
    template <typename F>
    auto step_limited(llm::ChatSession& session, const Task& task, F fn);

    PassRate simulate_sample(CodeSample& sample, const Task& task, TaskRunState& state,
                             AttemptRecord& record, const RunConfig& cfg);
    void record_sample(TaskRunState& state, const CodeSample& sample);
    CodeSample generate_specialized(const Task& task, const paradigm::InformationList& info,
                                    CircuitType kind, llm::ChatSession& session,
                                    int attempt_index, std::string* intermediate, bool limited,
                                    TaskRunState& state);

    void phase_one(TaskRunState& state, const Task& task, const RunConfig& cfg);
    void phase_two_round(TaskRunState& state, const Task& task, const RunConfig& cfg, int s);
    void run_shortcut(TaskRunState& state, const Task& task, const RunConfig& cfg,
                      int candidate_id);
    void enter_fail_safe(TaskRunState& state, const Task& task, const RunConfig& cfg);
    void finish(TaskRunState& state);

    void emit(const std::string& type, nlohmann::json data);
    void sort_pool(TaskRunState& state);
    InfoListCandidate* find_candidate(TaskRunState& state, int id);

    llm::Backend& backend_;
    paradigm::ParadigmBlocks& blocks_;
    sim::SimRunner& sim_;
    RunObserver& observer_;
    std::filesystem::path work_root_;
    std::string system_prompt_;

    int session_counter_ = 0;
    int attempt_counter_ = 0;
    int candidate_counter_ = 0;
    int retry_counter_ = 0;
    std::optional<std::int64_t> cached_case_count_;
};

} // namespace hdlgen::workflow
