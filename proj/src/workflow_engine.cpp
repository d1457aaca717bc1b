#include "hdlgen/workflow_engine.hpp"

#include <algorithm>

namespace hdlgen::workflow {

using nlohmann::json;

std::string to_string(Phase p) {
    switch (p) {
    case Phase::PhaseI: return "PhaseI";
    case Phase::PhaseII: return "PhaseII";
    case Phase::FailSafe: return "FailSafe";
    case Phase::ShortCut: return "ShortCut";
    case Phase::Done: return "Done";
    }
    return "?";
}

Rat update_candidate(const Rat& score_last, const Rat& p_new) {
    Rat zero(0, 1), one(1, 1);
    if (score_last < zero || score_last > one || p_new < zero || p_new > one)
        throw ValueError("candidate scores must lie in [0,1]");
    return rat_avg(score_last, p_new);
}

bool should_shortcut(const Rat& p, const Rat& w) {
    return p >= w && p < Rat(1, 1);
}

FormatErrorAction register_format_error(FailState& fail) {
    ++fail.e_f;
    return fail.e_f <= fail.e_f_max ? FormatErrorAction::Retry
                                    : FormatErrorAction::EnterFailSafe;
}

WorkflowEngine::WorkflowEngine(llm::Backend& backend, paradigm::ParadigmBlocks& blocks,
                               sim::SimRunner& sim, RunObserver& observer,
                               std::filesystem::path work_root, std::string system_prompt)
    : backend_(backend), blocks_(blocks), sim_(sim), observer_(observer),
      work_root_(std::move(work_root)), system_prompt_(std::move(system_prompt)) {}

void WorkflowEngine::emit(const std::string& type, json data) {
    observer_.on_event({type, std::move(data)});
}

llm::ChatSession WorkflowEngine::new_session(const Task& task, const RunConfig& cfg) {
    ++session_counter_;
    llm::ChatSession session(cfg.temperature, cfg.max_context_tokens);
    // The nonce keeps prompt digests distinct across attempts, which
    // record/replay relies on; it also gives scripted rules a stable anchor.
    session.set_system(system_prompt_ + " (task " + task.task_id + " session " +
                       std::to_string(session_counter_) + ")");
    return session;
}

void WorkflowEngine::retag_retry(llm::ChatSession& session, const Task& task) {
    ++retry_counter_;
    std::string current = session.messages().front().content;
    auto cut = current.find(" retry ");
    if (cut != std::string::npos)
        current = current.substr(0, cut);
    session.set_system(current + " retry " + std::to_string(retry_counter_));
}

// Phase-I step: a format error is charged to the task-wide counter and the
// step is rerun on a restored session; exceeding E_f aborts into Fail-safe.
template <typename F>
auto WorkflowEngine::step_strict(llm::ChatSession& session, const Task& task,
                                 TaskRunState& state, F fn) {
    for (;;) {
        auto snap = session.snapshot();
        try {
            return fn(session);
        } catch (const FormatError& e) {
            session.restore(std::move(snap));
            auto action = register_format_error(state.fail);
            emit("format_error", {{"e_f", state.fail.e_f}, {"what", e.what()}});
            if (action == FormatErrorAction::EnterFailSafe)
                throw FailSafeSignal{};
            retag_retry(session, task);
        }
    }
}

// Fail-safe / Short-cut / phase-II regime: one retry per step, then the
// attempt is abandoned (charged, not simulated).
template <typename F>
auto WorkflowEngine::step_limited(llm::ChatSession& session, const Task& task, F fn) {
    auto snap = session.snapshot();
    try {
        return fn(session);
    } catch (const FormatError&) {
        session.restore(std::move(snap));
        retag_retry(session, task);
    }
    try {
        return fn(session);
    } catch (const FormatError&) {
        throw AttemptAbort{};
    }
}

void WorkflowEngine::sort_pool(TaskRunState& state) {
    std::stable_sort(state.pool.begin(), state.pool.end(), candidate_ranks_before);
}

InfoListCandidate* WorkflowEngine::find_candidate(TaskRunState& state, int id) {
    for (auto& c : state.pool)
        if (c.id == id)
            return &c;
    return nullptr;
}

void WorkflowEngine::record_sample(TaskRunState& state, const CodeSample& sample) {
    state.samples.push_back(sample);
    if (!sample.pass_rate)
        return;
    if (!state.best || !state.best->pass_rate ||
        state.best->pass_rate->p() < sample.pass_rate->p())
        state.best = sample;
}

PassRate WorkflowEngine::simulate_sample(CodeSample& sample, const Task& task,
                                         TaskRunState& state, AttemptRecord& record,
                                         const RunConfig& cfg) {
    (void)cfg;
    auto workdir = work_root_ / "attempts" / std::to_string(sample.attempt_index) / "sim";
    auto outcome = sim_.compile_and_run(sample.verilog, task, workdir);
    record.simulated = true;
    record.status = outcome.status;

    PassRate pr(0, cached_case_count_.value_or(1));
    if (outcome.pass_rate) {
        pr = *outcome.pass_rate;
        cached_case_count_ = pr.n();
    }
    sample.compile_ok = outcome.status != sim::SimStatus::CompileError;
    sample.pass_rate = pr;
    record.pass_rate = pr;
    state.budget.consume();
    return pr;
}

CodeSample WorkflowEngine::generate_specialized(const Task& task,
                                                const paradigm::InformationList& info,
                                                CircuitType kind, llm::ChatSession& session,
                                                int attempt_index, std::string* intermediate,
                                                bool limited, TaskRunState& state) {
    auto step = [&](auto fn) {
        return limited ? step_limited(session, task, fn)
                       : step_strict(session, task, state, fn);
    };
    if (kind == CircuitType::Sequ) {
        auto table = step([&](llm::ChatSession& s) { return blocks_.sequ_state_table(task, info, s); });
        *intermediate = table.raw_text;
        return step([&](llm::ChatSession& s) {
            return blocks_.sequ_generate_module(task, table, s, attempt_index);
        });
    }
    auto tt = step([&](llm::ChatSession& s) { return blocks_.comb_truth_table(task, info, s); });
    std::string sop_text;
    for (std::size_t out = 0; out < tt.outputs.size(); ++out) {
        auto sop = logic_min::minimize(tt, out);
        sop_text += tt.outputs[out] + " = " + logic_min::render_sop(sop) + "\n";
    }
    *intermediate = sop_text;
    return step([&](llm::ChatSession& s) {
        return blocks_.comb_generate_from_sop(task, sop_text, s, attempt_index);
    });
}

TaskRunState WorkflowEngine::run_task(const Task& task, const RunConfig& cfg) {
    cfg.validate();
    task.validate();

    TaskRunState state;
    state.budget = SearchBudget::from_schedule(cfg.schedule);
    state.fail.e_f_max = cfg.e_f_max;

    try {
        // classification from a naive sample; no simulation budget consumed
        auto session = new_session(task, cfg);
        auto naive = step_strict(session, task, state, [&](llm::ChatSession& s) {
            return blocks_.naive_generate(task, s);
        });
        state.circuit_type = step_strict(session, task, state, [&](llm::ChatSession& s) {
            return blocks_.classify_circuit_type(task, naive, s);
        });
        emit("classified", {{"circuit_type", to_string(*state.circuit_type)}});

        phase_one(state, task, cfg);
        if (state.phase == Phase::PhaseI && !state.solved && state.budget.n_left > 0) {
            state.phase = Phase::PhaseII;
            emit("phase", {{"phase", "PhaseII"}});
            for (int s = 2; s <= state.budget.s_max && state.budget.n_left > 0 && !state.solved;
                 ++s) {
                state.round_index = s;
                phase_two_round(state, task, cfg, s);
            }
        }
    } catch (const FailSafeSignal&) {
        enter_fail_safe(state, task, cfg);
    }

    finish(state);
    return state;
}

void WorkflowEngine::phase_one(TaskRunState& state, const Task& task, const RunConfig& cfg) {
    emit("phase", {{"phase", "PhaseI"}});
    const int n1 = cfg.schedule.front();
    CircuitType kind = *state.circuit_type;
    Block block = kind == CircuitType::Sequ ? Block::Sequ : Block::Comb;

    for (int i = 0; i < n1 && state.budget.n_left > 0 && !state.solved; ++i) {
        auto session = new_session(task, cfg);
        auto info = step_strict(session, task, state, [&](llm::ChatSession& s) {
            return blocks_.extract_information_list(task, kind, s);
        });

        int attempt = ++attempt_counter_;
        InfoListCandidate candidate;
        candidate.id = ++candidate_counter_;
        candidate.text = info.text;
        candidate.origin_block = block;
        candidate.attempt_index = attempt;
        candidate.used_count = 1;

        AttemptRecord record;
        record.attempt_index = attempt;
        record.block = block;
        record.phase_label = "PhaseI";
        record.candidate_id = candidate.id;
        record.info_list = info.text;

        auto sample = generate_specialized(task, info, kind, session, attempt,
                                           &record.intermediate, false, state);
        sample.info_list_ref = candidate.id;
        record.dut = sample.verilog;

        PassRate pr = simulate_sample(sample, task, state, record, cfg);
        candidate.score = pr.p();
        state.pool.push_back(candidate);
        sort_pool(state);
        record_sample(state, sample);
        observer_.on_attempt(record);
        emit("attempt", {{"attempt", attempt},
                         {"phase", "PhaseI"},
                         {"block", to_string(block)},
                         {"candidate", candidate.id},
                         {"m", pr.m()},
                         {"n", pr.n()},
                         {"p", pr.p().to_string()},
                         {"status", sim::to_string(record.status)}});

        if (pr.full_pass()) {
            state.solved = true;
            return;
        }
        if (should_shortcut(pr.p(), cfg.shortcut_threshold_w)) {
            run_shortcut(state, task, cfg, candidate.id);
            return;
        }
    }

    if (state.solved || state.budget.n_left == 0)
        return;

    // forward the top-N_2 candidates, discard the rest
    const int n2 = state.budget.s_max >= 2 ? cfg.schedule[1] : 0;
    sort_pool(state);
    std::vector<int> kept, discarded;
    for (std::size_t i = 0; i < state.pool.size(); ++i)
        (static_cast<int>(i) < n2 ? kept : discarded).push_back(state.pool[i].id);
    if (static_cast<int>(state.pool.size()) > n2)
        state.pool.resize(static_cast<std::size_t>(n2));
    emit("candidate_forward", {{"kept", kept}, {"discarded", discarded}});
}

void WorkflowEngine::phase_two_round(TaskRunState& state, const Task& task,
                                     const RunConfig& cfg, int s) {
    const int n_s = cfg.schedule[static_cast<std::size_t>(s - 1)];
    emit("round", {{"s", s}, {"n_s", n_s}});

    // keep top-N_s, discard the rest
    sort_pool(state);
    if (static_cast<int>(state.pool.size()) > n_s) {
        std::vector<int> discarded;
        for (std::size_t i = static_cast<std::size_t>(n_s); i < state.pool.size(); ++i)
            discarded.push_back(state.pool[i].id);
        state.pool.resize(static_cast<std::size_t>(n_s));
        emit("candidate_discard", {{"discarded", discarded}});
    }

    // pool shortfall: regenerate fresh lists via the specialized extraction
    CircuitType kind = state.circuit_type.value_or(CircuitType::Sequ);
    while (static_cast<int>(state.pool.size()) < n_s && state.budget.n_left > 0) {
        auto session = new_session(task, cfg);
        try {
            auto info = step_limited(session, task, [&](llm::ChatSession& sess) {
                return blocks_.extract_information_list(task, kind, sess);
            });
            InfoListCandidate fresh;
            fresh.id = ++candidate_counter_;
            fresh.text = info.text;
            fresh.origin_block = kind == CircuitType::Sequ ? Block::Sequ : Block::Comb;
            fresh.attempt_index = attempt_counter_ + 1;
            state.pool.push_back(fresh);
            emit("candidate_regenerated", {{"candidate", fresh.id}});
        } catch (const AttemptAbort&) {
            int attempt = ++attempt_counter_;
            state.budget.consume();
            AttemptRecord record;
            record.attempt_index = attempt;
            record.block = Block::Behav;
            record.phase_label = "PhaseII-" + std::to_string(s);
            record.pass_rate = PassRate(0, cached_case_count_.value_or(1));
            CodeSample failed;
            failed.source_block = Block::Behav;
            failed.attempt_index = attempt;
            failed.pass_rate = record.pass_rate;
            failed.compile_ok = false;
            record_sample(state, failed);
            observer_.on_attempt(record);
            emit("attempt", {{"attempt", attempt},
                             {"phase", record.phase_label},
                             {"block", "BEHAV"},
                             {"format_failed", true}});
        }
    }

    auto round_ids = [&] {
        std::vector<int> ids;
        for (const auto& c : state.pool)
            ids.push_back(c.id);
        return ids;
    }();

    for (int id : round_ids) {
        if (state.budget.n_left == 0 || state.solved)
            break;
        auto* cand = find_candidate(state, id);
        if (!cand)
            continue;
        paradigm::InformationList info{cand->text};
        bool fresh_candidate = cand->used_count == 0;
        auto session = new_session(task, cfg);
        int attempt = ++attempt_counter_;

        AttemptRecord record;
        record.attempt_index = attempt;
        record.block = Block::Behav;
        record.phase_label = "PhaseII-" + std::to_string(s);
        record.candidate_id = id;
        record.info_list = cand->text;

        CodeSample sample;
        try {
            auto comps = step_limited(session, task, [&](llm::ChatSession& sess) {
                return blocks_.behav_decompose(task, info, sess);
            });
            for (const auto& [name, desc] : comps.items)
                record.intermediate += name + ": " + desc + "\n";
            sample = step_limited(session, task, [&](llm::ChatSession& sess) {
                return blocks_.behav_generate_module(task, comps, sess, attempt);
            });
        } catch (const AttemptAbort&) {
            state.budget.consume();
            record.pass_rate = PassRate(0, cached_case_count_.value_or(1));
            sample.source_block = Block::Behav;
            sample.attempt_index = attempt;
            sample.info_list_ref = id;
            sample.pass_rate = record.pass_rate;
            sample.compile_ok = false;
            record_sample(state, sample);
            observer_.on_attempt(record);
            emit("attempt", {{"attempt", attempt},
                             {"phase", record.phase_label},
                             {"block", "BEHAV"},
                             {"candidate", id},
                             {"format_failed", true}});
            continue;
        }
        sample.info_list_ref = id;
        record.dut = sample.verilog;

        PassRate pr = simulate_sample(sample, task, state, record, cfg);
        Rat old_score = cand->score;
        cand->score = fresh_candidate ? pr.p() : update_candidate(cand->score, pr.p());
        ++cand->used_count;
        record_sample(state, sample);
        observer_.on_attempt(record);
        emit("attempt", {{"attempt", attempt},
                         {"phase", record.phase_label},
                         {"block", "BEHAV"},
                         {"candidate", id},
                         {"m", pr.m()},
                         {"n", pr.n()},
                         {"p", pr.p().to_string()},
                         {"status", sim::to_string(record.status)}});
        emit("candidate_update", {{"candidate", id},
                                  {"old", old_score.to_string()},
                                  {"new", cand->score.to_string()}});
        if (pr.full_pass())
            state.solved = true;
    }
    sort_pool(state);
}

void WorkflowEngine::run_shortcut(TaskRunState& state, const Task& task, const RunConfig& cfg,
                                  int candidate_id) {
    state.phase = Phase::ShortCut;
    state.shortcut_candidate = candidate_id;
    emit("mode", {{"mode", "ShortCut"}, {"candidate", candidate_id}});

    auto* cand = find_candidate(state, candidate_id);
    CircuitType kind = *state.circuit_type;
    Block block = kind == CircuitType::Sequ ? Block::Sequ : Block::Comb;
    paradigm::InformationList info{cand->text};

    while (state.budget.n_left > 0 && !state.solved) {
        auto session = new_session(task, cfg);
        int attempt = ++attempt_counter_;

        AttemptRecord record;
        record.attempt_index = attempt;
        record.block = block;
        record.phase_label = "ShortCut";
        record.candidate_id = candidate_id;
        record.info_list = cand->text;

        CodeSample sample;
        try {
            sample = generate_specialized(task, info, kind, session, attempt,
                                          &record.intermediate, true, state);
        } catch (const AttemptAbort&) {
            state.budget.consume();
            record.pass_rate = PassRate(0, cached_case_count_.value_or(1));
            sample.source_block = block;
            sample.attempt_index = attempt;
            sample.info_list_ref = candidate_id;
            sample.pass_rate = record.pass_rate;
            sample.compile_ok = false;
            record_sample(state, sample);
            observer_.on_attempt(record);
            emit("attempt", {{"attempt", attempt},
                             {"phase", "ShortCut"},
                             {"block", to_string(block)},
                             {"candidate", candidate_id},
                             {"format_failed", true}});
            continue;
        }
        sample.info_list_ref = candidate_id;
        record.dut = sample.verilog;

        PassRate pr = simulate_sample(sample, task, state, record, cfg);
        ++cand->used_count;
        record_sample(state, sample);
        observer_.on_attempt(record);
        emit("attempt", {{"attempt", attempt},
                         {"phase", "ShortCut"},
                         {"block", to_string(block)},
                         {"candidate", candidate_id},
                         {"m", pr.m()},
                         {"n", pr.n()},
                         {"p", pr.p().to_string()},
                         {"status", sim::to_string(record.status)}});
        if (pr.full_pass())
            state.solved = true;
    }
}

void WorkflowEngine::enter_fail_safe(TaskRunState& state, const Task& task,
                                     const RunConfig& cfg) {
    state.phase = Phase::FailSafe;
    emit("mode", {{"mode", "FailSafe"}, {"n_left", state.budget.n_left}});
    CircuitType kind = state.circuit_type.value_or(CircuitType::Sequ);

    while (state.budget.n_left > 0 && !state.solved) {
        auto session = new_session(task, cfg);
        int attempt = ++attempt_counter_;

        AttemptRecord record;
        record.attempt_index = attempt;
        record.block = Block::Behav;
        record.phase_label = "FailSafe";

        CodeSample sample;
        try {
            auto info = step_limited(session, task, [&](llm::ChatSession& sess) {
                return blocks_.extract_information_list(task, kind, sess);
            });
            record.info_list = info.text;
            auto comps = step_limited(session, task, [&](llm::ChatSession& sess) {
                return blocks_.behav_decompose(task, info, sess);
            });
            for (const auto& [name, desc] : comps.items)
                record.intermediate += name + ": " + desc + "\n";
            sample = step_limited(session, task, [&](llm::ChatSession& sess) {
                return blocks_.behav_generate_module(task, comps, sess, attempt);
            });
        } catch (const AttemptAbort&) {
            state.budget.consume();
            record.pass_rate = PassRate(0, cached_case_count_.value_or(1));
            sample.source_block = Block::Behav;
            sample.attempt_index = attempt;
            sample.pass_rate = record.pass_rate;
            sample.compile_ok = false;
            record_sample(state, sample);
            observer_.on_attempt(record);
            emit("attempt", {{"attempt", attempt},
                             {"phase", "FailSafe"},
                             {"block", "BEHAV"},
                             {"format_failed", true}});
            continue;
        }
        record.dut = sample.verilog;

        PassRate pr = simulate_sample(sample, task, state, record, cfg);
        record_sample(state, sample);
        observer_.on_attempt(record);
        emit("attempt", {{"attempt", attempt},
                         {"phase", "FailSafe"},
                         {"block", "BEHAV"},
                         {"m", pr.m()},
                         {"n", pr.n()},
                         {"p", pr.p().to_string()},
                         {"status", sim::to_string(record.status)}});
        if (pr.full_pass())
            state.solved = true;
    }
}

void WorkflowEngine::finish(TaskRunState& state) {
    state.phase = Phase::Done;
    emit("done", {{"solved", state.solved},
                  {"consumed", state.budget.consumed()},
                  {"n_left", state.budget.n_left}});
}

TaskRunState WorkflowEngine::run_task_baseline(const Task& task, const RunConfig& cfg) {
    cfg.validate();
    task.validate();

    TaskRunState state;
    std::vector<int> schedule(static_cast<std::size_t>(cfg.baseline_samples), 1);
    state.budget = SearchBudget::from_schedule(schedule);
    state.fail.e_f_max = cfg.e_f_max;
    emit("phase", {{"phase", "Baseline"}});

    int compile_retries_left = cfg.compile_failure_consumes_sample ? 0 : cfg.e_f_max;
    int produced = 0;
    while (produced < cfg.baseline_samples) {
        auto session = new_session(task, cfg);
        int attempt = ++attempt_counter_;

        AttemptRecord record;
        record.attempt_index = attempt;
        record.block = Block::Baseline;
        record.phase_label = "Baseline";

        CodeSample sample;
        bool generated = false;
        if (state.fail.e_f <= state.fail.e_f_max) {
            try {
                sample = step_strict(session, task, state, [&](llm::ChatSession& s) {
                    return blocks_.naive_generate(task, s, attempt);
                });
                generated = true;
            } catch (const FailSafeSignal&) {
                // format budget exhausted: remaining samples are zero-rated
            }
        }

        if (!generated) {
            state.budget.consume();
            ++produced;
            sample.source_block = Block::Baseline;
            sample.attempt_index = attempt;
            sample.pass_rate = PassRate(0, cached_case_count_.value_or(1));
            sample.compile_ok = false;
            record.pass_rate = sample.pass_rate;
            record_sample(state, sample);
            observer_.on_attempt(record);
            emit("attempt", {{"attempt", attempt},
                             {"phase", "Baseline"},
                             {"block", "BASELINE"},
                             {"format_failed", true}});
            continue;
        }

        record.dut = sample.verilog;
        PassRate pr = simulate_sample(sample, task, state, record, cfg);
        if (record.status == sim::SimStatus::CompileError && compile_retries_left > 0) {
            // config toggle: a compile failure is retried instead of counted
            --compile_retries_left;
            state.budget.n_left += 1;   // refund; the sample was not produced
            emit("compile_retry", {{"attempt", attempt}});
            continue;
        }
        ++produced;
        record_sample(state, sample);
        observer_.on_attempt(record);
        emit("attempt", {{"attempt", attempt},
                         {"phase", "Baseline"},
                         {"block", "BASELINE"},
                         {"m", pr.m()},
                         {"n", pr.n()},
                         {"p", pr.p().to_string()},
                         {"status", sim::to_string(record.status)}});
        if (pr.full_pass())
            state.solved = true;
    }
    finish(state);
    return state;
}

} // namespace hdlgen::workflow
