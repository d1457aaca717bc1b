#include <doctest.h>

#include <filesystem>
#include <string>

#include "engine_fixture.hpp"
#include "hdlgen/errors.hpp"
#include "hdlgen/workflow_engine.hpp"

using namespace hdlgen;
using namespace hdlgen::workflow;
using fixture::CollectObserver;
using fixture::MarkerSim;

namespace {

std::filesystem::path temp_root(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("hdlgen_wf_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

struct Rig {
    llm::ScriptedBackend backend;
    paradigm::ParadigmBlocks blocks{backend, paradigm::PromptTemplates::defaults()};
    MarkerSim sim;
    CollectObserver observer;
    WorkflowEngine engine;

    explicit Rig(const std::string& tag)
        : engine(backend, blocks, sim, observer, temp_root(tag)) {}
};

} // namespace

TEST_CASE("update_candidate averages last score and new pass rate") {
    CHECK(update_candidate(Rat(9, 10), Rat(7, 10)) == Rat(4, 5));
    CHECK(update_candidate(Rat(3, 5), Rat(4, 5)) == Rat(7, 10));
    CHECK(update_candidate(Rat(0, 1), Rat(1, 1)) == Rat(1, 2));
    CHECK_THROWS_AS(update_candidate(Rat(3, 2), Rat(1, 2)), ValueError);
    CHECK_THROWS_AS(update_candidate(Rat(1, 2), Rat(-1, 2)), ValueError);
}

TEST_CASE("should_shortcut boundaries: w <= p < 1") {
    Rat w(19, 20);
    CHECK(should_shortcut(Rat(19, 20), w));
    CHECK(should_shortcut(Rat(99, 100), w));
    CHECK_FALSE(should_shortcut(Rat(949, 1000), w));
    CHECK_FALSE(should_shortcut(Rat(1, 1), w)); // a full pass ends the task instead
}

TEST_CASE("register_format_error flips to fail-safe only past the limit") {
    FailState f;
    f.e_f_max = 10;
    for (int i = 1; i <= 10; ++i) {
        CHECK(register_format_error(f) == FormatErrorAction::Retry);
        CHECK(f.e_f == i);
    }
    CHECK(register_format_error(f) == FormatErrorAction::EnterFailSafe);
    CHECK(f.e_f == 11);
}

TEST_CASE("engine trace: never-passing task spends the whole 7+2+1 budget") {
    Rig rig("allfail");
    fixture::add_sequ_rules(rig.backend,
                            {"5 in 10", "5 in 10", "5 in 10", "5 in 10", "5 in 10",
                             "5 in 10", "5 in 10"},
                            {"6 in 10", "6 in 10", "6 in 10"});
    auto state = rig.engine.run_task(fixture::toggle_task(), RunConfig{});
    CHECK_FALSE(state.solved);
    CHECK(state.budget.n_left == 0);
    CHECK(state.budget.consumed() == 10);
    CHECK(rig.sim.sims == 10);
    CHECK(rig.observer.attempts.size() == 10);
    // 7 phase-I attempts, then 2 + 1 phase-II BEHAV attempts.
    int phase1 = 0, round2 = 0, round3 = 0;
    for (const auto& a : rig.observer.attempts) {
        if (a.phase_label == "PhaseI")
            ++phase1;
        if (a.phase_label == "PhaseII-2") {
            ++round2;
            CHECK(a.block == Block::Behav);
        }
        if (a.phase_label == "PhaseII-3")
            ++round3;
    }
    CHECK(phase1 == 7);
    CHECK(round2 == 2);
    CHECK(round3 == 1);
    REQUIRE(state.best.has_value());
    CHECK(state.best->pass_rate == PassRate(5, 10));
}

TEST_CASE("engine trace: full pass on attempt 3 stops the search") {
    Rig rig("earlypass");
    fixture::add_sequ_rules(rig.backend, {"5 in 10", "3 in 10", "0 in 10"});
    auto state = rig.engine.run_task(fixture::toggle_task(), RunConfig{});
    CHECK(state.solved);
    CHECK(rig.sim.sims == 3);
    CHECK(state.budget.consumed() == 3);
    CHECK(state.budget.n_left == 7);
    CHECK(rig.observer.attempts.size() == 3);
    CHECK(rig.observer.attempts.back().status == sim::SimStatus::Passed);
}

TEST_CASE("engine trace: 11 format errors trigger fail-safe for all samples") {
    Rig rig("failsafe");
    // The extraction step yields an unusable reply (no port mentioned) for
    // the first 22 calls: 11 format errors of two asks each (original +
    // clarification). From call 23 on it cooperates, which is what the
    // fail-safe BEHAV loop sees.
    auto calls = std::make_shared<int>(0);
    rig.backend.add_fn_rule([calls](const std::vector<llm::ChatMessage>& m)
                                -> std::optional<std::string> {
        if (m.empty() || m.back().content.find("List the relationship") == std::string::npos)
            return std::nullopt;
        return ++*calls <= 22 ? "nothing of note"
                              : "1. q toggles on each rising edge of clk.";
    });
    fixture::add_sequ_rules(rig.backend, {"5 in 10"}, {"9 in 10"});
    auto state = rig.engine.run_task(fixture::toggle_task(), RunConfig{});
    CHECK(state.phase == Phase::Done);
    CHECK_FALSE(state.solved);
    CHECK(state.fail.e_f == 11);
    CHECK(rig.observer.of_type("format_error").size() == 11);
    auto modes = rig.observer.of_type("mode");
    REQUIRE(modes.size() == 1);
    CHECK(modes[0].data.at("mode") == "FailSafe");
    // All 10 samples spent as BEHAV attempts, each from a freshly
    // regenerated information list.
    CHECK(rig.sim.sims == 10);
    int failsafe_attempts = 0;
    for (const auto& a : rig.observer.attempts)
        if (a.phase_label == "FailSafe") {
            ++failsafe_attempts;
            CHECK(a.block == Block::Behav);
            CHECK(a.info_list.find("q toggles") != std::string::npos);
        }
    CHECK(failsafe_attempts == 10);
}

TEST_CASE("engine trace: p = 19/20 on attempt 2 enters short-cut mode") {
    Rig rig("shortcut");
    fixture::add_sequ_rules(rig.backend,
                            {"5 in 10", "1 in 20", "2 in 20", "2 in 20", "0 in 20"});
    auto state = rig.engine.run_task(fixture::toggle_task(), RunConfig{});
    CHECK(state.solved);
    CHECK(state.phase == Phase::Done);
    REQUIRE(state.shortcut_candidate.has_value());

    auto modes = rig.observer.of_type("mode");
    REQUIRE(modes.size() == 1);
    CHECK(modes[0].data.at("mode") == "ShortCut");
    int pinned = modes[0].data.at("candidate");
    CHECK(pinned == *state.shortcut_candidate);

    // Attempts 3..5 rerun the pinned candidate's specialized block.
    CHECK(rig.observer.attempts.size() == 5);
    for (std::size_t i = 2; i < rig.observer.attempts.size(); ++i) {
        CHECK(rig.observer.attempts[i].phase_label == "ShortCut");
        CHECK(rig.observer.attempts[i].candidate_id == pinned);
        CHECK(rig.observer.attempts[i].block == Block::Sequ);
    }

    // Short-cut mode pins the information list: after attempt 2 no further
    // extraction prompts are sent.
    int extraction_calls = 0;
    for (const auto& call : rig.backend.calls()) {
        auto last_user = call.rfind("user: ");
        if (last_user != std::string::npos &&
            call.find("List the relationship", last_user) != std::string::npos)
            ++extraction_calls;
    }
    CHECK(extraction_calls == 2);
}

TEST_CASE("engine trace: candidate forwarding and score averaging") {
    Rig rig("algebra");
    // Phase-I pass rates 0.2 0.9 0.4 0.1 0.6 0.3 0.5; phase-II new rates
    // 0.7 then 0.8, one more 0.6 in round 3.
    fixture::add_sequ_rules(rig.backend,
                            {"8 in 10", "1 in 10", "6 in 10", "9 in 10", "4 in 10",
                             "7 in 10", "5 in 10"},
                            {"3 in 10", "2 in 10", "4 in 10"});
    auto state = rig.engine.run_task(fixture::toggle_task(), RunConfig{});
    CHECK_FALSE(state.solved);
    CHECK(state.budget.consumed() == 10);

    // Top-2 forwarded: candidate 2 (p=0.9) and candidate 5 (p=0.6).
    auto fwd = rig.observer.of_type("candidate_forward");
    REQUIRE(fwd.size() == 1);
    CHECK(fwd[0].data.at("kept") == std::vector<int>{2, 5});

    // Round 2 updates: avg(0.9, 0.7) = 0.8 and avg(0.6, 0.8) = 0.7.
    auto updates = rig.observer.of_type("candidate_update");
    REQUIRE(updates.size() == 3);
    CHECK(updates[0].data.at("candidate") == 2);
    CHECK(updates[0].data.at("old") == "9/10");
    CHECK(updates[0].data.at("new") == "4/5");
    CHECK(updates[1].data.at("candidate") == 5);
    CHECK(updates[1].data.at("old") == "3/5");
    CHECK(updates[1].data.at("new") == "7/10");

    // Round 3 keeps only candidate 2 (0.8 > 0.7) and averages in 0.6.
    auto discards = rig.observer.of_type("candidate_discard");
    REQUIRE(discards.size() == 1);
    CHECK(discards[0].data.at("discarded") == std::vector<int>{5});
    CHECK(updates[2].data.at("candidate") == 2);
    CHECK(updates[2].data.at("new") == "7/10"); // avg(4/5, 3/5)
}

TEST_CASE("baseline run: exactly n naive samples, no paradigm prompts") {
    Rig rig("baseline");
    fixture::add_marker_rule(rig.backend, "Generate the complete Verilog module",
                             {"5 in 10", "5 in 10", "5 in 10", "5 in 10", "5 in 10",
                              "5 in 10", "5 in 10", "5 in 10", "5 in 10", "0 in 10"});
    auto state = rig.engine.run_task_baseline(fixture::toggle_task(), RunConfig{});
    CHECK(state.solved); // the last sample passed, but all 10 are produced
    CHECK(state.samples.size() == 10);
    CHECK(rig.sim.sims == 10);
    for (const auto& call : rig.backend.calls()) {
        CHECK(call.find("List the relationship") == std::string::npos);
        CHECK(call.find("state transition table") == std::string::npos);
        CHECK(call.find("Decompose the design") == std::string::npos);
    }
}

TEST_CASE("baseline compile-failure toggle: off refunds and retries") {
    Rig rig("commodes");
    auto idx = std::make_shared<int>(0);
    rig.backend.add_fn_rule([idx](const std::vector<llm::ChatMessage>& m)
                                -> std::optional<std::string> {
        if (m.empty() ||
            m.back().content.find("Generate the complete Verilog module") == std::string::npos)
            return std::nullopt;
        if (++*idx == 1)
            return "```verilog\nmodule top_module(input clk, output q);\n"
                   "// COMPILE_ERROR\nendmodule\n```";
        return "```verilog\n" + fixture::marker_module("5 in 10") + "```";
    });
    RunConfig cfg;
    cfg.compile_failure_consumes_sample = false;
    auto state = rig.engine.run_task_baseline(fixture::toggle_task(), cfg);
    CHECK(state.samples.size() == 10);
    CHECK(rig.sim.sims == 11); // the compile failure was simulated but refunded
    CHECK(rig.observer.of_type("compile_retry").size() == 1);

    // With the default toggle the failure counts as a zero-scoring sample.
    Rig rig2("commodes2");
    auto idx2 = std::make_shared<int>(0);
    rig2.backend.add_fn_rule([idx2](const std::vector<llm::ChatMessage>& m)
                                 -> std::optional<std::string> {
        if (m.empty() ||
            m.back().content.find("Generate the complete Verilog module") == std::string::npos)
            return std::nullopt;
        if (++*idx2 == 1)
            return "```verilog\nmodule top_module(input clk, output q);\n"
                   "// COMPILE_ERROR\nendmodule\n```";
        return "```verilog\n" + fixture::marker_module("5 in 10") + "```";
    });
    auto state2 = rig2.engine.run_task_baseline(fixture::toggle_task(), RunConfig{});
    CHECK(state2.samples.size() == 10);
    CHECK(rig2.sim.sims == 10);
    CHECK_FALSE(state2.samples[0].compile_ok);
}
