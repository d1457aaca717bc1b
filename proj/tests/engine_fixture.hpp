#pragma once

// Shared scripted-LLM and simulator stubs for workflow-level tests. The
// simulated pass rate of each attempt is steered by a marker comment the
// scripted backend embeds in the merged module, so traces are fully
// deterministic without a real simulator.

#include <memory>
#include <string>
#include <vector>

#include "hdlgen/llm_gateway.hpp"
#include "hdlgen/sim_harness.hpp"
#include "hdlgen/workflow_engine.hpp"

namespace fixture {

/// Reads "// Mismatches: X in Y samples" from the DUT source itself.
class MarkerSim : public hdlgen::sim::SimRunner {
public:
    int sims = 0;

    hdlgen::sim::SimOutcome compile_and_run(const std::string& dut_src, const hdlgen::Task&,
                                            const std::filesystem::path&) override {
        using namespace hdlgen::sim;
        ++sims;
        SimOutcome out;
        if (dut_src.find("// COMPILE_ERROR") != std::string::npos) {
            out.status = SimStatus::CompileError;
            return out;
        }
        out.pass_rate = parse_pass_rate(dut_src);
        if (!out.pass_rate) {
            out.status = SimStatus::RuntimeError;
            return out;
        }
        out.status = out.pass_rate->full_pass() ? SimStatus::Passed : SimStatus::PartialFail;
        return out;
    }
};

class CollectObserver : public hdlgen::workflow::RunObserver {
public:
    std::vector<hdlgen::workflow::Event> events;
    std::vector<hdlgen::workflow::AttemptRecord> attempts;

    void on_event(const hdlgen::workflow::Event& e) override { events.push_back(e); }
    void on_attempt(const hdlgen::workflow::AttemptRecord& r) override {
        attempts.push_back(r);
    }

    std::vector<hdlgen::workflow::Event> of_type(const std::string& type) const {
        std::vector<hdlgen::workflow::Event> out;
        for (const auto& e : events)
            if (e.type == type)
                out.push_back(e);
        return out;
    }
};

inline hdlgen::Task toggle_task() {
    hdlgen::Task t;
    t.task_id = "toggle";
    t.spec_text = "Output q toggles on every rising edge of clk.";
    t.module_header = "module top_module(input clk, output q);";
    t.testbench_src = "// tb\n";
    return t;
}

inline std::string marker_module(const std::string& marker) {
    return "module top_module(input clk, output q);\n// Mismatches: " + marker +
           " samples\nassign q = clk;\nendmodule\n";
}

/// Adds a rule that matches the latest message (user turn) only, keeping the
/// rule immune to session history.
inline void add_last_rule(hdlgen::llm::ScriptedBackend& b, std::string needle,
                          std::string response) {
    b.add_fn_rule([needle = std::move(needle), response = std::move(response)](
                      const std::vector<hdlgen::llm::ChatMessage>& m)
                      -> std::optional<std::string> {
        if (m.empty() || m.back().content.find(needle) == std::string::npos)
            return std::nullopt;
        return response;
    });
}

/// Responds with marker_module(markers[i]) on the i-th matching call; the
/// final entry repeats once the list is exhausted.
inline void add_marker_rule(hdlgen::llm::ScriptedBackend& b, std::string needle,
                            std::vector<std::string> markers) {
    auto idx = std::make_shared<std::size_t>(0);
    b.add_fn_rule([needle = std::move(needle), markers = std::move(markers),
                   idx](const std::vector<hdlgen::llm::ChatMessage>& m)
                      -> std::optional<std::string> {
        if (m.empty() || m.back().content.find(needle) == std::string::npos)
            return std::nullopt;
        std::size_t i = std::min(*idx, markers.size() - 1);
        ++*idx;
        return "```verilog\n" + marker_module(markers[i]) + "```";
    });
}

/// Rules for the full SEQU pipeline. Markers drive the pass rate of the
/// phase-I / shortcut merges (sequ_markers) and of BEHAV merges
/// (behav_markers) in call order.
inline void add_sequ_rules(hdlgen::llm::ScriptedBackend& b,
                           std::vector<std::string> sequ_markers,
                           std::vector<std::string> behav_markers = {"0 in 10"}) {
    add_last_rule(b, "sequential or combinational", "SEQUENTIAL");
    add_last_rule(b, "Generate the complete Verilog module",
                  "```verilog\nmodule top_module(input clk, output q);\n"
                  "reg r; always @(posedge clk) r <= ~r;\nassign q = r;\nendmodule\n```");
    add_last_rule(b, "List the relationship", "1. q toggles on each rising edge of clk.");
    add_last_rule(b, "Give the state transition table",
                  "| Current State | Next State | q |\n|---|---|---|\n| S0 | S1 | 0 |\n"
                  "| S1 | S0 | 1 |\n");
    add_last_rule(b, "three-always-block",
                  "```\nalways @(posedge clk) state <= next_state;\n```");
    add_last_rule(b, "Now describe the", "```\nalways @(*) next_state = ~state;\n```");
    add_marker_rule(b, "Combine the always blocks", std::move(sequ_markers));
    add_last_rule(b, "Decompose the design", "1. Toggle Core: flips q each clk edge.");
    add_last_rule(b, "Write the Verilog code for the component",
                  "```\nalways @(posedge clk) q <= ~q;\n```");
    add_marker_rule(b, "Integrate the component codes", std::move(behav_markers));
}

} // namespace fixture
