#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hdlgen/errors.hpp"
#include "hdlgen/paradigm_blocks.hpp"

using namespace hdlgen;
using namespace hdlgen::paradigm;

namespace {

Task counter_task() {
    Task t;
    t.task_id = "counter";
    t.spec_text = "A decade counter that counts 0 through 9.";
    t.module_header = "module top_module(input clk, input reset, output [3:0] q);";
    t.testbench_src = "// tb\n";
    return t;
}

llm::ChatSession fresh_session() { return llm::ChatSession(Rat(1, 2), 4096); }

} // namespace

TEST_CASE("extract_code_fence picks the module-bearing fence") {
    CHECK(extract_code_fence("```verilog\nmodule m; endmodule\n```") ==
          "module m; endmodule");
    // Prefers the fence that contains "module" over an earlier one.
    auto two = extract_code_fence(
        "```\njust a snippet\n```\nthen\n```verilog\nmodule x; endmodule\n```");
    CHECK(two.find("module x") != std::string::npos);
    // No module anywhere: falls back to the first fence.
    CHECK(extract_code_fence("```\nassign y = a;\n```") == "assign y = a;");
    // Bare reply containing module text is accepted as-is.
    auto bare = extract_code_fence("module y; endmodule");
    CHECK(bare.find("module y") != std::string::npos);
    CHECK_THROWS_AS(extract_code_fence("no code at all"), FormatError);
}

TEST_CASE("ports_from_header strips keywords and ranges") {
    auto ports = ports_from_header(
        "module top_module(input clk, input reset, input wire [7:0] d, output reg [3:0] q);");
    CHECK(ports == std::vector<std::string>{"clk", "reset", "d", "q"});
    CHECK(ports_from_header("module m();").empty());
}

TEST_CASE("check_port_coverage demands every port as an identifier") {
    const std::string header = "module m(input a, output b);";
    CHECK_NOTHROW(check_port_coverage("module m(input a, output b); assign b = a; endmodule",
                                      header));
    // "ab" does not count as mentioning "a" and "b".
    CHECK_THROWS_AS(check_port_coverage("module m(); wire ab; endmodule", header), FormatError);
}

TEST_CASE("parse_state_table reads pipe tables with separators and X cells") {
    const std::string reply =
        "Here is the table:\n\n"
        "| Current State | reset | Next State | q |\n"
        "|---|---|---|---|\n"
        "| S0 | 0 | S1 | 0000 |\n"
        "| S0 | 1 | S0 | 0000 |\n"
        "| S9 | X | S0 | 1001 |\n";
    auto t = parse_state_table(reply);
    CHECK(t.columns == std::vector<std::string>{"Current State", "reset", "Next State", "q"});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[2][1] == "X");
    CHECK(t.raw_text.find("| S9 |") != std::string::npos);

    CHECK_THROWS_AS(parse_state_table("no table here"), FormatError);
    CHECK_THROWS_AS(parse_state_table("| a | b |\n| 1 |\n"), FormatError); // ragged
    // Needs a state-ish column.
    CHECK_THROWS_AS(parse_state_table("| foo | bar |\n| 1 | 2 |\n"), FormatError);
}

TEST_CASE("parse_component_list reads numbered name: description entries") {
    auto c = parse_component_list(
        "1. Counter Core: increments q each clock.\n"
        "   Wraps from 9 to 0.\n"
        "2) Reset Logic: synchronous clear to zero.\n");
    REQUIRE(c.items.size() == 2);
    CHECK(c.items[0].first == "Counter Core");
    CHECK(c.items[0].second.find("Wraps from 9 to 0") != std::string::npos);
    CHECK(c.items[1].first == "Reset Logic");
    CHECK_THROWS_AS(parse_component_list("no list"), FormatError);
    CHECK_THROWS_AS(parse_component_list("1. A: x\n2. A: y\n"), FormatError); // duplicate
}

TEST_CASE("extract_json_object finds the balanced object in prose") {
    auto j = extract_json_object("Sure: {\"a\": [1, {\"b\": 2}], \"s\": \"}{\"} done");
    CHECK(j == R"({"a": [1, {"b": 2}], "s": "}{"})");
    CHECK_THROWS_AS(extract_json_object("no braces"), FormatError);
    CHECK_THROWS_AS(extract_json_object("{unclosed"), FormatError);
}

TEST_CASE("PromptTemplates render and directory overrides") {
    auto tpl = PromptTemplates::defaults();
    auto naive = tpl.render("naive", {{"spec", "SPEC"}, {"header", "HDR"}});
    CHECK(naive.find("SPEC") != std::string::npos);
    CHECK(naive.find("HDR") != std::string::npos);
    CHECK(tpl.raw("info_comb").find("Do not write the codes!") != std::string::npos);
    CHECK(tpl.raw("state_table").find("state transition table") != std::string::npos);
    CHECK_THROWS_AS(tpl.raw("nonexistent"), ValueError);

    auto dir = std::filesystem::temp_directory_path() / "hdlgen_tpl";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "naive.txt") << "custom {{spec}}";
    tpl.load_directory(dir);
    CHECK(tpl.render("naive", {{"spec", "S"}}) == "custom S");
    CHECK(tpl.raw("classify").find("one word") != std::string::npos); // untouched
}

TEST_CASE("ParadigmBlocks: naive generation and classification") {
    llm::ScriptedBackend backend;
    // Rule order matters: the classify rule must come first because the
    // session history still contains the naive prompt when classifying.
    backend.add_rule("sequential or combinational",
                     "This is SEQUENTIAL logic because of clk.");
    backend.add_rule("Generate the complete Verilog module",
                     "```verilog\nmodule top_module(); endmodule\n```");
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    auto naive = blocks.naive_generate(task, session, 0);
    CHECK(naive.verilog.find("module top_module") != std::string::npos);
    CHECK(naive.source_block == Block::Baseline);
    CHECK(blocks.classify_circuit_type(task, naive, session) == CircuitType::Sequ);
}

TEST_CASE("classification re-asks once on an unusable reply") {
    llm::ScriptedBackend backend;
    backend.add_rule("could not be parsed", "COMBINATIONAL");
    backend.add_rule("sequential or combinational", "maybe?");
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    CodeSample naive;
    naive.verilog = "module m; endmodule";
    CHECK(blocks.classify_circuit_type(task, naive, session) == CircuitType::Comb);
}

TEST_CASE("information list extraction validates content") {
    llm::ScriptedBackend backend;
    backend.add_rule("List the relationship",
                     "1. q increments on each rising clk edge.\n2. reset clears q.\n");
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    auto info = blocks.extract_information_list(task, CircuitType::Sequ, session);
    CHECK(info.text.find("rising clk edge") != std::string::npos);

    // A list that never mentions any port fails even after the re-ask.
    llm::ScriptedBackend bad;
    bad.add_rule("List the relationship", "something vague with no signals");
    ParadigmBlocks blocks2(bad, PromptTemplates::defaults());
    auto s2 = fresh_session();
    s2.set_system("sys");
    CHECK_THROWS_AS(blocks2.extract_information_list(task, CircuitType::Sequ, s2), FormatError);
}

TEST_CASE("sequential pipeline: three always blocks then a merge") {
    llm::ScriptedBackend backend;
    // Later pipeline steps first: the session accumulates earlier prompts,
    // so the most specific (latest) trigger must win.
    backend.add_rule("Combine the always blocks",
                     "```verilog\nmodule top_module(input clk, input reset, output [3:0] q);\n"
                     "reg [3:0] state, next_state;\n"
                     "always @(posedge clk) if (reset) state <= 0; else state <= next_state;\n"
                     "always @(*) next_state = state == 9 ? 0 : state + 1;\n"
                     "assign q = state;\nendmodule\n```");
    backend.add_rule("output logic", "```\nalways @(*) q = state;\n```");
    backend.add_rule("next-state logic", "```\nalways @(*) next_state = state + 1;\n```");
    backend.add_rule("state register",
                     "```\nalways @(posedge clk) state <= next_state;\n```");
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    StateTransitionTable table;
    table.raw_text = "| Current State | Next State |\n| S0 | S1 |\n";
    auto sample = blocks.sequ_generate_module(task, table, session, 3);
    CHECK(sample.source_block == Block::Sequ);
    CHECK(sample.attempt_index == 3);
    CHECK(sample.verilog.find("endmodule") != std::string::npos);
    // Three always prompts + one merge prompt.
    CHECK(backend.calls().size() == 4);
}

TEST_CASE("merge result missing a port fails after the clarification") {
    llm::ScriptedBackend backend;
    backend.add_rule("always", "```\nalways @(*) x = 1;\n```");
    backend.add_rule("Combine the always blocks",
                     "```\nmodule top_module(input clk); endmodule\n```"); // q, reset missing
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    StateTransitionTable table;
    table.raw_text = "| Current State |\n| S0 |\n";
    CHECK_THROWS_AS(blocks.sequ_generate_module(task, table, session), FormatError);
}

TEST_CASE("behavioral decomposition falls back to prose on re-ask") {
    llm::ScriptedBackend backend;
    backend.add_rule("could not be parsed", "It is one counter that wraps at nine.");
    backend.add_rule("Decompose the design", "I would rather chat about counters.");
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    InformationList info{"1. q counts with clk."};
    auto comps = blocks.behav_decompose(task, info, session);
    REQUIRE(comps.items.size() == 1);
    CHECK(comps.items[0].first == "whole module");
    CHECK(comps.items[0].second.find("wraps at nine") != std::string::npos);
}

TEST_CASE("combinational SOP step embeds the expressions") {
    llm::ScriptedBackend backend;
    backend.add_fn_rule([](const std::vector<llm::ChatMessage>& m)
                            -> std::optional<std::string> {
        if (m.back().content.find("(a & ~b)") == std::string::npos)
            return std::nullopt;
        return "```verilog\nmodule top_module(input clk, input reset, output [3:0] q);\n"
               "assign q = {3'b0, clk & ~reset};\nendmodule\n```";
    });
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    auto sample = blocks.comb_generate_from_sop(task, "q = (a & ~b)\n", session, 1);
    CHECK(sample.source_block == Block::Comb);
    CHECK(sample.verilog.find("assign q") != std::string::npos);
}

TEST_CASE("truth-table step parses a JSON reply wrapped in prose") {
    llm::ScriptedBackend backend;
    backend.add_rule("truth table between the outputs and inputs",
                     "Here you go:\n{\"table\": [[0,0,0],[0,1,1],[1,0,1],[1,1,1]],"
                     "\"inputs\": [\"a\",\"b\"], \"outputs\": [\"q\"]}");
    ParadigmBlocks blocks(backend, PromptTemplates::defaults());
    auto task = counter_task();
    auto session = fresh_session();
    session.set_system("sys");
    auto table = blocks.comb_truth_table(task, InformationList{"info"}, session);
    CHECK(table.inputs == std::vector<std::string>{"a", "b"});
    CHECK(table.rows.size() == 4);
}
