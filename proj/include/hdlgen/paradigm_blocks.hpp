#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hdlgen/domain.hpp"
#include "hdlgen/llm_gateway.hpp"
#include "hdlgen/logic_min.hpp"

namespace hdlgen::paradigm {

/// Verbatim LLM output of the extraction step.
struct InformationList {
    std::string text;
};

/// Pipe table parsed from the LLM reply; "X" cells are don't-cares.
struct StateTransitionTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::string raw_text;
};

struct ComponentList {
    std::vector<std::pair<std::string, std::string>> items;   // name, behavior description
};

/// Plain-text prompt templates with {{spec}}, {{info_list}}, {{table}},
/// {{sop}}, {{component}}, {{code}}, {{header}} placeholders. Built-in set
/// mirrors the published prompt wording; a directory of .txt files with the
/// same names overrides individual templates.
class PromptTemplates {
public:
    static PromptTemplates defaults();
    void load_directory(const std::filesystem::path& dir);

    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& vars) const;
    const std::string& raw(const std::string& name) const;

private:
    std::map<std::string, std::string> by_name_;
};

/// First fenced block containing "module", else first fenced block, else the
/// reply itself when it contains "module". Throws FormatError(NoCode).
std::string extract_code_fence(const std::string& reply);

/// Identifiers declared as ports in a Verilog module header.
std::vector<std::string> ports_from_header(const std::string& module_header);

/// Every port name must occur as an identifier token in the code.
void check_port_coverage(const std::string& code, const std::string& module_header);

/// The classifier and the three paradigm blocks as explicit step pipelines.
/// Each step sends one prompt (with a single clarification re-ask) and
/// extracts a structured artifact, or throws FormatError.
class ParadigmBlocks {
public:
    ParadigmBlocks(llm::Backend& backend, PromptTemplates templates)
        : backend_(backend), templates_(std::move(templates)) {}

    const PromptTemplates& templates() const { return templates_; }

    CodeSample naive_generate(const Task& task, llm::ChatSession& session,
                              int attempt_index = 0);
    CircuitType classify_circuit_type(const Task& task, const CodeSample& naive_code,
                                      llm::ChatSession& session);
    InformationList extract_information_list(const Task& task, CircuitType kind,
                                             llm::ChatSession& session);
    logic_min::TruthTable comb_truth_table(const Task& task, const InformationList& info,
                                           llm::ChatSession& session);
    StateTransitionTable sequ_state_table(const Task& task, const InformationList& info,
                                          llm::ChatSession& session);
    CodeSample sequ_generate_module(const Task& task, const StateTransitionTable& table,
                                    llm::ChatSession& session, int attempt_index = 0);
    CodeSample comb_generate_from_sop(const Task& task, const std::string& sop_rendering,
                                      llm::ChatSession& session, int attempt_index = 0);
    ComponentList behav_decompose(const Task& task, const InformationList& info,
                                  llm::ChatSession& session);
    CodeSample behav_generate_module(const Task& task, const ComponentList& comps,
                                     llm::ChatSession& session, int attempt_index = 0);

private:
    template <typename Parse>
    auto ask(llm::ChatSession& session, const std::string& prompt, Parse parse);

    llm::Backend& backend_;
    PromptTemplates templates_;
};

/// Parses the reply's pipe table. Exposed for tests.
StateTransitionTable parse_state_table(const std::string& reply);

/// Parses a numbered "1. Name: description" list. Exposed for tests.
ComponentList parse_component_list(const std::string& reply);

/// Extracts the first balanced JSON object from a prose-wrapped reply.
std::string extract_json_object(const std::string& reply);

} // namespace hdlgen::paradigm
