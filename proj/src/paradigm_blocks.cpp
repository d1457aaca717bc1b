#include "hdlgen/paradigm_blocks.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace hdlgen::paradigm {

namespace {

const char* kClarify =
    "The previous reply could not be parsed. Answer again, strictly in the requested format.\n\n";

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::set<std::string> identifier_tokens(const std::string& text) {
    std::set<std::string> ids;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_') {
            std::size_t j = i;
            while (j < text.size() && is_ident_char(text[j]))
                ++j;
            ids.insert(text.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return ids;
}

const std::map<std::string, std::string>& default_templates() {
    static const std::map<std::string, std::string> templates = {
        {"naive",
         "{{spec}}\n\nModule interface:\n{{header}}\n\n"
         "Generate the complete Verilog module for this specification.\n"},
        {"classify",
         "Based on the specification and the generated code above, is this circuit "
         "sequential or combinational logic? Answer with one word: SEQUENTIAL or "
         "COMBINATIONAL.\n"},
        {"info_sequ",
         "{{spec}}\n\nModule interface:\n{{header}}\n\n"
         "List the relationship between the inputs and outputs one by one with details "
         "as many as possible. Do not simplify! Keep everything as the same in the task. "
         "If it has reset and clk, list the timing requirements of reset and clk.\n"},
        {"info_comb",
         "{{spec}}\n\nModule interface:\n{{header}}\n\n"
         "List the relationship between the inputs and outputs one by one with details "
         "as many as possible. Do not simplify! Keep everything as the same in the task. "
         "Do not write the codes! If it has reset and clk, list the timing requirements "
         "of reset and clk.\n"},
        {"state_table",
         "Information List:\n{{info_list}}\n\n"
         "Give the state transition table with details as many as possible. Do not "
         "simplify! Keep everything as the same in the task. Do not give the verilog "
         "codes.\n"},
        {"truth_table",
         "Information List:\n{{info_list}}\n\n"
         "Give the truth table between the outputs and inputs in json. Do not simplify! "
         "Keep everything as the same in the task. Do not give the verilog codes. Use "
         "the json format like this example:\n"
         "{\n"
         "    \"table\": [\n"
         "    [0,0,0],\n"
         "    [0,1,1],\n"
         "    [1,0,1],\n"
         "    [1,1,1]\n"
         "    ],\n"
         "    \"inputs\": [\"a[1]\",\"a[2]\"],\n"
         "    \"outputs\": [\"x\"],\n"
         "    \"header_inputs\": [\"a[2]\",\"a[1]\"],\n"
         "    \"header_outputs\": [\"x\"]\n"
         "}\n"},
        {"always_first",
         "State transition table:\n{{table}}\n\n"
         "Using the three-always-block method, first describe the {{component}} block "
         "for this design, then give its Verilog always block.\n"},
        {"always_next",
         "Now describe the {{component}} block for this design, then give its Verilog "
         "always block.\n"},
        {"merge_always",
         "Combine the always blocks above into one complete Verilog module. Use this "
         "module header:\n{{header}}\n"},
        {"sop_module",
         "The simplified sum-of-products expressions for the outputs are:\n{{sop}}\n\n"
         "Generate the Verilog code based on the SOP expressions above. Use this module "
         "header:\n{{header}}\n"},
        {"behav_decompose",
         "Information List:\n{{info_list}}\n\n"
         "Decompose the design into behavioral description components. Reply with a "
         "numbered list where each entry has the form '1. Component Name: behavior "
         "description'. Do not give the verilog codes.\n"},
        {"behav_component",
         "Write the Verilog code for the component \"{{component}}\" described as: "
         "{{description}}\n"},
        {"behav_merge",
         "Integrate the component codes above into one complete Verilog module. Use "
         "this module header:\n{{header}}\n"},
    };
    return templates;
}

} // namespace

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.by_name_ = default_templates();
    return t;
}

void PromptTemplates::load_directory(const std::filesystem::path& dir) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt")
            continue;
        std::ifstream is(entry.path(), std::ios::binary);
        std::ostringstream os;
        os << is.rdbuf();
        by_name_[entry.path().stem().string()] = os.str();
    }
}

std::string PromptTemplates::render(const std::string& name,
                                    const std::map<std::string, std::string>& vars) const {
    std::string out = raw(name);
    for (const auto& [key, value] : vars) {
        std::string placeholder = "{{" + key + "}}";
        for (std::size_t pos; (pos = out.find(placeholder)) != std::string::npos;)
            out.replace(pos, placeholder.size(), value);
    }
    return out;
}

const std::string& PromptTemplates::raw(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end())
        throw ValueError("unknown prompt template: " + name);
    return it->second;
}

std::string extract_code_fence(const std::string& reply) {
    std::vector<std::string> fences;
    std::size_t pos = 0;
    while ((pos = reply.find("```", pos)) != std::string::npos) {
        std::size_t body = pos + 3;
        // skip the language tag line
        std::size_t nl = reply.find('\n', body);
        std::size_t close = reply.find("```", body);
        if (close == std::string::npos)
            break;
        std::size_t start = (nl != std::string::npos && nl < close) ? nl + 1 : body;
        fences.push_back(trim(reply.substr(start, close - start)));
        pos = close + 3;
    }
    for (const auto& f : fences)
        if (f.find("module") != std::string::npos)
            return f;
    if (!fences.empty())
        return fences.front();
    if (reply.find("module") != std::string::npos)
        return trim(reply);
    throw FormatError("no Verilog code in reply", FormatFault::NoCode);
}

std::vector<std::string> ports_from_header(const std::string& module_header) {
    auto open = module_header.find('(');
    auto close = module_header.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close <= open)
        return {};
    std::string inner = module_header.substr(open + 1, close - open - 1);

    static const std::set<std::string> keywords{"input",  "output", "inout", "wire",
                                               "reg",    "logic",  "signed", "unsigned",
                                               "bit",    "integer"};
    std::vector<std::string> ports;
    std::stringstream ss(inner);
    std::string segment;
    while (std::getline(ss, segment, ',')) {
        // drop bracketed ranges
        std::string cleaned;
        int depth = 0;
        for (char c : segment) {
            if (c == '[')
                ++depth;
            else if (c == ']')
                --depth;
            else if (depth == 0)
                cleaned += c;
        }
        std::string name;
        std::size_t i = 0;
        while (i < cleaned.size()) {
            if (std::isalpha(static_cast<unsigned char>(cleaned[i])) || cleaned[i] == '_') {
                std::size_t j = i;
                while (j < cleaned.size() && is_ident_char(cleaned[j]))
                    ++j;
                std::string tok = cleaned.substr(i, j - i);
                if (!keywords.count(tok))
                    name = tok;
                i = j;
            } else {
                ++i;
            }
        }
        if (!name.empty())
            ports.push_back(name);
    }
    return ports;
}

void check_port_coverage(const std::string& code, const std::string& module_header) {
    auto ids = identifier_tokens(code);
    for (const auto& port : ports_from_header(module_header))
        if (!ids.count(port))
            throw FormatError("generated module omits port: " + port,
                              FormatFault::MissingPort);
}

StateTransitionTable parse_state_table(const std::string& reply) {
    StateTransitionTable table;
    table.raw_text = reply;

    std::stringstream ss(reply);
    std::string line;
    std::vector<std::vector<std::string>> pipe_rows;
    while (std::getline(ss, line)) {
        std::string t = trim(line);
        if (t.empty() || t.front() != '|')
            continue;
        std::vector<std::string> cells;
        std::size_t start = 1;
        for (std::size_t i = 1; i <= t.size(); ++i) {
            if (i == t.size() || t[i] == '|') {
                cells.push_back(trim(t.substr(start, i - start)));
                start = i + 1;
            }
        }
        while (!cells.empty() && cells.back().empty())
            cells.pop_back();
        bool separator = !cells.empty() &&
                         std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
                             return !c.empty() &&
                                    c.find_first_not_of("-: ") == std::string::npos;
                         });
        if (separator || cells.empty())
            continue;
        pipe_rows.push_back(std::move(cells));
    }

    if (pipe_rows.empty())
        throw FormatError("no pipe table in reply", FormatFault::Generic);
    table.columns = pipe_rows.front();
    for (std::size_t r = 1; r < pipe_rows.size(); ++r) {
        if (pipe_rows[r].size() != table.columns.size())
            throw FormatError("ragged state-table row", FormatFault::RaggedRow);
        table.rows.push_back(pipe_rows[r]);
    }
    if (table.rows.empty())
        throw FormatError("state table has headers only", FormatFault::Generic);
    bool has_state_col = std::any_of(table.columns.begin(), table.columns.end(),
                                     [](const std::string& c) {
                                         return lower(c).find("state") != std::string::npos;
                                     });
    if (!has_state_col)
        throw FormatError("state table lacks a state column", FormatFault::Generic);
    return table;
}

ComponentList parse_component_list(const std::string& reply) {
    ComponentList comps;
    static const std::regex item_re(R"(^\s*\d+[.)]\s*([^:]+?)\s*:\s*(.*)$)");
    std::stringstream ss(reply);
    std::string line;
    std::set<std::string> names;
    while (std::getline(ss, line)) {
        std::smatch m;
        if (std::regex_match(line, m, item_re)) {
            std::string name = trim(m[1].str());
            if (!names.insert(name).second)
                throw FormatError("duplicate component name: " + name,
                                  FormatFault::DuplicateName);
            comps.items.emplace_back(name, trim(m[2].str()));
        } else if (!comps.items.empty() && !trim(line).empty()) {
            comps.items.back().second += " " + trim(line);
        }
    }
    if (comps.items.empty())
        throw FormatError("no enumerated components in reply", FormatFault::Generic);
    return comps;
}

std::string extract_json_object(const std::string& reply) {
    // prefer a fenced block if one holds an object
    std::string search = reply;
    auto open = search.find('{');
    if (open == std::string::npos)
        throw FormatError("no JSON object in reply", FormatFault::MissingField);
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < search.size(); ++i) {
        char c = search[i];
        if (in_string) {
            if (c == '\\')
                ++i;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"')
            in_string = true;
        else if (c == '{')
            ++depth;
        else if (c == '}') {
            --depth;
            if (depth == 0)
                return search.substr(open, i - open + 1);
        }
    }
    throw FormatError("unbalanced JSON object in reply", FormatFault::MissingField);
}

template <typename Parse>
auto ParadigmBlocks::ask(llm::ChatSession& session, const std::string& prompt, Parse parse) {
    std::string reply = llm::complete(session, backend_, prompt);
    try {
        return parse(reply);
    } catch (const FormatError&) {
        std::string retry = llm::complete(session, backend_, kClarify + prompt);
        return parse(retry);
    }
}

CodeSample ParadigmBlocks::naive_generate(const Task& task, llm::ChatSession& session,
                                          int attempt_index) {
    std::string prompt = templates_.render(
        "naive", {{"spec", task.spec_text}, {"header", task.module_header}});
    std::string code = ask(session, prompt,
                           [](const std::string& reply) { return extract_code_fence(reply); });
    CodeSample sample;
    sample.verilog = code;
    sample.source_block = Block::Baseline;
    sample.attempt_index = attempt_index;
    return sample;
}

CircuitType ParadigmBlocks::classify_circuit_type(const Task& task, const CodeSample& naive_code,
                                                  llm::ChatSession& session) {
    if (naive_code.verilog.empty())
        throw ValueError("classification requires a naive code sample");
    (void)task;
    std::string prompt = templates_.render("classify", {});
    return ask(session, prompt, [](const std::string& reply) {
        std::string low = lower(reply);
        auto seq = low.find("sequ");
        auto comb = low.find("comb");
        if (seq == std::string::npos && comb == std::string::npos)
            throw FormatError("reply names neither SEQUENTIAL nor COMBINATIONAL");
        if (seq == std::string::npos)
            return CircuitType::Comb;
        if (comb == std::string::npos)
            return CircuitType::Sequ;
        return seq < comb ? CircuitType::Sequ : CircuitType::Comb;
    });
}

InformationList ParadigmBlocks::extract_information_list(const Task& task, CircuitType kind,
                                                         llm::ChatSession& session) {
    std::string tpl = kind == CircuitType::Sequ ? "info_sequ" : "info_comb";
    std::string prompt = templates_.render(
        tpl, {{"spec", task.spec_text}, {"header", task.module_header}});
    auto ports = ports_from_header(task.module_header);
    return ask(session, prompt, [&ports](const std::string& reply) {
        if (trim(reply).empty())
            throw FormatError("empty information list");
        auto ids = identifier_tokens(reply);
        bool mentions_port =
            ports.empty() || std::any_of(ports.begin(), ports.end(),
                                         [&ids](const std::string& p) { return ids.count(p); });
        if (!mentions_port)
            throw FormatError("information list mentions no module port");
        return InformationList{reply};
    });
}

logic_min::TruthTable ParadigmBlocks::comb_truth_table(const Task& task,
                                                       const InformationList& info,
                                                       llm::ChatSession& session) {
    (void)task;
    std::string prompt = templates_.render("truth_table", {{"info_list", info.text}});
    return ask(session, prompt, [](const std::string& reply) {
        return logic_min::parse_truth_table(extract_json_object(reply));
    });
}

StateTransitionTable ParadigmBlocks::sequ_state_table(const Task& task,
                                                      const InformationList& info,
                                                      llm::ChatSession& session) {
    (void)task;
    std::string prompt = templates_.render("state_table", {{"info_list", info.text}});
    return ask(session, prompt,
               [](const std::string& reply) { return parse_state_table(reply); });
}

CodeSample ParadigmBlocks::sequ_generate_module(const Task& task,
                                                const StateTransitionTable& table,
                                                llm::ChatSession& session, int attempt_index) {
    static const char* kBlockKinds[] = {"state register", "next-state logic", "output logic"};
    auto parse_always = [](const std::string& reply) {
        std::string code = extract_code_fence(reply);
        if (code.find("always") == std::string::npos)
            throw FormatError("sub-step reply holds no always block");
        return code;
    };
    for (int i = 0; i < 3; ++i) {
        std::string prompt =
            i == 0 ? templates_.render("always_first", {{"table", table.raw_text},
                                                        {"component", kBlockKinds[i]}})
                   : templates_.render("always_next", {{"component", kBlockKinds[i]}});
        (void)ask(session, prompt, parse_always);
    }
    std::string merge = templates_.render("merge_always", {{"header", task.module_header}});
    std::string code = ask(session, merge, [&task](const std::string& reply) {
        std::string c = extract_code_fence(reply);
        if (c.find("module") == std::string::npos)
            throw FormatError("merged reply holds no module", FormatFault::NoCode);
        check_port_coverage(c, task.module_header);
        return c;
    });
    CodeSample sample;
    sample.verilog = code;
    sample.source_block = Block::Sequ;
    sample.attempt_index = attempt_index;
    return sample;
}

CodeSample ParadigmBlocks::comb_generate_from_sop(const Task& task,
                                                  const std::string& sop_rendering,
                                                  llm::ChatSession& session, int attempt_index) {
    if (sop_rendering.empty())
        throw ValueError("empty SOP rendering");
    std::string prompt = templates_.render(
        "sop_module", {{"sop", sop_rendering}, {"header", task.module_header}});
    std::string code = ask(session, prompt, [&task](const std::string& reply) {
        std::string c = extract_code_fence(reply);
        if (c.find("module") == std::string::npos)
            throw FormatError("reply holds no module", FormatFault::NoCode);
        check_port_coverage(c, task.module_header);
        return c;
    });
    CodeSample sample;
    sample.verilog = code;
    sample.source_block = Block::Comb;
    sample.attempt_index = attempt_index;
    return sample;
}

ComponentList ParadigmBlocks::behav_decompose(const Task& task, const InformationList& info,
                                              llm::ChatSession& session) {
    (void)task;
    std::string prompt = templates_.render("behav_decompose", {{"info_list", info.text}});
    std::string reply = llm::complete(session, backend_, prompt);
    try {
        return parse_component_list(reply);
    } catch (const FormatError&) {
    }
    std::string retry = llm::complete(session, backend_, kClarify + prompt);
    try {
        return parse_component_list(retry);
    } catch (const FormatError&) {
        // prose without enumeration still describes the design as a whole
        if (!trim(retry).empty())
            return ComponentList{{{"whole module", trim(retry)}}};
        throw;
    }
}

CodeSample ParadigmBlocks::behav_generate_module(const Task& task, const ComponentList& comps,
                                                 llm::ChatSession& session, int attempt_index) {
    if (comps.items.empty())
        throw ValueError("empty component list");
    for (const auto& [name, description] : comps.items) {
        std::string prompt = templates_.render(
            "behav_component", {{"component", name}, {"description", description}});
        (void)ask(session, prompt,
                  [](const std::string& reply) { return extract_code_fence(reply); });
    }
    std::string merge = templates_.render("behav_merge", {{"header", task.module_header}});
    std::string code = ask(session, merge, [&task](const std::string& reply) {
        std::string c = extract_code_fence(reply);
        if (c.find("module") == std::string::npos)
            throw FormatError("integration reply holds no module", FormatFault::NoCode);
        check_port_coverage(c, task.module_header);
        return c;
    });
    CodeSample sample;
    sample.verilog = code;
    sample.source_block = Block::Behav;
    sample.attempt_index = attempt_index;
    return sample;
}

} // namespace hdlgen::paradigm
