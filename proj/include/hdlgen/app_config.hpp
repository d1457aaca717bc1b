#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hdlgen/domain.hpp"
#include "hdlgen/llm_gateway.hpp"
#include "hdlgen/sim_harness.hpp"

namespace hdlgen::app {

/// Flat key-value configuration. Precedence: CLI flag > config file >
/// built-in default. Defaults follow the published experiment settings:
/// schedule (7,2,1), W 0.95, E_f 10, temperature 0.5, context 4096,
/// iverilog, 10 baseline samples.
struct AppConfig {
    RunConfig run;
    llm::LiveBackendConfig live;
    sim::SimConfig sim;
    std::string system_prompt = "You are a Verilog RTL design expert.";
    std::string templates_dir;
    std::string dataset_path;
    std::string dataset_format = "directory";
    std::string backend = "scripted";
    std::string script_file;
    std::string transcript_file;
    bool baseline = false;

    static AppConfig from_file(const std::filesystem::path& file);
    void apply(const std::map<std::string, std::string>& kv);

    /// Flat key=value snapshot; from_snapshot(to_snapshot(c)) round-trips.
    std::string to_snapshot() const;
    static AppConfig from_snapshot(const std::filesystem::path& file);
};

std::map<std::string, std::string> parse_flat_kv(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

} // namespace hdlgen::app
