#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hdlgen/domain.hpp"

namespace hdlgen::sim {

enum class SimStatus { Passed, PartialFail, CompileError, RuntimeError, Timeout };

std::string to_string(SimStatus s);

struct SimOutcome {
    SimStatus status = SimStatus::RuntimeError;
    std::optional<PassRate> pass_rate;
    std::string stdout_text;
    std::string stderr_text;
    double duration_seconds = 0.0;
};

inline constexpr const char* kDefaultMismatchPattern =
    R"(Mismatches:\s*(\d+)\s+in\s+(\d+)\s+samples)";

/// First match of the mismatch pattern (two capture groups: mismatches x,
/// samples y) yields m = y - x, n = y. No match -> nullopt.
std::optional<PassRate> parse_pass_rate(const std::string& stdout_text,
                                        const std::string& pattern = kDefaultMismatchPattern);

struct SimConfig {
    /// argv templates; placeholders: {dut} {tb} {files} {out}
    std::vector<std::string> compile_cmd{"iverilog", "-g2012", "-o", "{out}", "{files}"};
    std::vector<std::string> run_cmd{"vvp", "{out}"};
    std::string mismatch_pattern = kDefaultMismatchPattern;
    int timeout_seconds = 60;
};

class SimRunner {
public:
    virtual ~SimRunner() = default;
    virtual SimOutcome compile_and_run(const std::string& dut_src, const Task& task,
                                       const std::filesystem::path& workdir) = 0;
};

/// Runs the external simulator. Workdir layout: dut.v, tb.v, sim.out,
/// stdout.log, stderr.log; sources are written byte-exact. Task-level
/// failures become statuses; only a missing simulator binary throws.
class ProcessSimRunner : public SimRunner {
public:
    explicit ProcessSimRunner(SimConfig cfg) : cfg_(std::move(cfg)) {}

    SimOutcome compile_and_run(const std::string& dut_src, const Task& task,
                               const std::filesystem::path& workdir) override;

private:
    SimConfig cfg_;
};

/// True when the configured compile command's executable resolves on PATH.
bool simulator_available(const SimConfig& cfg = SimConfig{});

} // namespace hdlgen::sim
