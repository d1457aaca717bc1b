#pragma once

#include <stdexcept>
#include <string>

namespace hdlgen {

/// Precondition or argument violation (zero cases, range, empty input, ...).
struct ValueError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class FormatFault {
    Generic,
    MissingField,
    RaggedRow,
    NonBinaryCell,
    ContradictoryRows,
    DuplicateName,
    NoCode,
    MissingPort,
};

/// An LLM reply (or structured text) from which the expected artifact
/// cannot be extracted.
struct FormatError : std::runtime_error {
    FormatFault fault = FormatFault::Generic;

    explicit FormatError(const std::string& msg, FormatFault f = FormatFault::Generic)
        : std::runtime_error(msg), fault(f) {}
};

struct BackendUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContextOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReplayMiss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimulatorMissing : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooManyInputs : ValueError {
    using ValueError::ValueError;
};

struct ParseError : std::runtime_error {
    int line = 0;

    ParseError(const std::string& msg, int line_no)
        : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

struct MissingTestbench : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IncompleteRun : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hdlgen
