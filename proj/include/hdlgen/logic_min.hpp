#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdlgen/errors.hpp"

namespace hdlgen::logic_min {

/// Multi-output binary truth table parsed from the LLM's JSON emission.
/// Row cells are ordered inputs-then-outputs; missing input assignments are
/// don't-cares for minimization. header_inputs/header_outputs are kept for
/// provenance only.
struct TruthTable {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<std::vector<int>> rows;
    std::vector<std::string> header_inputs;
    std::vector<std::string> header_outputs;

    /// Output bit for a full input assignment, if the row is specified.
    /// Assignment bits are listed in `inputs` order.
    std::optional<int> lookup(const std::vector<int>& assignment, std::size_t output_index) const;
};

enum class Literal { Positive, Negative };

/// Sum-of-products cover for one output. A cube maps input names to
/// literals; absent inputs are eliminated. Constants carry no cubes.
struct SopExpression {
    std::string output_name;
    std::vector<std::map<std::string, Literal>> cubes;
    std::optional<int> is_constant;
};

/// Validates the JSON truth-table schema ("table"/"inputs"/"outputs" plus
/// optional header lists). Throws FormatError with a specific fault.
TruthTable parse_truth_table(const std::string& json_text);

/// Exact two-level minimization: Quine-McCluskey prime implicants with a
/// Petrick minimum-cover selection (exact for <= petrick_input_limit inputs,
/// greedy above). Unspecified assignments are don't-cares.
SopExpression minimize(const TruthTable& table, std::size_t output_index);

inline constexpr std::size_t kMaxInputs = 16;
inline constexpr std::size_t kPetrickInputLimit = 10;

/// Canonical text: cube literals sorted by input order, cubes sorted
/// lexicographically, "(a & ~b) | (c)"; constants render 1'b0 / 1'b1.
std::string render_sop(const SopExpression& sop);

/// Boolean semantics of a cover under a full assignment (name -> 0/1).
int evaluate(const SopExpression& sop, const std::map<std::string, int>& assignment);

} // namespace hdlgen::logic_min
