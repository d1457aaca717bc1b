#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hdlgen/errors.hpp"
#include "hdlgen/logic_min.hpp"

using namespace hdlgen;
using namespace hdlgen::logic_min;

namespace {

// Evaluate a table output the slow way: scan rows for the assignment.
std::optional<int> brute_lookup(const TruthTable& t, unsigned bits, std::size_t out) {
    std::vector<int> a(t.inputs.size());
    for (std::size_t i = 0; i < t.inputs.size(); ++i)
        a[i] = (bits >> (t.inputs.size() - 1 - i)) & 1u;
    return t.lookup(a, out);
}

std::map<std::string, int> assignment_map(const TruthTable& t, unsigned bits) {
    std::map<std::string, int> m;
    for (std::size_t i = 0; i < t.inputs.size(); ++i)
        m[t.inputs[i]] = (bits >> (t.inputs.size() - 1 - i)) & 1u;
    return m;
}

// A cube is prime iff dropping any one literal breaks the cover: the widened
// cube must then contain an assignment where the function is specified 0.
bool cube_is_prime(const TruthTable& t, std::size_t out,
                   const std::map<std::string, Literal>& cube) {
    const std::size_t n = t.inputs.size();
    for (const auto& dropped : cube) {
        bool hits_zero = false;
        for (unsigned bits = 0; bits < (1u << n) && !hits_zero; ++bits) {
            auto a = assignment_map(t, bits);
            bool inside = true;
            for (const auto& [name, lit] : cube) {
                if (name == dropped.first)
                    continue;
                int want = lit == Literal::Positive ? 1 : 0;
                if (a[name] != want)
                    inside = false;
            }
            if (!inside)
                continue;
            auto v = brute_lookup(t, bits, out);
            if (v && *v == 0)
                hits_zero = true;
        }
        if (!hits_zero)
            return false; // the literal was redundant
    }
    return true;
}

TruthTable random_table(std::mt19937& rng, int n_inputs, double dc_density) {
    TruthTable t;
    for (int i = 0; i < n_inputs; ++i)
        t.inputs.push_back("x" + std::to_string(i));
    t.outputs = {"f"};
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (unsigned bits = 0; bits < (1u << n_inputs); ++bits) {
        if (coin(rng) < dc_density)
            continue; // unspecified row = don't-care
        std::vector<int> row;
        for (int i = 0; i < n_inputs; ++i)
            row.push_back((bits >> (n_inputs - 1 - i)) & 1u);
        row.push_back(coin(rng) < 0.5 ? 1 : 0);
        t.rows.push_back(row);
    }
    return t;
}

} // namespace

TEST_CASE("parse_truth_table accepts the canonical JSON schema") {
    const std::string json = R"({
      "table": [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 1]],
      "inputs": ["a[1]", "a[2]"],
      "outputs": ["q"],
      "header_inputs": ["a[1]", "a[2]"],
      "header_outputs": ["q"]
    })";
    auto t = parse_truth_table(json);
    CHECK(t.inputs == std::vector<std::string>{"a[1]", "a[2]"});
    CHECK(t.outputs == std::vector<std::string>{"q"});
    CHECK(t.rows.size() == 4);
    CHECK(t.lookup({1, 0}, 0) == 1);
    CHECK(t.lookup({0, 0}, 0) == 0);
}

TEST_CASE("parse_truth_table surfaces specific format faults") {
    CHECK_THROWS_AS(parse_truth_table("not json"), FormatError);
    CHECK_THROWS_AS(parse_truth_table(R"({"inputs": ["a"], "outputs": ["q"]})"), FormatError);
    // Ragged row: 2 cells for 2 inputs + 1 output.
    CHECK_THROWS_AS(
        parse_truth_table(R"({"table": [[0, 0]], "inputs": ["a", "b"], "outputs": ["q"]})"),
        FormatError);
    // Non-binary cell.
    CHECK_THROWS_AS(
        parse_truth_table(R"({"table": [[0, 2, 1]], "inputs": ["a", "b"], "outputs": ["q"]})"),
        FormatError);
    // Contradictory duplicate rows.
    CHECK_THROWS_AS(
        parse_truth_table(
            R"({"table": [[0, 1, 1], [0, 1, 0]], "inputs": ["a", "b"], "outputs": ["q"]})"),
        FormatError);
    // Identical duplicates are deduplicated, not an error.
    auto t = parse_truth_table(
        R"({"table": [[0, 1, 1], [0, 1, 1]], "inputs": ["a", "b"], "outputs": ["q"]})");
    CHECK(t.rows.size() == 1);
}

TEST_CASE("minimize: two-variable OR collapses to single literals") {
    // q = a[1] | a[2]
    auto t = parse_truth_table(R"({
      "table": [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 1]],
      "inputs": ["a[1]", "a[2]"],
      "outputs": ["q"]
    })");
    auto sop = minimize(t, 0);
    REQUIRE(sop.cubes.size() == 2);
    std::set<std::string> cube_names;
    for (const auto& cube : sop.cubes) {
        REQUIRE(cube.size() == 1);
        CHECK(cube.begin()->second == Literal::Positive);
        cube_names.insert(cube.begin()->first);
    }
    CHECK(cube_names == std::set<std::string>{"a[1]", "a[2]"});
    CHECK(render_sop(sop) == "(a[1]) | (a[2])");
}

TEST_CASE("minimize handles constants") {
    auto ones = parse_truth_table(
        R"({"table": [[0, 1], [1, 1]], "inputs": ["a"], "outputs": ["q"]})");
    auto sop1 = minimize(ones, 0);
    CHECK(sop1.is_constant == 1);
    CHECK(render_sop(sop1) == "1'b1");

    auto zeros = parse_truth_table(
        R"({"table": [[0, 0], [1, 0]], "inputs": ["a"], "outputs": ["q"]})");
    auto sop0 = minimize(zeros, 0);
    CHECK(sop0.is_constant == 0);
    CHECK(render_sop(sop0) == "1'b0");

    // All specified rows 1, unspecified don't-cares: still constant 1.
    auto partial = parse_truth_table(
        R"({"table": [[0, 0, 1], [1, 1, 1]], "inputs": ["a", "b"], "outputs": ["q"]})");
    CHECK(minimize(partial, 0).is_constant == 1);
}

TEST_CASE("minimize uses don't-cares to widen cubes") {
    // Specified: f(0,0)=1, f(1,1)=0; f(0,1) and f(1,0) free.
    auto t = parse_truth_table(
        R"({"table": [[0, 0, 1], [1, 1, 0]], "inputs": ["a", "b"], "outputs": ["q"]})");
    auto sop = minimize(t, 0);
    REQUIRE(sop.cubes.size() == 1);
    CHECK(sop.cubes[0].size() == 1); // one literal, not the full minterm ~a&~b
}

TEST_CASE("minimize multi-output XOR-and-AND table") {
    auto t = parse_truth_table(R"({
      "table": [[0, 0, 0, 0], [0, 1, 1, 0], [1, 0, 1, 0], [1, 1, 0, 1]],
      "inputs": ["a", "b"],
      "outputs": ["x", "y"]
    })");
    auto x = minimize(t, 0);
    CHECK(render_sop(x) == "(a & ~b) | (~a & b)");
    auto y = minimize(t, 1);
    CHECK(render_sop(y) == "(a & b)");
}

TEST_CASE("minimize rejects oversized tables") {
    TruthTable t;
    for (std::size_t i = 0; i < kMaxInputs + 1; ++i)
        t.inputs.push_back("x" + std::to_string(i));
    t.outputs = {"f"};
    CHECK_THROWS_AS(minimize(t, 0), TooManyInputs);
}

TEST_CASE("evaluate matches the rendered semantics") {
    SopExpression sop;
    sop.output_name = "q";
    sop.cubes = {{{"a", Literal::Positive}, {"b", Literal::Negative}}};
    CHECK(evaluate(sop, {{"a", 1}, {"b", 0}}) == 1);
    CHECK(evaluate(sop, {{"a", 1}, {"b", 1}}) == 0);
    CHECK(evaluate(sop, {{"a", 0}, {"b", 0}}) == 0);
    SopExpression c1;
    c1.is_constant = 1;
    CHECK(evaluate(c1, {{"a", 0}}) == 1);
}

TEST_CASE("property: equivalence, primality, determinism on random tables") {
    std::mt19937 rng(20260826);
    std::uniform_int_distribution<int> pick_n(1, 6);
    std::uniform_real_distribution<double> pick_dc(0.0, 0.5);
    for (int trial = 0; trial < 200; ++trial) {
        auto t = random_table(rng, pick_n(rng), pick_dc(rng));
        const std::size_t n = t.inputs.size();
        auto sop = minimize(t, 0);

        // Equivalence on every specified (care) assignment.
        for (unsigned bits = 0; bits < (1u << n); ++bits) {
            auto want = brute_lookup(t, bits, 0);
            if (!want)
                continue;
            CAPTURE(trial);
            CAPTURE(bits);
            CHECK(evaluate(sop, assignment_map(t, bits)) == *want);
        }

        // Every cube is a prime implicant.
        if (!sop.is_constant)
            for (const auto& cube : sop.cubes)
                CHECK(cube_is_prime(t, 0, cube));

        // Determinism under row permutation.
        auto shuffled = t;
        std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
        CHECK(render_sop(minimize(shuffled, 0)) == render_sop(sop));

        // Idempotence: re-minimizing the table yields the same text.
        CHECK(render_sop(minimize(t, 0)) == render_sop(sop));
    }
}
