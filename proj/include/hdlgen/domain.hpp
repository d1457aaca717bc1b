#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hdlgen/errors.hpp"

namespace hdlgen {

/// Exact rational on int64, always normalized (den > 0, gcd(num, den) == 1).
/// Pass rates and candidate scores are compared through this type so that
/// threshold checks like p >= 0.95 never go through floating point.
class Rat {
public:
    constexpr Rat() = default;
    Rat(std::int64_t num, std::int64_t den);

    static Rat from_decimal(const std::string& text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    Rat operator+(const Rat& o) const;
    Rat operator-(const Rat& o) const;
    Rat operator*(const Rat& o) const;
    Rat operator/(const Rat& o) const;

    std::strong_ordering operator<=>(const Rat& o) const;
    bool operator==(const Rat& o) const = default;

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string to_string() const;   // "num/den"
    std::string to_decimal(int digits = 6) const;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Average of two rationals, exact.
Rat rat_avg(const Rat& a, const Rat& b);

/// Fraction of testbench cases passed by one code sample: p = m/n.
class PassRate {
public:
    PassRate(std::int64_t m, std::int64_t n);

    std::int64_t m() const { return m_; }
    std::int64_t n() const { return n_; }
    Rat p() const { return Rat(m_, n_); }
    bool full_pass() const { return m_ == n_; }

    bool operator==(const PassRate& o) const = default;

private:
    std::int64_t m_;
    std::int64_t n_;
};

enum class CircuitType { Comb, Sequ };

/// Which paradigm block (or the naive baseline) produced an artifact.
enum class Block { Sequ, Comb, Behav, Baseline };

std::string to_string(CircuitType t);
std::string to_string(Block b);

/// One benchmark problem.
struct Task {
    std::string task_id;
    std::string spec_text;
    std::string module_header;
    std::string testbench_src;
    std::optional<std::string> reference_src;

    void validate() const;
};

/// An extracted information list with its best-known ranking score.
struct InfoListCandidate {
    int id = 0;
    std::string text;
    Rat score;
    Block origin_block = Block::Sequ;
    int attempt_index = 0;
    int used_count = 0;
};

/// Ranking order: score descending, then earlier attempt first.
bool candidate_ranks_before(const InfoListCandidate& a, const InfoListCandidate& b);

struct CodeSample {
    std::string verilog;
    Block source_block = Block::Baseline;
    std::optional<int> info_list_ref;
    std::optional<PassRate> pass_rate;
    bool compile_ok = true;
    int attempt_index = 0;
};

/// Per-round sample counts [N_1..N_Smax] plus running budget.
struct SearchBudget {
    std::vector<int> schedule;
    int s_max = 0;
    int n_total = 0;
    int n_left = 0;

    static SearchBudget from_schedule(const std::vector<int>& schedule);

    void consume();
    int consumed() const { return n_total - n_left; }
};

/// Format-error accounting: the value that triggers fail-safe is e_f_max + 1.
struct FailState {
    int e_f = 0;
    int e_f_max = 10;
};

struct RunConfig {
    std::vector<int> schedule{7, 2, 1};
    Rat shortcut_threshold_w{19, 20};
    int e_f_max = 10;
    Rat temperature{1, 2};
    int max_context_tokens = 4096;
    int sim_timeout_seconds = 60;
    int jobs = 1;
    std::uint64_t seed = 0;
    int baseline_samples = 10;
    bool compile_failure_consumes_sample = true;

    void validate() const;
};

} // namespace hdlgen
