#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "hdlgen/domain.hpp"

namespace hdlgen::eval_kit {

struct TaskScore {
    std::string task_id;
    int n = 0;                 // samples produced
    int c = 0;                 // samples that passed
    Rat best_error_rate{1, 1}; // 1 - max sample p
};

/// Exact Pass@k = 1 - C(n-c, k) / C(n, k); C(n-c, k) is 0 when k > n-c.
Rat pass_at_k(int n, int c, int k);

/// Floating-point product form for sizes beyond exact range.
double pass_at_k_estimate(int n, int c, int k);

/// Mean of per-task Pass@k across problems.
Rat aggregate_pass_at_k(const std::vector<TaskScore>& scores, int k);

/// Buckets [0,0.2) [0.2,0.4) [0.4,0.6) [0.6,0.8) [0.8,1.0], one count per
/// task by best_error_rate.
std::array<int, 5> error_rate_histogram(const std::vector<TaskScore>& scores);

/// Tasks the baseline never solved (c == 0).
std::set<std::string> select_hard_tasks(const std::vector<TaskScore>& baseline_scores);

/// Per-run CSV: task_id,dataset,n,c,best_error_rate
std::string task_csv(const std::vector<TaskScore>& scores, const std::string& dataset);

struct SummaryRow {
    std::string split;
    int k = 0;
    Rat pass_at_k;
};

/// Summary CSV: split,k,pass_at_k
std::string summary_csv(const std::vector<SummaryRow>& rows);

} // namespace hdlgen::eval_kit
