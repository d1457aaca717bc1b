#include "hdlgen/eval_kit.hpp"

#include <sstream>

namespace hdlgen::eval_kit {

Rat pass_at_k(int n, int c, int k) {
    if (k < 1 || k > n)
        throw ValueError("pass@k requires 1 <= k <= n");
    if (c < 0 || c > n)
        throw ValueError("pass@k requires 0 <= c <= n");
    if (k > n - c)
        return Rat(1, 1);
    // C(n-c,k)/C(n,k) = prod_{i=0..k-1} (n-c-i)/(n-i), reduced stepwise
    Rat ratio(1, 1);
    for (int i = 0; i < k; ++i)
        ratio = ratio * Rat(n - c - i, n - i);
    return Rat(1, 1) - ratio;
}

double pass_at_k_estimate(int n, int c, int k) {
    if (k < 1 || k > n)
        throw ValueError("pass@k requires 1 <= k <= n");
    if (c < 0 || c > n)
        throw ValueError("pass@k requires 0 <= c <= n");
    if (k > n - c)
        return 1.0;
    double ratio = 1.0;
    for (int i = n - c + 1; i <= n; ++i)
        ratio *= 1.0 - static_cast<double>(k) / i;
    return 1.0 - ratio;
}

Rat aggregate_pass_at_k(const std::vector<TaskScore>& scores, int k) {
    if (scores.empty())
        throw ValueError("no task scores to aggregate");
    Rat sum(0, 1);
    for (const auto& s : scores) {
        if (s.n < k)
            throw ValueError("task " + s.task_id + " has fewer samples than k");
        sum = sum + pass_at_k(s.n, s.c, k);
    }
    return sum / Rat(static_cast<std::int64_t>(scores.size()), 1);
}

std::array<int, 5> error_rate_histogram(const std::vector<TaskScore>& scores) {
    std::array<int, 5> buckets{};
    for (const auto& s : scores) {
        int b = 4;
        for (int i = 0; i < 4; ++i) {
            if (s.best_error_rate < Rat(i + 1, 5)) {
                b = i;
                break;
            }
        }
        ++buckets[static_cast<std::size_t>(b)];
    }
    return buckets;
}

std::set<std::string> select_hard_tasks(const std::vector<TaskScore>& baseline_scores) {
    std::set<std::string> hard;
    for (const auto& s : baseline_scores)
        if (s.c == 0)
            hard.insert(s.task_id);
    return hard;
}

std::string task_csv(const std::vector<TaskScore>& scores, const std::string& dataset) {
    std::ostringstream os;
    os << "task_id,dataset,n,c,best_error_rate\n";
    for (const auto& s : scores)
        os << s.task_id << "," << dataset << "," << s.n << "," << s.c << ","
           << s.best_error_rate.to_decimal(4) << "\n";
    return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "split,k,pass_at_k\n";
    for (const auto& r : rows)
        os << r.split << "," << r.k << "," << r.pass_at_k.to_decimal(4) << "\n";
    return os.str();
}

} // namespace hdlgen::eval_kit
