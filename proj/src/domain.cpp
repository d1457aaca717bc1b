#include "hdlgen/domain.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace hdlgen {

namespace {

std::int64_t checked_narrow(__int128 v, const char* what) {
    if (v > INT64_MAX || v < INT64_MIN)
        throw ValueError(std::string("rational overflow in ") + what);
    return static_cast<std::int64_t>(v);
}

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a == 0 ? 1 : a;
}

Rat make_reduced(__int128 num, __int128 den, const char* what) {
    if (den == 0)
        throw ValueError("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 g = gcd128(num, den);
    return Rat(checked_narrow(num / g, what), checked_narrow(den / g, what));
}

} // namespace

Rat::Rat(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0)
        throw ValueError("rational with zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

Rat Rat::from_decimal(const std::string& text) {
    std::string t = text;
    // allow "a/b" as well
    if (auto slash = t.find('/'); slash != std::string::npos) {
        std::int64_t n = std::stoll(t.substr(0, slash));
        std::int64_t d = std::stoll(t.substr(slash + 1));
        return Rat(n, d);
    }
    bool neg = false;
    std::size_t i = 0;
    if (i < t.size() && (t[i] == '+' || t[i] == '-')) {
        neg = t[i] == '-';
        ++i;
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool seen_digit = false, seen_dot = false;
    for (; i < t.size(); ++i) {
        char c = t[i];
        if (c == '.') {
            if (seen_dot)
                throw ValueError("bad decimal: " + text);
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9')
            throw ValueError("bad decimal: " + text);
        seen_digit = true;
        num = num * 10 + (c - '0');
        if (seen_dot)
            den *= 10;
    }
    if (!seen_digit)
        throw ValueError("bad decimal: " + text);
    return Rat(neg ? -num : num, den);
}

Rat Rat::operator+(const Rat& o) const {
    return make_reduced(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                        static_cast<__int128>(den_) * o.den_, "add");
}

Rat Rat::operator-(const Rat& o) const {
    return make_reduced(static_cast<__int128>(num_) * o.den_ - static_cast<__int128>(o.num_) * den_,
                        static_cast<__int128>(den_) * o.den_, "sub");
}

Rat Rat::operator*(const Rat& o) const {
    return make_reduced(static_cast<__int128>(num_) * o.num_,
                        static_cast<__int128>(den_) * o.den_, "mul");
}

Rat Rat::operator/(const Rat& o) const {
    if (o.num_ == 0)
        throw ValueError("rational division by zero");
    return make_reduced(static_cast<__int128>(num_) * o.den_,
                        static_cast<__int128>(den_) * o.num_, "div");
}

std::strong_ordering Rat::operator<=>(const Rat& o) const {
    __int128 lhs = static_cast<__int128>(num_) * o.den_;
    __int128 rhs = static_cast<__int128>(o.num_) * den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string Rat::to_string() const {
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rat::to_decimal(int digits) const {
    std::ostringstream os;
    os.precision(digits);
    os << std::fixed << to_double();
    return os.str();
}

Rat rat_avg(const Rat& a, const Rat& b) {
    return (a + b) * Rat(1, 2);
}

PassRate::PassRate(std::int64_t m, std::int64_t n) : m_(m), n_(n) {
    if (n < 1)
        throw ValueError("pass rate with zero cases");
    if (m < 0 || m > n)
        throw ValueError("pass rate m out of range");
}

std::string to_string(CircuitType t) {
    return t == CircuitType::Comb ? "COMB" : "SEQU";
}

std::string to_string(Block b) {
    switch (b) {
    case Block::Sequ: return "SEQU";
    case Block::Comb: return "COMB";
    case Block::Behav: return "BEHAV";
    case Block::Baseline: return "BASELINE";
    }
    return "?";
}

void Task::validate() const {
    if (task_id.empty())
        throw ValueError("task_id empty");
    if (spec_text.empty())
        throw ValueError("spec_text empty for task " + task_id);
    if (testbench_src.empty())
        throw MissingTestbench("no testbench for task " + task_id);
}

bool candidate_ranks_before(const InfoListCandidate& a, const InfoListCandidate& b) {
    if (a.score != b.score)
        return a.score > b.score;
    return a.attempt_index < b.attempt_index;
}

SearchBudget SearchBudget::from_schedule(const std::vector<int>& schedule) {
    if (schedule.empty())
        throw ValueError("empty search schedule");
    SearchBudget b;
    b.schedule = schedule;
    b.s_max = static_cast<int>(schedule.size());
    for (int n : schedule) {
        if (n < 1)
            throw ValueError("schedule entries must be >= 1");
        b.n_total += n;
    }
    b.n_left = b.n_total;
    return b;
}

void SearchBudget::consume() {
    if (n_left <= 0)
        throw ValueError("search budget exhausted");
    --n_left;
}

void RunConfig::validate() const {
    SearchBudget::from_schedule(schedule);
    if (shortcut_threshold_w <= Rat(0, 1) || shortcut_threshold_w > Rat(1, 1))
        throw ValueError("shortcut threshold W must be in (0,1]");
    if (e_f_max < 0)
        throw ValueError("E_f must be >= 0");
    if (jobs < 1)
        throw ValueError("jobs must be >= 1");
    if (baseline_samples < 1)
        throw ValueError("baseline_samples must be >= 1");
}

} // namespace hdlgen
