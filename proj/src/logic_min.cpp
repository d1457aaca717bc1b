#include "hdlgen/logic_min.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hdlgen::logic_min {

using nlohmann::json;

std::optional<int> TruthTable::lookup(const std::vector<int>& assignment,
                                      std::size_t output_index) const {
    for (const auto& row : rows) {
        bool match = true;
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (row[i] != assignment[i]) {
                match = false;
                break;
            }
        }
        if (match)
            return row[inputs.size() + output_index];
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> parse_name_list(const json& j, const char* field) {
    if (!j.contains(field))
        throw FormatError(std::string("truth table missing field: ") + field,
                          FormatFault::MissingField);
    const auto& arr = j.at(field);
    if (!arr.is_array())
        throw FormatError(std::string("truth table field is not a list: ") + field,
                          FormatFault::MissingField);
    std::vector<std::string> names;
    for (const auto& n : arr) {
        if (!n.is_string())
            throw FormatError(std::string("non-string name in ") + field,
                              FormatFault::MissingField);
        names.push_back(n.get<std::string>());
    }
    return names;
}

void check_unique(const std::vector<std::string>& names, const char* what) {
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second)
            throw FormatError(std::string("duplicate ") + what + " name: " + n,
                              FormatFault::DuplicateName);
}

} // namespace

TruthTable parse_truth_table(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid truth-table JSON: ") + e.what(),
                          FormatFault::MissingField);
    }
    if (!j.is_object())
        throw FormatError("truth table is not a JSON object", FormatFault::MissingField);

    TruthTable t;
    t.inputs = parse_name_list(j, "inputs");
    t.outputs = parse_name_list(j, "outputs");
    check_unique(t.inputs, "input");
    check_unique(t.outputs, "output");
    if (t.inputs.empty() || t.outputs.empty())
        throw FormatError("truth table needs at least one input and one output",
                          FormatFault::MissingField);
    if (j.contains("header_inputs"))
        t.header_inputs = parse_name_list(j, "header_inputs");
    if (j.contains("header_outputs"))
        t.header_outputs = parse_name_list(j, "header_outputs");

    if (!j.contains("table") || !j.at("table").is_array())
        throw FormatError("truth table missing field: table", FormatFault::MissingField);
    const std::size_t width = t.inputs.size() + t.outputs.size();
    for (const auto& row : j.at("table")) {
        if (!row.is_array() || row.size() != width)
            throw FormatError("truth-table row width != |inputs| + |outputs|",
                              FormatFault::RaggedRow);
        std::vector<int> cells;
        for (const auto& cell : row) {
            if (!cell.is_number_integer() ||
                (cell.get<int>() != 0 && cell.get<int>() != 1))
                throw FormatError("truth-table cell is not 0 or 1", FormatFault::NonBinaryCell);
            cells.push_back(cell.get<int>());
        }
        t.rows.push_back(std::move(cells));
    }

    // contradiction check; exact duplicate rows are collapsed
    std::map<std::vector<int>, std::vector<int>> by_input;
    std::vector<std::vector<int>> deduped;
    for (const auto& row : t.rows) {
        std::vector<int> in(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(t.inputs.size()));
        std::vector<int> out(row.begin() + static_cast<std::ptrdiff_t>(t.inputs.size()), row.end());
        auto it = by_input.find(in);
        if (it == by_input.end()) {
            by_input.emplace(in, out);
            deduped.push_back(row);
        } else if (it->second != out) {
            throw FormatError("same input assignment maps to different outputs",
                              FormatFault::ContradictoryRows);
        }
    }
    t.rows = std::move(deduped);
    return t;
}

namespace {

// Implicant over minterm space: `value` holds fixed bits, `mask` marks
// eliminated variables. Bit (n-1-i) corresponds to inputs[i].
struct Implicant {
    std::uint32_t value;
    std::uint32_t mask;

    auto operator<=>(const Implicant&) const = default;

    bool covers(std::uint32_t minterm) const { return (minterm & ~mask) == (value & ~mask); }
};

std::vector<Implicant> prime_implicants(const std::set<std::uint32_t>& care_on,
                                        const std::set<std::uint32_t>& dc,
                                        std::size_t n_inputs) {
    std::set<Implicant> current;
    for (auto m : care_on)
        current.insert({m, 0});
    for (auto m : dc)
        current.insert({m, 0});

    std::vector<Implicant> primes;
    while (!current.empty()) {
        std::set<Implicant> next;
        std::set<Implicant> combined;
        std::vector<Implicant> list(current.begin(), current.end());
        for (std::size_t a = 0; a < list.size(); ++a) {
            for (std::size_t b = a + 1; b < list.size(); ++b) {
                if (list[a].mask != list[b].mask)
                    continue;
                std::uint32_t diff = (list[a].value ^ list[b].value) & ~list[a].mask;
                if (std::popcount(diff) != 1)
                    continue;
                next.insert({list[a].value & ~diff, list[a].mask | diff});
                combined.insert(list[a]);
                combined.insert(list[b]);
            }
        }
        for (const auto& imp : list)
            if (!combined.count(imp))
                primes.push_back(imp);
        current = std::move(next);
    }
    (void)n_inputs;
    std::sort(primes.begin(), primes.end());
    return primes;
}

// Petrick's method over <= 64 primes; returns indices of a minimum cover.
// Falls back to empty (caller uses greedy) if the product blows up.
std::optional<std::vector<std::size_t>> petrick_cover(
    const std::vector<std::vector<std::size_t>>& covers_per_minterm,
    std::size_t n_primes) {
    if (n_primes > 64)
        return std::nullopt;
    constexpr std::size_t kMaxTerms = 20000;

    std::vector<std::uint64_t> sols{0};
    for (const auto& covers : covers_per_minterm) {
        std::vector<std::uint64_t> next;
        for (auto s : sols)
            for (auto p : covers)
                next.push_back(s | (1ull << p));
        // absorption: drop strict supersets
        std::sort(next.begin(), next.end(), [](std::uint64_t a, std::uint64_t b) {
            auto pa = std::popcount(a), pb = std::popcount(b);
            return pa != pb ? pa < pb : a < b;
        });
        next.erase(std::unique(next.begin(), next.end()), next.end());
        std::vector<std::uint64_t> kept;
        for (auto cand : next) {
            bool absorbed = false;
            for (auto k : kept) {
                if ((k & cand) == k) {
                    absorbed = true;
                    break;
                }
            }
            if (!absorbed)
                kept.push_back(cand);
        }
        if (kept.size() > kMaxTerms)
            return std::nullopt;
        sols = std::move(kept);
    }

    std::uint64_t best = 0;
    int best_count = -1;
    for (auto s : sols) {
        int c = std::popcount(s);
        if (best_count < 0 || c < best_count || (c == best_count && s < best)) {
            best = s;
            best_count = c;
        }
    }
    std::vector<std::size_t> picks;
    for (std::size_t i = 0; i < n_primes; ++i)
        if (best & (1ull << i))
            picks.push_back(i);
    return picks;
}

std::vector<std::size_t> greedy_cover(const std::vector<Implicant>& primes,
                                      const std::set<std::uint32_t>& care_on) {
    std::set<std::uint32_t> uncovered = care_on;
    std::vector<std::size_t> picks;
    while (!uncovered.empty()) {
        std::size_t best = primes.size();
        std::size_t best_gain = 0;
        for (std::size_t i = 0; i < primes.size(); ++i) {
            std::size_t gain = 0;
            for (auto m : uncovered)
                if (primes[i].covers(m))
                    ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        picks.push_back(best);
        for (auto it = uncovered.begin(); it != uncovered.end();)
            it = primes[best].covers(*it) ? uncovered.erase(it) : std::next(it);
    }
    std::sort(picks.begin(), picks.end());
    return picks;
}

} // namespace

SopExpression minimize(const TruthTable& table, std::size_t output_index) {
    if (output_index >= table.outputs.size())
        throw ValueError("output index out of range");
    const std::size_t n = table.inputs.size();
    if (n > kMaxInputs)
        throw TooManyInputs("truth table has more than 16 inputs");

    SopExpression sop;
    sop.output_name = table.outputs[output_index];

    const std::uint32_t space = 1u << n;
    std::set<std::uint32_t> on, off;
    for (const auto& row : table.rows) {
        std::uint32_t m = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (row[i])
                m |= 1u << (n - 1 - i);
        (row[n + output_index] ? on : off).insert(m);
    }
    std::set<std::uint32_t> dc;
    for (std::uint32_t m = 0; m < space; ++m)
        if (!on.count(m) && !off.count(m))
            dc.insert(m);

    if (on.empty()) {
        sop.is_constant = 0;
        return sop;
    }
    if (off.empty()) {
        sop.is_constant = 1;
        return sop;
    }

    auto primes = prime_implicants(on, dc, n);

    // keep only primes touching a care-on point
    std::vector<Implicant> useful;
    for (const auto& p : primes)
        for (auto m : on)
            if (p.covers(m)) {
                useful.push_back(p);
                break;
            }

    std::vector<std::vector<std::size_t>> covers_per_minterm;
    for (auto m : on) {
        std::vector<std::size_t> covers;
        for (std::size_t i = 0; i < useful.size(); ++i)
            if (useful[i].covers(m))
                covers.push_back(i);
        covers_per_minterm.push_back(std::move(covers));
    }

    // Reduce the cover matrix before Petrick: essential primes (a minterm
    // covered by a single prime forces it) and row dominance (a minterm whose
    // cover set contains another's is covered for free). Both reductions
    // preserve at least one minimum-cardinality cover.
    std::vector<std::size_t> forced;
    {
        auto& rows = covers_per_minterm;
        bool changed = true;
        while (changed && !rows.empty()) {
            changed = false;
            std::set<std::size_t> essentials;
            for (const auto& r : rows)
                if (r.size() == 1)
                    essentials.insert(r[0]);
            if (!essentials.empty()) {
                forced.insert(forced.end(), essentials.begin(), essentials.end());
                std::vector<std::vector<std::size_t>> remaining;
                for (auto& r : rows) {
                    bool covered = false;
                    for (auto p : r)
                        if (essentials.count(p)) {
                            covered = true;
                            break;
                        }
                    if (!covered)
                        remaining.push_back(std::move(r));
                }
                rows = std::move(remaining);
                changed = true;
                continue;
            }
            std::vector<bool> drop(rows.size(), false);
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < rows.size(); ++j) {
                    if (i == j || drop[i] || drop[j])
                        continue;
                    // rows are sorted; drop i if rows[j] is a subset of it
                    if (std::includes(rows[i].begin(), rows[i].end(),
                                      rows[j].begin(), rows[j].end()) &&
                        (rows[i] != rows[j] || j < i))
                        drop[i] = true;
                }
            std::vector<std::vector<std::size_t>> remaining;
            for (std::size_t i = 0; i < rows.size(); ++i)
                if (!drop[i])
                    remaining.push_back(std::move(rows[i]));
            if (remaining.size() != rows.size())
                changed = true;
            rows = std::move(remaining);

            // Column dominance: a prime covering a subset of another prime's
            // remaining rows can be dropped (all primes cost the same).
            if (rows.size() > 64)
                continue;
            std::map<std::size_t, std::uint64_t> col;
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (auto p : rows[r])
                    col[p] |= 1ull << r;
            std::set<std::size_t> dead;
            for (const auto& [pi, ci] : col)
                for (const auto& [pj, cj] : col) {
                    if (pi == pj || dead.count(pj))
                        continue;
                    if ((ci & cj) == ci && (ci != cj || pj < pi)) {
                        dead.insert(pi);
                        break;
                    }
                }
            if (!dead.empty()) {
                for (auto& r : rows)
                    std::erase_if(r, [&](std::size_t p) { return dead.count(p) > 0; });
                changed = true;
            }
        }
        std::sort(forced.begin(), forced.end());
        forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
    }

    std::optional<std::vector<std::size_t>> picks;
    if (n <= kPetrickInputLimit)
        picks = petrick_cover(covers_per_minterm, useful.size());
    if (!picks)
        picks = greedy_cover(useful, on);
    picks->insert(picks->end(), forced.begin(), forced.end());
    std::sort(picks->begin(), picks->end());
    picks->erase(std::unique(picks->begin(), picks->end()), picks->end());

    for (auto idx : *picks) {
        const auto& imp = useful[idx];
        std::map<std::string, Literal> cube;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bit = 1u << (n - 1 - i);
            if (imp.mask & bit)
                continue;
            cube[table.inputs[i]] = (imp.value & bit) ? Literal::Positive : Literal::Negative;
        }
        sop.cubes.push_back(std::move(cube));
    }
    return sop;
}

std::string render_sop(const SopExpression& sop) {
    if (sop.is_constant)
        return *sop.is_constant ? "1'b1" : "1'b0";
    if (sop.cubes.empty())
        return "1'b0";

    std::vector<std::string> rendered;
    for (const auto& cube : sop.cubes) {
        std::ostringstream os;
        os << "(";
        bool first = true;
        for (const auto& [name, lit] : cube) {
            if (!first)
                os << " & ";
            first = false;
            if (lit == Literal::Negative)
                os << "~";
            os << name;
        }
        os << ")";
        rendered.push_back(os.str());
    }
    std::sort(rendered.begin(), rendered.end());
    std::ostringstream os;
    for (std::size_t i = 0; i < rendered.size(); ++i)
        os << (i ? " | " : "") << rendered[i];
    return os.str();
}

int evaluate(const SopExpression& sop, const std::map<std::string, int>& assignment) {
    if (sop.is_constant)
        return *sop.is_constant;
    for (const auto& cube : sop.cubes) {
        bool sat = true;
        for (const auto& [name, lit] : cube) {
            auto it = assignment.find(name);
            if (it == assignment.end())
                throw ValueError("assignment missing input: " + name);
            int want = lit == Literal::Positive ? 1 : 0;
            if (it->second != want) {
                sat = false;
                break;
            }
        }
        if (sat)
            return 1;
    }
    return 0;
}

} // namespace hdlgen::logic_min
