#include "trestle/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>
#include <stdexcept>

#include "trestle/error.hpp"

namespace trestle {

void TreeParams::validate() const {
    if (!(acuity > 0.0) || !std::isfinite(acuity)) throw std::invalid_argument("acuity must be a positive real");
    if (beam_width < 1) throw std::invalid_argument("beam width must be at least 1");
}

void NumericStats::add(double x) {
    ++n;
    double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
}

double NumericStats::stddev() const {
    if (n <= 1) return 0.0;
    return std::sqrt(std::max(m2, 0.0) / static_cast<double>(n));
}

NumericStats NumericStats::combine(const NumericStats& a, const NumericStats& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    NumericStats out;
    out.n = a.n + b.n;
    double na = static_cast<double>(a.n);
    double nb = static_cast<double>(b.n);
    double delta = b.mean - a.mean;
    out.mean = (na * a.mean + nb * b.mean) / static_cast<double>(out.n);
    out.m2 = a.m2 + b.m2 + delta * delta * na * nb / static_cast<double>(out.n);
    return out;
}

namespace {

double numeric_term(const NumericStats& ns, double count, const TreeParams& params) {
    if (ns.n == 0) return 0.0;
    double p = static_cast<double>(ns.n) / count;
    double sigma = std::max(ns.stddev(), params.acuity);
    return p * p * numeric_scale_constant(params.numeric_scale) / sigma;
}

double nominal_term(const ValueCounts& counts, double count) {
    double sum = 0.0;
    for (const auto& [value, c] : counts) {
        double p = static_cast<double>(c) / count;
        sum += p * p;
    }
    return sum;
}

[[noreturn]] void conflict(const std::string& name) {
    throw type_conflict_error("attribute '" + name + "' mixes nominal and numeric values");
}

}  // namespace

bool ConceptStats::compatible(const FlatInstance& x) const {
    for (const auto& [name, v] : x) {
        if (is_numeric(v) ? nominal.count(name) != 0 : numeric.count(name) != 0) return false;
    }
    return true;
}

void ConceptStats::increment(const FlatInstance& x) {
    for (const auto& [name, v] : x) {
        if (is_numeric(v) ? nominal.count(name) != 0 : numeric.count(name) != 0) conflict(name);
    }
    ++count;
    for (const auto& [name, v] : x) {
        if (auto d = std::get_if<double>(&v)) {
            numeric[name].add(*d);
        } else {
            ++nominal[name][std::get<std::string>(v)];
        }
    }
}

void ConceptStats::absorb(const ConceptStats& other) {
    for (const auto& [name, t] : other.nominal) {
        if (numeric.count(name)) conflict(name);
    }
    for (const auto& [name, t] : other.numeric) {
        if (nominal.count(name)) conflict(name);
    }
    count += other.count;
    for (const auto& [name, table] : other.nominal) {
        auto& mine = nominal[name];
        for (const auto& [value, c] : table) mine[value] += c;
    }
    for (const auto& [name, ns] : other.numeric) {
        auto& mine = numeric[name];
        mine = NumericStats::combine(mine, ns);
    }
}

bool ConceptStats::identical_to(const FlatInstance& x) const {
    if (count == 0 || nominal.size() + numeric.size() != x.size()) return false;
    for (const auto& [name, table] : nominal) {
        auto it = x.find(name);
        if (it == x.end() || !is_nominal(it->second) || table.size() != 1) return false;
        const auto& [value, c] = *table.begin();
        if (c != count || value != std::get<std::string>(it->second)) return false;
    }
    for (const auto& [name, ns] : numeric) {
        auto it = x.find(name);
        if (it == x.end() || !is_numeric(it->second)) return false;
        if (ns.n != count || ns.m2 != 0.0 || ns.mean != std::get<double>(it->second)) return false;
    }
    return true;
}

ConceptStats merge_stats(const ConceptStats& a, const ConceptStats& b) {
    ConceptStats out = a;
    out.absorb(b);
    return out;
}

double expected_correct_guesses(const ConceptStats& s, const TreeParams& params) {
    if (s.count <= 0) throw std::invalid_argument("expected correct guesses of an empty concept");
    double n = static_cast<double>(s.count);
    // Terms are summed in value order so that renaming attributes cannot
    // change the result in the last bit.
    std::vector<double> terms;
    terms.reserve(s.nominal.size() + s.numeric.size());
    for (const auto& [name, table] : s.nominal) terms.push_back(nominal_term(table, n));
    for (const auto& [name, ns] : s.numeric) terms.push_back(numeric_term(ns, n, params));
    std::sort(terms.begin(), terms.end());
    return std::accumulate(terms.begin(), terms.end(), 0.0);
}

double expected_correct_guesses_with(const ConceptStats& s, const FlatInstance& x, const TreeParams& params) {
    double n = static_cast<double>(s.count + 1);
    double sum = 0.0;
    for (const auto& [name, table] : s.nominal) {
        auto it = x.find(name);
        if (it == x.end()) {
            sum += nominal_term(table, n);
            continue;
        }
        if (!is_nominal(it->second)) conflict(name);
        const auto& added = std::get<std::string>(it->second);
        bool seen = false;
        for (const auto& [value, c] : table) {
            std::int64_t k = c;
            if (value == added) {
                ++k;
                seen = true;
            }
            double p = static_cast<double>(k) / n;
            sum += p * p;
        }
        if (!seen) sum += 1.0 / (n * n);
    }
    for (const auto& [name, ns] : s.numeric) {
        auto it = x.find(name);
        if (it == x.end()) {
            sum += numeric_term(ns, n, params);
            continue;
        }
        if (!is_numeric(it->second)) conflict(name);
        NumericStats grown = ns;
        grown.add(std::get<double>(it->second));
        sum += numeric_term(grown, n, params);
    }
    for (const auto& [name, v] : x) {
        if (s.nominal.count(name) || s.numeric.count(name)) continue;
        if (is_numeric(v)) {
            sum += numeric_term(NumericStats{1, std::get<double>(v), 0.0}, n, params);
        } else {
            sum += 1.0 / (n * n);
        }
    }
    return sum;
}

std::optional<double> attribute_gain(const ConceptStats& s, const std::string& name, const AttributeValue& value,
                                     const TreeParams& params) {
    double n = static_cast<double>(s.count + 1);
    if (auto d = std::get_if<double>(&value)) {
        if (s.nominal.count(name)) return std::nullopt;
        NumericStats before;
        if (auto it = s.numeric.find(name); it != s.numeric.end()) before = it->second;
        NumericStats after = before;
        after.add(*d);
        return numeric_term(after, n, params) - numeric_term(before, n, params);
    }
    if (s.numeric.count(name)) return std::nullopt;
    std::int64_t k = 0;
    if (auto it = s.nominal.find(name); it != s.nominal.end()) {
        if (auto vt = it->second.find(std::get<std::string>(value)); vt != it->second.end()) k = vt->second;
    }
    return static_cast<double>(2 * k + 1) / (n * n);
}

}  // namespace trestle
