#include "trestle/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace trestle {

namespace {

std::int64_t pairs(std::int64_t n) { return n * (n - 1) / 2; }

}  // namespace

double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
    if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
    if (a.size() < 2) throw std::invalid_argument("adjusted Rand index needs at least two items");

    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> table;
    std::map<std::int64_t, std::int64_t> rows;
    std::map<std::int64_t, std::int64_t> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++table[{a[i], b[i]}];
        ++rows[a[i]];
        ++cols[b[i]];
    }
    std::int64_t index = 0;
    for (const auto& [cell, n] : table) index += pairs(n);
    std::int64_t sum_a = 0;
    for (const auto& [label, n] : rows) sum_a += pairs(n);
    std::int64_t sum_b = 0;
    for (const auto& [label, n] : cols) sum_b += pairs(n);
    const std::int64_t total = pairs(static_cast<std::int64_t>(a.size()));

    // Scaled by 2 * total so every term is an integer.
    double numerator = 2.0 * static_cast<double>(index) * static_cast<double>(total) -
                       2.0 * static_cast<double>(sum_a) * static_cast<double>(sum_b);
    double denominator = static_cast<double>(sum_a + sum_b) * static_cast<double>(total) -
                         2.0 * static_cast<double>(sum_a) * static_cast<double>(sum_b);
    if (denominator == 0.0) {
        bool identical = rows.size() == table.size() && cols.size() == table.size();
        return identical ? 1.0 : 0.0;
    }
    return numerator / denominator;
}

Curve accuracy_by_opportunity(const std::vector<std::vector<bool>>& outcomes) {
    if (outcomes.empty() || outcomes.front().empty()) throw std::invalid_argument("no outcomes to aggregate");
    const std::size_t length = outcomes.front().size();
    for (const auto& run : outcomes) {
        if (run.size() != length) throw std::invalid_argument("runs differ in length");
    }
    Curve curve;
    const double n = static_cast<double>(outcomes.size());
    for (std::size_t t = 0; t < length; ++t) {
        std::size_t correct = 0;
        for (const auto& run : outcomes) correct += run[t] ? 1 : 0;
        double p = static_cast<double>(correct) / n;
        curve.push_back({t + 1, p, 1.96 * std::sqrt(p * (1.0 - p) / n), outcomes.size()});
    }
    return curve;
}

std::string curve_csv(const Curve& curve) {
    std::ostringstream os;
    os.precision(17);
    os << "opportunity,mean,ci_halfwidth,n\n";
    for (const auto& p : curve) os << p.opportunity << "," << p.mean << "," << p.ci_halfwidth << "," << p.n << "\n";
    return os.str();
}

}  // namespace trestle
