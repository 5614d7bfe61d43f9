#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace trestle {

/// Adjusted Rand index between two labelings of the same items.
///
/// Computed from the pair-count contingency table as
/// (Index - Expected) / (MaxIndex - Expected). The denominator vanishes only
/// when both labelings are trivial (all one cluster, or all singletons); the
/// result is then 1.0 if the partitions are identical and 0.0 otherwise.
/// Throws std::invalid_argument on a length mismatch or fewer than 2 items.
double adjusted_rand_index(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

struct CurvePoint {
    std::size_t opportunity = 0;  // 1-based
    double mean = 0.0;
    double ci_halfwidth = 0.0;    // 1.96 * sqrt(p (1 - p) / n)
    std::size_t n = 0;
};

using Curve = std::vector<CurvePoint>;

/// Per-opportunity accuracy over equally long runs of correct/incorrect
/// outcomes. Throws std::invalid_argument on empty input or ragged runs.
Curve accuracy_by_opportunity(const std::vector<std::vector<bool>>& outcomes);

/// CSV with header opportunity,mean,ci_halfwidth,n.
std::string curve_csv(const Curve& curve);

}  // namespace trestle
