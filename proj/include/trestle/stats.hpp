#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "trestle/instance.hpp"
#include "trestle/params.hpp"

namespace trestle {

/// Running count, mean and sum of squared deviations (Welford).
struct NumericStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);

    /// Population standard deviation; 0 when n <= 1.
    double stddev() const;

    /// Parallel combination: equals the batch statistics over both samples.
    static NumericStats combine(const NumericStats& a, const NumericStats& b);

    bool operator==(const NumericStats&) const = default;
};

using ValueCounts = std::map<std::string, std::int64_t>;

/// Probability tables of a concept: instance count, nominal value counts and
/// numeric summaries per flat attribute.
struct ConceptStats {
    std::int64_t count = 0;
    std::map<std::string, ValueCounts> nominal;
    std::map<std::string, NumericStats> numeric;

    /// Adds one instance. Throws type_conflict_error (leaving the stats
    /// untouched) if an attribute's type differs from what is stored.
    void increment(const FlatInstance& x);

    /// Adds another concept's statistics.
    void absorb(const ConceptStats& other);

    /// Whether `x` is compatible with the stored attribute types.
    bool compatible(const FlatInstance& x) const;

    /// True when every stored instance equals `x` attribute for attribute.
    bool identical_to(const FlatInstance& x) const;

    bool operator==(const ConceptStats&) const = default;
};

ConceptStats merge_stats(const ConceptStats& a, const ConceptStats& b);

/// Sum over attributes and values of P(A = v)^2, with numeric attributes
/// contributing (n_A / N)^2 * c / max(sigma, acuity). Throws
/// std::invalid_argument on an empty concept.
double expected_correct_guesses(const ConceptStats& s, const TreeParams& params);

/// expected_correct_guesses of `s` after hypothetically adding `x`.
double expected_correct_guesses_with(const ConceptStats& s, const FlatInstance& x, const TreeParams& params);

/// Change in the contribution of attribute `name` when one instance carrying
/// `value` is added to `s`, holding the count at s.count + 1 on both sides.
/// nullopt on a type conflict.
std::optional<double> attribute_gain(const ConceptStats& s, const std::string& name, const AttributeValue& value,
                                     const TreeParams& params);

}  // namespace trestle
