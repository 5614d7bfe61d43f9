#pragma once

#include <numbers>

namespace trestle {

enum class NumericScale {
    exact,  // 1 / (2 sqrt(pi) sigma): integral of the squared normal density
    bare,   // 1 / sigma
};

/// 1 / (2 sqrt(pi)); with this acuity a zero-variance numeric attribute
/// scores exactly 1.0 under the exact scale.
inline constexpr double default_acuity = std::numbers::inv_sqrtpi / 2.0;

struct TreeParams {
    double acuity = default_acuity;
    NumericScale numeric_scale = NumericScale::exact;
    int beam_width = 3;
    bool exact_match_astar = false;

    /// Throws std::invalid_argument when acuity <= 0 or beam_width < 1.
    void validate() const;

    bool operator==(const TreeParams&) const = default;
};

inline double numeric_scale_constant(NumericScale scale) {
    return scale == NumericScale::exact ? std::numbers::inv_sqrtpi / 2.0 : 1.0;
}

}  // namespace trestle
