#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "trestle/instance.hpp"
#include "trestle/matcher.hpp"
#include "trestle/params.hpp"
#include "trestle/stats.hpp"

namespace trestle {

enum class NodeId : std::uint64_t {};

inline std::uint64_t raw(NodeId id) { return static_cast<std::uint64_t>(id); }

struct ConceptNode {
    NodeId id{};
    ConceptStats stats;
    std::vector<std::unique_ptr<ConceptNode>> children;

    bool is_leaf() const { return children.empty(); }
};

/// Count and expected correct guesses of one (possibly hypothetical) concept.
struct ConceptScore {
    std::int64_t count = 0;
    double ecg = 0.0;
};

/// Category utility of a set of children under `parent`:
/// sum_k P(C_k) [ECG(C_k) - ECG(parent)] / n.
double category_utility(const ConceptStats& parent, std::span<const ConceptStats> children, const TreeParams& params);
double category_utility(const ConceptScore& parent, std::span<const ConceptScore> children);

enum class Operation { add, create, merge, split };

/// Incrementally built categorization tree (COBWEB with structure matching at
/// the root). fit() needs exclusive access; the const members may run
/// concurrently with each other.
class ConceptTree {
public:
    explicit ConceptTree(TreeParams params = {});

    ConceptTree(ConceptTree&&) noexcept = default;
    ConceptTree& operator=(ConceptTree&&) noexcept = default;

    /// Matches, flattens and sorts the instance into the tree. Returns the
    /// concept that finally stores it.
    NodeId fit(const StructuredInstance& instance);
    NodeId fit_flat(const FlatInstance& x);

    /// Best renaming of the instance's components onto the root concept.
    MatchResult match(const StructuredInstance& instance) const;

    /// match() followed by flatten().
    FlatInstance prepare(const StructuredInstance& instance) const;

    /// Non-modifying descent that only weighs adding against creating.
    NodeId categorize(const StructuredInstance& instance) const;
    NodeId categorize_flat(const FlatInstance& x) const;

    /// Root-to-result ids visited by categorize_flat.
    std::vector<NodeId> categorize_path(const FlatInstance& x) const;

    /// Child of `node` that gains the most category utility from `x`; ties go
    /// to the earlier-created child. `node` must have children.
    const ConceptNode& best_child(const ConceptNode& node, const FlatInstance& x) const;

    const ConceptNode& root() const { return *root_; }
    const ConceptNode* find(NodeId id) const;
    const TreeParams& params() const { return params_; }
    bool empty() const { return root_->stats.count == 0; }

    /// How often fit() chose each operation since construction (not persisted).
    std::size_t operation_count(Operation op) const { return op_counts_[static_cast<std::size_t>(op)]; }

    std::size_t node_count() const;
    std::size_t depth() const;

    nlohmann::json to_json() const;
    static ConceptTree from_json(const nlohmann::json& j);
    std::string to_dot() const;

private:
    std::unique_ptr<ConceptNode> make_node();

    TreeParams params_;
    std::unique_ptr<ConceptNode> root_;
    std::uint64_t next_id_ = 0;
    std::array<std::size_t, 4> op_counts_{};
};

}  // namespace trestle
