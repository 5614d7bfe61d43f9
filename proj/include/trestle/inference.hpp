#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "trestle/concept_tree.hpp"
#include "trestle/instance.hpp"

namespace trestle {

struct Prediction {
    std::string attribute;  // flat name in the tree's naming
    AttributeValue value;
    std::optional<double> confidence;  // P(value | concept), nominal only
    NodeId node{};                     // concept whose table supplied the value
};

struct LabeledClustering {
    std::vector<NodeId> labels;
    std::vector<std::vector<NodeId>> paths;  // root-to-label ids per instance
    std::size_t split_count = 0;
    std::size_t splits_requested = 0;

    bool clamped() const { return split_count < splits_requested; }
};

/// Predicts `target` (a flat name in the instance's own naming) from the rest
/// of the instance. Falls back to the nearest ancestor holding the attribute.
/// Throws empty_tree_error or unknown_attribute_error.
Prediction predict(const ConceptTree& tree, const StructuredInstance& instance, const std::string& target);

/// One prediction per attribute stored at the selected concept but absent
/// from the instance, in attribute-name order.
std::vector<Prediction> predict_all_missing(const ConceptTree& tree, const StructuredInstance& instance);

/// Standard deviation behind a numeric prediction.
std::optional<double> prediction_stddev(const ConceptTree& tree, const Prediction& p);

/// Flat labeling from repeatedly splitting the most general unsplit label:
/// shallowest first, then largest count, then earliest created. Leaves are
/// never split; when no splittable label remains the count is clamped.
LabeledClustering cluster_flat(const ConceptTree& tree, std::span<const StructuredInstance> instances,
                               std::size_t n_splits);
LabeledClustering cluster_flat_prepared(const ConceptTree& tree, std::span<const FlatInstance> instances,
                                        std::size_t n_splits);

/// Fits every instance once in a shuffled order drawn from `rng`.
ConceptTree fit_shuffled(const TreeParams& params, std::span<const StructuredInstance> instances, std::mt19937_64& rng);

/// Fits in a seeded shuffle, reshuffles, and labels every instance on the
/// frozen tree. Labels are reported in input order.
LabeledClustering cluster_two_pass(const TreeParams& params, std::span<const StructuredInstance> instances,
                                   std::size_t n_splits, std::uint64_t seed);

/// CSV with header instance_index,label_id,path (path ids joined by '/').
std::string clustering_csv(const LabeledClustering& c);

}  // namespace trestle
