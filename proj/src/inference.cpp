#include "trestle/inference.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "trestle/error.hpp"

namespace trestle {

namespace {

std::optional<Prediction> read_attribute(const ConceptNode& node, const std::string& attr) {
    if (auto it = node.stats.nominal.find(attr); it != node.stats.nominal.end() && !it->second.empty()) {
        const std::string* best = nullptr;
        std::int64_t best_count = -1;
        for (const auto& [value, c] : it->second) {
            if (c > best_count) {
                best = &value;
                best_count = c;
            }
        }
        double confidence = static_cast<double>(best_count) / static_cast<double>(node.stats.count);
        return Prediction{attr, *best, confidence, node.id};
    }
    if (auto it = node.stats.numeric.find(attr); it != node.stats.numeric.end() && it->second.n > 0) {
        return Prediction{attr, it->second.mean, std::nullopt, node.id};
    }
    return std::nullopt;
}

}  // namespace

Prediction predict(const ConceptTree& tree, const StructuredInstance& instance, const std::string& target) {
    if (tree.empty()) throw empty_tree_error();
    StructuredInstance masked = instance;
    auto flat_own = flatten(instance);
    if (flat_own.erase(target)) masked = unflatten(flat_own);

    auto match = tree.match(masked);
    auto flat = flatten(masked, match.mapping);
    auto attr = rename_flat_name(target, match.mapping);
    auto path = tree.categorize_path(flat);
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (auto p = read_attribute(*tree.find(*it), attr)) return *p;
    }
    throw unknown_attribute_error(target);
}

std::vector<Prediction> predict_all_missing(const ConceptTree& tree, const StructuredInstance& instance) {
    if (tree.empty()) throw empty_tree_error();
    auto flat = tree.prepare(instance);
    const ConceptNode& selected = *tree.find(tree.categorize_flat(flat));
    std::set<std::string> attrs;
    for (const auto& [name, t] : selected.stats.nominal) attrs.insert(name);
    for (const auto& [name, ns] : selected.stats.numeric) attrs.insert(name);
    std::vector<Prediction> out;
    for (const auto& name : attrs) {
        if (flat.count(name)) continue;
        if (auto p = read_attribute(selected, name)) out.push_back(std::move(*p));
    }
    return out;
}

std::optional<double> prediction_stddev(const ConceptTree& tree, const Prediction& p) {
    const ConceptNode* node = tree.find(p.node);
    if (!node) return std::nullopt;
    auto it = node->stats.numeric.find(p.attribute);
    if (it == node->stats.numeric.end()) return std::nullopt;
    return it->second.stddev();
}

LabeledClustering cluster_flat_prepared(const ConceptTree& tree, std::span<const FlatInstance> instances,
                                        std::size_t n_splits) {
    LabeledClustering out;
    out.splits_requested = n_splits;
    if (instances.empty()) return out;
    if (tree.empty()) throw empty_tree_error();

    std::vector<const ConceptNode*> label(instances.size(), &tree.root());
    out.paths.assign(instances.size(), {tree.root().id});

    while (out.split_count < n_splits) {
        const ConceptNode* target = nullptr;
        std::size_t target_depth = 0;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            const ConceptNode* c = label[i];
            if (c->is_leaf()) continue;
            std::size_t depth = out.paths[i].size();
            bool better = !target || depth < target_depth ||
                          (depth == target_depth && (c->stats.count > target->stats.count ||
                                                     (c->stats.count == target->stats.count && raw(c->id) < raw(target->id))));
            if (better) {
                target = c;
                target_depth = depth;
            }
        }
        if (!target) break;
        for (std::size_t i = 0; i < instances.size(); ++i) {
            if (label[i] != target) continue;
            label[i] = &tree.best_child(*target, instances[i]);
            out.paths[i].push_back(label[i]->id);
        }
        ++out.split_count;
    }
    for (const auto* c : label) out.labels.push_back(c->id);
    return out;
}

LabeledClustering cluster_flat(const ConceptTree& tree, std::span<const StructuredInstance> instances,
                               std::size_t n_splits) {
    std::vector<FlatInstance> flats;
    flats.reserve(instances.size());
    for (const auto& x : instances) flats.push_back(tree.prepare(x));
    return cluster_flat_prepared(tree, flats, n_splits);
}

ConceptTree fit_shuffled(const TreeParams& params, std::span<const StructuredInstance> instances, std::mt19937_64& rng) {
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    ConceptTree tree(params);
    for (auto i : order) tree.fit(instances[i]);
    return tree;
}

LabeledClustering cluster_two_pass(const TreeParams& params, std::span<const StructuredInstance> instances,
                                   std::size_t n_splits, std::uint64_t seed) {
    if (instances.empty()) throw std::invalid_argument("cannot cluster an empty dataset");
    std::mt19937_64 rng(seed);
    auto tree = fit_shuffled(params, instances, rng);

    // Second pass: categorize in a fresh order against the frozen tree.
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<FlatInstance> flats(instances.size());
    for (auto i : order) flats[i] = tree.prepare(instances[i]);
    return cluster_flat_prepared(tree, flats, n_splits);
}

std::string clustering_csv(const LabeledClustering& c) {
    std::ostringstream os;
    os << "instance_index,label_id,path\n";
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
        os << i << "," << raw(c.labels[i]) << ",";
        for (std::size_t k = 0; k < c.paths[i].size(); ++k) os << (k ? "/" : "") << raw(c.paths[i][k]);
        os << "\n";
    }
    return os.str();
}

}  // namespace trestle
