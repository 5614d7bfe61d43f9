#include "trestle/concept_tree.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "trestle/error.hpp"

namespace trestle {

double category_utility(const ConceptScore& parent, std::span<const ConceptScore> children) {
    if (children.empty()) throw std::invalid_argument("category utility needs at least one child");
    if (parent.count <= 0) throw std::invalid_argument("category utility of an empty parent");
    double sum = 0.0;
    for (const auto& c : children) {
        if (c.count <= 0) throw std::invalid_argument("category utility with an empty child");
        sum += static_cast<double>(c.count) / static_cast<double>(parent.count) * (c.ecg - parent.ecg);
    }
    return sum / static_cast<double>(children.size());
}

double category_utility(const ConceptStats& parent, std::span<const ConceptStats> children, const TreeParams& params) {
    if (children.empty()) throw std::invalid_argument("category utility needs at least one child");
    std::vector<ConceptScore> scores;
    for (const auto& c : children) {
        if (c.count <= 0) throw std::invalid_argument("category utility with an empty child");
        scores.push_back({c.count, expected_correct_guesses(c, params)});
    }
    if (parent.count <= 0) throw std::invalid_argument("category utility of an empty parent");
    return category_utility(ConceptScore{parent.count, expected_correct_guesses(parent, params)}, scores);
}

namespace {

struct Decision {
    Operation op = Operation::add;
    std::size_t best1 = 0;
    std::optional<std::size_t> best2;
};

// Scores of a node's children and of the node itself with `x` added, shared by
// the add/create comparisons of fit and categorize.
class Evaluation {
public:
    Evaluation(const ConceptNode& node, const FlatInstance& x, const TreeParams& params)
        : node_(node), x_(x), params_(params) {
        parent_ = {node.stats.count + 1, expected_correct_guesses_with(node.stats, x, params)};
        for (const auto& c : node.children) scores_.push_back({c->stats.count, expected_correct_guesses(c->stats, params)});
        for (std::size_t i = 0; i < scores_.size(); ++i) {
            auto scores = scores_;
            scores[i] = {scores_[i].count + 1, expected_correct_guesses_with(node.children[i]->stats, x, params)};
            add_.push_back(category_utility(parent_, scores));
        }
        ranked_.resize(scores_.size());
        std::iota(ranked_.begin(), ranked_.end(), std::size_t{0});
        std::sort(ranked_.begin(), ranked_.end(), [&](std::size_t a, std::size_t b) {
            if (add_[a] != add_[b]) return add_[a] > add_[b];
            return raw(node.children[a]->id) < raw(node.children[b]->id);
        });
    }

    std::size_t best1() const { return ranked_[0]; }
    std::optional<std::size_t> best2() const {
        return ranked_.size() > 1 ? std::optional<std::size_t>(ranked_[1]) : std::nullopt;
    }
    double add_utility() const { return add_[best1()]; }

    double create_utility() const {
        auto scores = scores_;
        scores.push_back({1, expected_correct_guesses_with(ConceptStats{}, x_, params_)});
        return category_utility(parent_, scores);
    }

    double merge_utility(std::size_t a, std::size_t b) const {
        std::vector<ConceptScore> scores;
        for (std::size_t i = 0; i < scores_.size(); ++i) {
            if (i != a && i != b) scores.push_back(scores_[i]);
        }
        auto merged = merge_stats(node_.children[a]->stats, node_.children[b]->stats);
        scores.push_back({merged.count + 1, expected_correct_guesses_with(merged, x_, params_)});
        return category_utility(parent_, scores);
    }

    // Evaluated on the node as it stands, before the instance is added.
    double split_utility(std::size_t a) const {
        std::vector<ConceptScore> scores;
        for (std::size_t i = 0; i < scores_.size(); ++i) {
            if (i != a) scores.push_back(scores_[i]);
        }
        for (const auto& g : node_.children[a]->children) {
            scores.push_back({g->stats.count, expected_correct_guesses(g->stats, params_)});
        }
        ConceptScore parent{node_.stats.count, expected_correct_guesses(node_.stats, params_)};
        return category_utility(parent, scores);
    }

private:
    const ConceptNode& node_;
    const FlatInstance& x_;
    const TreeParams& params_;
    ConceptScore parent_;
    std::vector<ConceptScore> scores_;
    std::vector<double> add_;
    std::vector<std::size_t> ranked_;
};

Decision decide(const ConceptNode& node, const FlatInstance& x, const TreeParams& params) {
    Evaluation eval(node, x, params);
    Decision d{Operation::add, eval.best1(), eval.best2()};
    double best = eval.add_utility();

    if (double cu = eval.create_utility(); cu > best) {
        best = cu;
        d.op = Operation::create;
    }
    if (node.children.size() >= 3 && d.best2) {
        if (double cu = eval.merge_utility(d.best1, *d.best2); cu > best) {
            best = cu;
            d.op = Operation::merge;
        }
    }
    if (!node.children[d.best1]->is_leaf()) {
        if (double cu = eval.split_utility(d.best1); cu > best) {
            d.op = Operation::split;
        }
    }
    return d;
}

const ConceptNode* find_in(const ConceptNode& node, NodeId id) {
    if (node.id == id) return &node;
    for (const auto& c : node.children) {
        if (auto hit = find_in(*c, id)) return hit;
    }
    return nullptr;
}

std::size_t count_nodes(const ConceptNode& node) {
    std::size_t n = 1;
    for (const auto& c : node.children) n += count_nodes(*c);
    return n;
}

std::size_t depth_of(const ConceptNode& node) {
    std::size_t d = 0;
    for (const auto& c : node.children) d = std::max(d, 1 + depth_of(*c));
    return d;
}

}  // namespace

ConceptTree::ConceptTree(TreeParams params) : params_(params) {
    params_.validate();
    root_ = make_node();
}

std::unique_ptr<ConceptNode> ConceptTree::make_node() {
    auto node = std::make_unique<ConceptNode>();
    node->id = NodeId{next_id_++};
    return node;
}

MatchResult ConceptTree::match(const StructuredInstance& instance) const {
    if (instance.components.empty()) {
        validate(instance);
        return {};
    }
    return best_match(root_->stats, instance, params_);
}

FlatInstance ConceptTree::prepare(const StructuredInstance& instance) const {
    return flatten(instance, match(instance).mapping);
}

NodeId ConceptTree::fit(const StructuredInstance& instance) { return fit_flat(prepare(instance)); }

NodeId ConceptTree::fit_flat(const FlatInstance& x) {
    if (!root_->stats.compatible(x)) {
        ConceptStats probe = root_->stats;
        probe.increment(x);  // throws with the offending attribute named
    }
    ConceptNode* current = root_.get();
    while (true) {
        if (current->is_leaf()) {
            if (current->stats.count == 0 || current->stats.identical_to(x)) {
                current->stats.increment(x);
                return current->id;
            }
            auto copy = make_node();
            copy->stats = current->stats;
            auto leaf = make_node();
            leaf->stats.increment(x);
            NodeId stored = leaf->id;
            current->stats.increment(x);
            current->children.push_back(std::move(copy));
            current->children.push_back(std::move(leaf));
            return stored;
        }

        auto d = decide(*current, x, params_);
        ++op_counts_[static_cast<std::size_t>(d.op)];
        auto& kids = current->children;
        switch (d.op) {
            case Operation::add:
                current->stats.increment(x);
                current = kids[d.best1].get();
                break;
            case Operation::create: {
                auto leaf = make_node();
                leaf->stats.increment(x);
                NodeId stored = leaf->id;
                current->stats.increment(x);
                kids.push_back(std::move(leaf));
                return stored;
            }
            case Operation::merge: {
                std::size_t lo = std::min(d.best1, *d.best2);
                std::size_t hi = std::max(d.best1, *d.best2);
                auto merged = make_node();
                merged->stats = merge_stats(kids[lo]->stats, kids[hi]->stats);
                merged->children.push_back(std::move(kids[lo]));
                merged->children.push_back(std::move(kids[hi]));
                kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(hi));
                ConceptNode* next = merged.get();
                kids[lo] = std::move(merged);
                current->stats.increment(x);
                current = next;
                break;
            }
            case Operation::split: {
                auto removed = std::move(kids[d.best1]);
                auto at = kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(d.best1));
                kids.insert(at, std::make_move_iterator(removed->children.begin()),
                            std::make_move_iterator(removed->children.end()));
                break;
            }
        }
    }
}

const ConceptNode& ConceptTree::best_child(const ConceptNode& node, const FlatInstance& x) const {
    if (node.is_leaf()) throw std::invalid_argument("best_child of a leaf");
    Evaluation eval(node, x, params_);
    return *node.children[eval.best1()];
}

std::vector<NodeId> ConceptTree::categorize_path(const FlatInstance& x) const {
    if (empty()) throw empty_tree_error();
    const ConceptNode* current = root_.get();
    std::vector<NodeId> path{current->id};
    while (!current->is_leaf()) {
        Evaluation eval(*current, x, params_);
        if (eval.create_utility() > eval.add_utility()) break;
        current = current->children[eval.best1()].get();
        path.push_back(current->id);
    }
    return path;
}

NodeId ConceptTree::categorize_flat(const FlatInstance& x) const { return categorize_path(x).back(); }

NodeId ConceptTree::categorize(const StructuredInstance& instance) const {
    if (empty()) throw empty_tree_error();
    return categorize_flat(prepare(instance));
}

const ConceptNode* ConceptTree::find(NodeId id) const { return find_in(*root_, id); }

std::size_t ConceptTree::node_count() const { return count_nodes(*root_); }

std::size_t ConceptTree::depth() const { return depth_of(*root_); }

}  // namespace trestle
