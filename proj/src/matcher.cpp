#include "trestle/matcher.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <queue>
#include <set>

#include "trestle/error.hpp"

namespace trestle {

namespace {

// Completed states whose decomposed score lies this close to the best are
// re-scored with the literal objective before one is chosen.
constexpr double tie_window = 1e-9;

constexpr int unassigned = -1;

struct ComponentAttrs {
    std::string name;
    std::vector<std::pair<std::string, AttributeValue>> suffixed;  // ".x" -> value
};

struct InstanceRelation {
    std::string predicate;
    std::vector<int> component;       // index into the expansion order
    std::vector<std::string> suffix;  // remainder of the argument path
};

struct ConceptRelation {
    std::string predicate;
    std::vector<std::string> args;
    double gain;
};

std::string head_of(const std::string& path) { return path.substr(0, path.find('.')); }
std::string tail_of(const std::string& path) {
    auto dot = path.find('.');
    return dot == std::string::npos ? std::string() : path.substr(dot);
}

std::size_t leaf_count(const Component& c) {
    std::size_t n = c.values.size();
    for (const auto& [name, sub] : c.components) n += leaf_count(sub);
    return n;
}

// Decomposes the matching objective: base + per-component gains + per-relation gains.
class MatchProblem {
public:
    MatchProblem(const ConceptStats& root, const StructuredInstance& instance, const TreeParams& params)
        : root_(root), instance_(instance), params_(params) {
        validate(instance);
        order_ = expansion_order(instance);
        for (std::size_t i = 0; i < order_.size(); ++i) index_.emplace(order_[i], static_cast<int>(i));

        FlatInstance top(instance.values.begin(), instance.values.end());
        base_ = expected_correct_guesses_with(root, top, params);

        std::set<std::string> blocked;
        for (const auto& [name, v] : instance.values) blocked.insert(name);
        for (const auto& name : concept_component_names(root)) {
            reserved_.insert(name);
            if (!blocked.count(name)) targets_.push_back(name);
        }
        for (const auto& [name, t] : root.nominal) {
            if (name.front() != '(' && name.find('.') == std::string::npos) reserved_.insert(name);
        }
        for (const auto& [name, t] : root.numeric) {
            if (name.find('.') == std::string::npos) reserved_.insert(name);
        }
        reserved_.insert(blocked.begin(), blocked.end());

        auto flat = flatten(instance);
        std::vector<ComponentAttrs> attrs(order_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) attrs[i].name = order_[i];
        for (const auto& [name, v] : flat) {
            auto owner = owning_component(name);
            if (!owner) continue;
            attrs[index_.at(*owner)].suffixed.emplace_back(name.substr(owner->size()), v);
        }

        ConceptStats unseen;
        unseen.count = root.count;
        const int fresh = fresh_target();
        gains_.assign(order_.size(), std::vector<std::optional<double>>(fresh + 1));
        for (std::size_t i = 0; i < order_.size(); ++i) {
            for (int j = 0; j <= fresh; ++j) {
                double sum = 0.0;
                bool legal = true;
                for (const auto& [suffix, v] : attrs[i].suffixed) {
                    auto g = j == fresh ? attribute_gain(unseen, suffix, v, params)
                                        : attribute_gain(root, targets_[j] + suffix, v, params);
                    if (!g) {
                        legal = false;
                        break;
                    }
                    sum += *g;
                }
                if (legal) gains_[i][j] = sum;
            }
        }

        fresh_relation_gain_ = *attribute_gain(unseen, "()", std::string("True"), params);
        for (const auto& r : instance.relations) {
            InstanceRelation ir{r.predicate, {}, {}};
            for (const auto& a : r.args) {
                ir.component.push_back(index_.at(head_of(a)));
                ir.suffix.push_back(tail_of(a));
            }
            relations_.push_back(std::move(ir));
        }
        for (const auto& [name, table] : root.nominal) {
            if (name.front() != '(') continue;
            auto r = Relation::parse(name);
            if (!r) continue;
            auto g = attribute_gain(root, name, std::string("True"), params);
            concept_relations_.push_back({r->predicate, r->args, g.value_or(fresh_relation_gain_)});
        }
    }

    std::size_t size() const { return order_.size(); }
    int fresh_target() const { return static_cast<int>(targets_.size()); }
    const std::vector<std::string>& order() const { return order_; }
    const std::vector<std::string>& targets() const { return targets_; }

    bool legal(std::size_t i, int j) const { return gains_[i][j].has_value(); }

    double g(const std::vector<int>& assign) const {
        double sum = base_;
        for (std::size_t i = 0; i < assign.size(); ++i) {
            if (assign[i] != unassigned) sum += *gains_[i][assign[i]];
        }
        for (const auto& r : relations_) {
            if (resolved(r, assign)) sum += relation_gain(r, assign);
        }
        return sum;
    }

    double h(const std::vector<int>& assign) const {
        std::vector<bool> used(targets_.size(), false);
        for (int j : assign) {
            if (j != unassigned && j != fresh_target()) used[j] = true;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < assign.size(); ++i) {
            if (assign[i] != unassigned) continue;
            double best = *gains_[i][fresh_target()];
            for (int j = 0; j < fresh_target(); ++j) {
                if (!used[j] && gains_[i][j]) best = std::max(best, *gains_[i][j]);
            }
            sum += best;
        }
        for (const auto& r : relations_) {
            if (!resolved(r, assign)) sum += relation_bound(r, assign);
        }
        return sum;
    }

    Mapping to_mapping(const std::vector<int>& assign) const {
        Mapping m;
        int next = 1;
        for (std::size_t i = 0; i < assign.size(); ++i) {
            if (assign[i] == unassigned) continue;
            if (assign[i] != fresh_target()) {
                m.emplace(order_[i], targets_[assign[i]]);
                continue;
            }
            std::string name;
            do {
                name = "o" + std::to_string(next++);
            } while (reserved_.count(name));
            m.emplace(order_[i], name);
        }
        return m;
    }

    std::vector<int> from_mapping(const Mapping& partial) const {
        std::vector<int> assign(order_.size(), unassigned);
        std::set<std::string> seen;
        std::set<std::string> blocked;
        for (const auto& [name, v] : instance_.values) blocked.insert(name);
        for (const auto& [from, to] : partial) {
            auto it = index_.find(from);
            if (it == index_.end()) throw instance_error("mapping names unknown component '" + from + "'");
            if (!seen.insert(to).second) throw instance_error("mapping is not injective at '" + to + "'");
            if (blocked.count(to)) throw instance_error("component target '" + to + "' collides with an attribute");
            auto t = std::lower_bound(targets_.begin(), targets_.end(), to);
            int j = (t != targets_.end() && *t == to) ? static_cast<int>(t - targets_.begin()) : fresh_target();
            if (!legal(it->second, j)) throw type_conflict_error("mapping '" + from + "' -> '" + to + "' mixes types");
            assign[it->second] = j;
        }
        return assign;
    }

private:
    bool resolved(const InstanceRelation& r, const std::vector<int>& assign) const {
        return std::all_of(r.component.begin(), r.component.end(), [&](int c) { return assign[c] != unassigned; });
    }

    double relation_gain(const InstanceRelation& r, const std::vector<int>& assign) const {
        Relation renamed{r.predicate, {}};
        for (std::size_t k = 0; k < r.component.size(); ++k) {
            int j = assign[r.component[k]];
            if (j == fresh_target()) return fresh_relation_gain_;
            renamed.args.push_back(targets_[j] + r.suffix[k]);
        }
        return attribute_gain(root_, renamed.name(), std::string("True"), params_).value_or(fresh_relation_gain_);
    }

    double relation_bound(const InstanceRelation& r, const std::vector<int>& assign) const {
        double best = fresh_relation_gain_;
        for (const auto& cr : concept_relations_) {
            if (cr.predicate != r.predicate || cr.args.size() != r.component.size()) continue;
            bool consistent = true;
            for (std::size_t k = 0; k < cr.args.size() && consistent; ++k) {
                int j = assign[r.component[k]];
                if (j == fresh_target()) {
                    consistent = false;
                } else if (j != unassigned) {
                    consistent = cr.args[k] == targets_[j] + r.suffix[k];
                } else {
                    consistent = tail_of(cr.args[k]) == r.suffix[k];
                }
            }
            if (consistent) best = std::max(best, cr.gain);
        }
        return best;
    }

    const ConceptStats& root_;
    const StructuredInstance& instance_;
    const TreeParams& params_;
    std::vector<std::string> order_;
    std::map<std::string, int> index_;
    std::vector<std::string> targets_;
    std::set<std::string> reserved_;
    double base_ = 0.0;
    double fresh_relation_gain_ = 0.0;
    std::vector<std::vector<std::optional<double>>> gains_;
    std::vector<InstanceRelation> relations_;
    std::vector<ConceptRelation> concept_relations_;
};

struct SearchNode {
    std::vector<int> assign;
    std::size_t depth = 0;
    double g = 0.0;
    double f = 0.0;
    int non_fresh = 0;
};

// Lexicographic comparison on the assignment; concept targets sort by name,
// the fresh target after all of them.
bool tie_order(const SearchNode& a, const SearchNode& b) {
    if (a.non_fresh != b.non_fresh) return a.non_fresh < b.non_fresh;
    return a.assign < b.assign;
}

bool beam_order(const SearchNode& a, const SearchNode& b) {
    if (a.f != b.f) return a.f > b.f;
    return tie_order(a, b);
}

struct AStarWorse {
    bool operator()(const SearchNode& a, const SearchNode& b) const {
        if (a.f != b.f) return a.f < b.f;
        if (a.depth != b.depth) return a.depth < b.depth;
        return tie_order(b, a);
    }
};

std::vector<SearchNode> expand(const MatchProblem& p, const SearchNode& s) {
    std::vector<SearchNode> out;
    const std::size_t i = s.depth;
    std::vector<bool> used(p.targets().size(), false);
    for (std::size_t k = 0; k < i; ++k) {
        if (s.assign[k] != p.fresh_target()) used[s.assign[k]] = true;
    }
    for (int j = 0; j <= p.fresh_target(); ++j) {
        if ((j != p.fresh_target() && used[j]) || !p.legal(i, j)) continue;
        SearchNode child = s;
        child.assign[i] = j;
        child.depth = i + 1;
        child.non_fresh += j != p.fresh_target() ? 1 : 0;
        child.g = p.g(child.assign);
        child.f = child.g + p.h(child.assign);
        out.push_back(std::move(child));
    }
    return out;
}

MatchResult select(const MatchProblem& p, const ConceptStats& root, const StructuredInstance& instance,
                   const TreeParams& params, std::vector<SearchNode> complete, std::size_t expanded) {
    double best_g = -std::numeric_limits<double>::infinity();
    for (const auto& s : complete) best_g = std::max(best_g, s.g);
    std::sort(complete.begin(), complete.end(), tie_order);
    MatchResult result;
    result.objective = -std::numeric_limits<double>::infinity();
    for (const auto& s : complete) {
        if (s.g < best_g - tie_window) continue;
        auto m = p.to_mapping(s.assign);
        double objective = mapping_objective(root, instance, m, params);
        if (objective > result.objective) {
            result.objective = objective;
            result.mapping = std::move(m);
        }
    }
    result.nodes_expanded = expanded;
    return result;
}

SearchNode start_node(const MatchProblem& p) {
    SearchNode s;
    s.assign.assign(p.size(), unassigned);
    s.g = p.g(s.assign);
    s.f = s.g + p.h(s.assign);
    return s;
}

MatchResult beam_search(const MatchProblem& p, const ConceptStats& root, const StructuredInstance& instance,
                        const TreeParams& params) {
    std::vector<SearchNode> beam{start_node(p)};
    std::size_t expanded = 0;
    for (std::size_t level = 0; level < p.size(); ++level) {
        std::vector<SearchNode> candidates;
        for (const auto& s : beam) {
            ++expanded;
            auto children = expand(p, s);
            std::move(children.begin(), children.end(), std::back_inserter(candidates));
        }
        std::sort(candidates.begin(), candidates.end(), beam_order);
        if (candidates.size() > static_cast<std::size_t>(params.beam_width)) candidates.resize(params.beam_width);
        beam = std::move(candidates);
    }
    return select(p, root, instance, params, std::move(beam), expanded);
}

MatchResult astar_search(const MatchProblem& p, const ConceptStats& root, const StructuredInstance& instance,
                         const TreeParams& params) {
    std::priority_queue<SearchNode, std::vector<SearchNode>, AStarWorse> open;
    open.push(start_node(p));
    std::vector<SearchNode> complete;
    std::optional<double> best;
    std::size_t expanded = 0;
    while (!open.empty()) {
        if (best && open.top().f < *best - tie_window) break;
        SearchNode s = open.top();
        open.pop();
        ++expanded;
        if (s.depth == p.size()) {
            if (!best) best = s.g;
            complete.push_back(std::move(s));
            continue;
        }
        for (auto& child : expand(p, s)) open.push(std::move(child));
    }
    return select(p, root, instance, params, std::move(complete), expanded);
}

}  // namespace

std::vector<std::string> concept_component_names(const ConceptStats& root) {
    std::set<std::string> names;
    auto visit = [&](const std::string& flat_name) {
        if (auto owner = owning_component(flat_name)) {
            names.insert(*owner);
        } else if (flat_name.front() == '(') {
            if (auto r = Relation::parse(flat_name)) {
                for (const auto& a : r->args) names.insert(head_of(a));
            }
        }
    };
    for (const auto& [name, t] : root.nominal) visit(name);
    for (const auto& [name, t] : root.numeric) visit(name);
    return {names.begin(), names.end()};
}

std::vector<std::string> expansion_order(const StructuredInstance& instance) {
    std::vector<std::pair<std::size_t, std::string>> keyed;
    for (const auto& [name, c] : instance.components) keyed.emplace_back(leaf_count(c), name);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    for (auto& [n, name] : keyed) out.push_back(std::move(name));
    return out;
}

double mapping_objective(const ConceptStats& root, const StructuredInstance& instance, const Mapping& m,
                         const TreeParams& params) {
    if (m.size() != instance.components.size()) throw instance_error("mapping must cover every component");
    ConceptStats grown = root;
    grown.increment(flatten(instance, m));
    return expected_correct_guesses(grown, params);
}

MatchState make_match_state(const ConceptStats& root, const StructuredInstance& instance, const Mapping& partial,
                            const TreeParams& params) {
    MatchProblem p(root, instance, params);
    auto assign = p.from_mapping(partial);
    MatchState state;
    state.mapping = partial;
    for (std::size_t i = 0; i < assign.size(); ++i) {
        if (assign[i] == unassigned) state.unmatched.push_back(p.order()[i]);
    }
    state.g = p.g(assign);
    state.h = p.h(assign);
    return state;
}

double heuristic_upper_bound(const ConceptStats& root, const StructuredInstance& instance, const MatchState& state,
                             const TreeParams& params) {
    MatchProblem p(root, instance, params);
    auto assign = p.from_mapping(state.mapping);
    return p.g(assign) + p.h(assign);
}

MatchResult best_match(const ConceptStats& root, const StructuredInstance& instance, const TreeParams& params) {
    params.validate();
    MatchProblem p(root, instance, params);
    return params.exact_match_astar ? astar_search(p, root, instance, params) : beam_search(p, root, instance, params);
}

}  // namespace trestle
