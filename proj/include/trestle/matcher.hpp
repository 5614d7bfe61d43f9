#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trestle/instance.hpp"
#include "trestle/params.hpp"
#include "trestle/stats.hpp"

namespace trestle {

/// A node of the mapping search. `mapping` may be partial; any target that is
/// not a component of the root concept counts as a fresh name.
struct MatchState {
    Mapping mapping;
    std::vector<std::string> unmatched;
    double g = 0.0;  // objective realized by the assignments made so far
    double h = 0.0;  // optimistic gain still available to the unmatched components
};

struct MatchResult {
    Mapping mapping;
    double objective = 0.0;
    std::size_t nodes_expanded = 0;
};

/// Expected correct guesses of `root` after hypothetically adding
/// flatten(instance, m). The root itself is never modified.
double mapping_objective(const ConceptStats& root, const StructuredInstance& instance, const Mapping& m,
                         const TreeParams& params);

/// Fills in unmatched, g and h for a partial mapping.
MatchState make_match_state(const ConceptStats& root, const StructuredInstance& instance, const Mapping& partial,
                            const TreeParams& params);

/// g + h for `state.mapping`: an admissible upper bound on the objective of
/// every completion of the state.
double heuristic_upper_bound(const ConceptStats& root, const StructuredInstance& instance, const MatchState& state,
                             const TreeParams& params);

/// Beam search of width params.beam_width, or A* when
/// params.exact_match_astar is set.
MatchResult best_match(const ConceptStats& root, const StructuredInstance& instance, const TreeParams& params);

/// Component names present in a concept's flat attribute names (dot-path
/// prefixes and relation arguments).
std::vector<std::string> concept_component_names(const ConceptStats& root);

/// Top-level components in the order the search assigns them: most leaf
/// attributes first, ties by name.
std::vector<std::string> expansion_order(const StructuredInstance& instance);

}  // namespace trestle
