#pragma once

#include <map>
#include <string>
#include <vector>

#include "scoreforge/kb.hpp"
#include "scoreforge/semantics.hpp"

namespace scoreforge {

// Brute-force oracle. Statements are checked by direct semantic
// interpretation against candidate assignments, never by rule chaining, so
// the solver cross-validates the reasoner.
struct AssignmentSpace {
  const KnowledgeBase* kb = nullptr;
  const Scenario* scenario = nullptr;
  std::vector<const Entity*> candidates;
  std::vector<Fact> statements;
};

using AssignmentMap = std::map<std::string, std::string>;  // slot -> entity

// Every injective slot->entity assignment satisfying all statements, in
// lexicographic candidate order. Throws VocabularyMismatch when a statement
// uses a relation outside the scenario vocabulary or an undeclared property.
std::vector<AssignmentMap> consistent_assignments(const AssignmentSpace& space);

// True iff exactly one assignment is consistent. Throws
// NoConsistentAssignment when none is (a contradictory statement set).
bool is_unique(const AssignmentSpace& space);

// Greedy removal in reverse insertion order; the result is 1-minimal: it
// still pins a unique assignment and dropping any single statement breaks
// uniqueness.
std::vector<Fact> prune_to_minimal(const AssignmentSpace& space);

struct Query {
  enum class Mask { Subject, Object, Slot, Value };
  Fact fact;  // the proposition with the masked element ignored
  Mask mask = Mask::Subject;
};

enum class QueryMode { Precise, Vague };

// Ground completions of the query: entities, slots, or values. Precise mode
// requires a unique assignment and reads answers off it; Vague mode keeps
// completions true in every consistent assignment.
std::vector<std::string> answer_set(const AssignmentSpace& space,
                                    const Query& query, QueryMode mode);

}  // namespace scoreforge
