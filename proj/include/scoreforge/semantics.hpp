#pragma once

#include <optional>
#include <vector>

#include "scoreforge/fact.hpp"
#include "scoreforge/kb.hpp"

namespace scoreforge {

// Precomputed layout structure for one scenario. For family layouts the
// couple in each tier parents the first-column slot of the tier below.
struct Geometry {
  const Scenario* scenario = nullptr;
  int n = 0;
  std::vector<std::vector<int>> children;  // slot -> child slots
  std::vector<std::vector<int>> parents;   // slot -> parent slots
  std::vector<int> spouse;                 // slot -> spouse slot or -1

  static Geometry build(const Scenario& scenario);
};

// True when the truth of the relation between two occupants depends only on
// which slots they occupy (so slot-pair rules can be generated for it).
bool relation_slot_determined(const RelationDecl& rel);

// Slot-level truth for slot-determined relations, and the positional part of
// gendered family relations.
bool relation_holds_slots(const Scenario& scenario, const Geometry& geom,
                          const RelationDecl& rel, int slot_a, int slot_b,
                          const std::optional<double>& param);

// A relation is exact when, fixing either end, at most one slot can satisfy
// it. Non-exact relations ("somewhere to the left") admit several positions.
bool relation_exact(const Scenario& scenario, const Geometry& geom,
                    const RelationDecl& rel, const std::optional<double>& param);

// Everything needed to evaluate a grounded fact against one candidate
// assignment. Vectors are indexed by slot order and roster order.
struct EvalContext {
  const KnowledgeBase* kb = nullptr;
  const Scenario* scenario = nullptr;
  const Geometry* geom = nullptr;
  const std::vector<const Entity*>* roster = nullptr;
  const std::vector<int>* entity_of_slot = nullptr;  // -1 = empty
  const std::vector<int>* slot_of_entity = nullptr;  // -1 = unplaced
};

// Roster indexes a term can denote: an entity names itself, a slot reference
// names its occupant, a descriptor names every matching roster entity.
std::vector<int> term_candidates(const KnowledgeBase& kb,
                                 const std::vector<const Entity*>& roster,
                                 const Scenario& scenario, const Geometry& geom,
                                 const std::vector<int>& entity_of_slot,
                                 const std::vector<int>& slot_of_entity,
                                 const Term& term);

// Direct semantic interpretation, no rule chaining. A fact with truth=false
// is satisfied when its positive reading fails.
bool eval_fact(const EvalContext& ctx, const Fact& fact);

// Entity-level relation truth (slot positions plus gender and numeric
// property requirements).
bool eval_relation(const EvalContext& ctx, const RelationDecl& rel, int ea,
                   int eb, const std::optional<double>& param);

// Value of a layout region property for a slot, if the scenario defines one.
std::optional<std::string> region_value(const Scenario& scenario,
                                        const std::string& property, int slot);

// Whether the property is a layout region property in this scenario.
bool is_region_property(const Scenario& scenario, const std::string& property);

Precision compute_precision(const KnowledgeBase& kb, const Scenario& scenario,
                            const Geometry& geom,
                            const std::vector<const Entity*>& roster,
                            const Fact& fact);

}  // namespace scoreforge
