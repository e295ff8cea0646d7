#pragma once

#include <vector>

#include "scoreforge/kb.hpp"
#include "scoreforge/semantics.hpp"

namespace scoreforge {

// Rule population for a puzzle. Hand-written KB rules are joined by families
// generated mechanically: inverse/symmetry equivalences from relation
// metadata, slot-pair and region rules from the layout, slot-reference
// lifting, descriptor introduction and resolution, functional-property
// negation, and numeric comparison introduction.

// Parts that depend only on the scenario; cacheable across instances.
std::vector<Rule> expand_scenario_rules(const KnowledgeBase& kb,
                                        const Scenario& scenario,
                                        const Geometry& geom);

// Parts that depend on the sampled roster (descriptor vocabulary, value
// negations, numeric comparisons).
std::vector<Rule> expand_instance_rules(const KnowledgeBase& kb,
                                        const Scenario& scenario,
                                        const Geometry& geom,
                                        const std::vector<const Entity*>& roster);

// Whether a hand-written rule applies to this scenario: guards pass and every
// relation it mentions is admissible vocabulary.
bool rule_applicable(const KnowledgeBase& kb, const Rule& rule,
                     const Scenario& scenario);

}  // namespace scoreforge
