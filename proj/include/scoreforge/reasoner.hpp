#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "scoreforge/kb.hpp"
#include "scoreforge/semantics.hpp"

namespace scoreforge {

// Grounded fact store with indexes for rule matching. Facts are never
// removed; a re-derivation of an existing fact is dropped, keeping the first
// (shallowest) provenance.
class FactBase {
public:
  int add(Fact fact);  // returns the fact id (existing id on duplicates)
  const Fact* find(const std::string& key) const;
  int find_id(const std::string& key) const;  // -1 when absent

  const Fact& fact(int id) const { return facts_[id]; }
  const std::vector<Fact>& facts() const { return facts_; }
  size_t size() const { return facts_.size(); }

  const std::vector<int>& by_form_pred(FactForm form, const std::string& pred) const;
  const std::vector<int>& by_form_pred_subj(FactForm form, const std::string& pred,
                                            const Term& subject) const;

  bool closed = false;

private:
  std::vector<Fact> facts_;
  std::unordered_map<std::string, int> by_key_;
  std::unordered_map<std::string, std::vector<int>> form_pred_;
  std::unordered_map<std::string, std::vector<int>> form_pred_subj_;
};

struct ChainContext {
  const KnowledgeBase* kb = nullptr;
  const Scenario* scenario = nullptr;
  const Geometry* geom = nullptr;
  const std::vector<const Entity*>* roster = nullptr;
};

// The ids a fact mentions on its face plus the domains of those properties
// and relations (no derivation ancestry).
Labels fact_own_labels(const ChainContext& ctx, const Fact& fact);

// Depth-0 facts of a grounded instance: one slot assertion per slot, one
// property assertion per declared entity property, and the relation
// assertions the slot layout forces between occupants.
FactBase init_facts(const ChainContext& ctx,
                    const std::map<std::string, std::string>& assignment);

// Rounds of rule application until nothing new derives. Derived facts get
// provenance, unioned labels, and depth = 1 + max premise depth (rounds are
// breadth-first, so depth is the minimal derivation nesting).
void chain_to_fixpoint(FactBase& fb, const std::vector<Rule>& rules,
                       const ChainContext& ctx);

struct ChainStep {
  std::string rule;
  int fact;
};

struct DerivationChain {
  std::vector<ChainStep> steps;  // minimal support, topological order
  int hops = 0;                  // depth of the goal
};

// Re-chains from the axioms and extracts the minimal derivation of the goal.
// Throws NotDerivable when the goal is not reached. An axiom goal yields an
// empty chain.
DerivationChain derivation_chain(const ChainContext& ctx,
                                 const std::vector<Rule>& rules,
                                 const Fact& goal,
                                 const std::vector<Fact>& axioms,
                                 FactBase* rechained = nullptr);

// Chain extraction against an already-closed base.
DerivationChain chain_from_closure(const FactBase& closure, int goal_id);

}  // namespace scoreforge
