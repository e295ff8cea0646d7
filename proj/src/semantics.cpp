#include "scoreforge/semantics.hpp"

#include <algorithm>
#include <cmath>

#include "scoreforge/errors.hpp"

namespace scoreforge {

Geometry Geometry::build(const Scenario& scenario) {
  Geometry g;
  g.scenario = &scenario;
  g.n = static_cast<int>(scenario.slots.size());
  g.children.assign(g.n, {});
  g.parents.assign(g.n, {});
  g.spouse.assign(g.n, -1);
  if (scenario.geometry == GeometryKind::Family) {
    for (int i = 0; i < g.n; ++i) {
      const auto& a = scenario.slots[i];
      for (int j = 0; j < g.n; ++j) {
        if (i == j) continue;
        const auto& b = scenario.slots[j];
        if (b.row == a.row + 1 && b.col == 0) {
          g.children[i].push_back(j);
          g.parents[j].push_back(i);
        }
        if (b.row == a.row && b.col != a.col) g.spouse[i] = j;
      }
    }
  }
  return g;
}

namespace {

bool comp_holds(const RelSem::Comp& c, int diff) {
  switch (c.op) {
    case RelSem::Comp::Op::Any: return true;
    case RelSem::Comp::Op::Eq: return diff == 0;
    case RelSem::Comp::Op::Lt: return diff < 0;
    case RelSem::Comp::Op::Gt: return diff > 0;
    case RelSem::Comp::Op::Diff: return diff == c.k;
    case RelSem::Comp::Op::AbsDiff: return std::abs(diff) == c.k;
  }
  return false;
}

// Walks family edges; returns every slot reachable via the step string.
std::vector<int> family_walk(const Geometry& g, int start, const std::string& path) {
  std::vector<int> cur{start};
  for (char step : path) {
    std::vector<int> next;
    for (int s : cur) {
      if (step == 'c') {
        for (int t : g.children[s]) next.push_back(t);
      } else if (step == 'f') {
        for (int t : g.parents[s]) next.push_back(t);
      } else if (step == 's') {
        if (g.spouse[s] >= 0) next.push_back(g.spouse[s]);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    cur = std::move(next);
    if (cur.empty()) break;
  }
  return cur;
}

}  // namespace

bool relation_slot_determined(const RelationDecl& rel) {
  switch (rel.semantics.kind) {
    case RelSem::Kind::Grid:
    case RelSem::Kind::MirrorNeighbor:
    case RelSem::Kind::CycleOffset:
    case RelSem::Kind::CycleOrder:
      return true;
    case RelSem::Kind::FamilyPath:
      return rel.semantics.subject_gender.empty();
    default:
      return false;
  }
}

bool relation_holds_slots(const Scenario& scenario, const Geometry& geom,
                          const RelationDecl& rel, int slot_a, int slot_b,
                          const std::optional<double>& param) {
  if (slot_a == slot_b) return false;
  const auto& sa = scenario.slots[slot_a];
  const auto& sb = scenario.slots[slot_b];
  const RelSem& sem = rel.semantics;
  switch (sem.kind) {
    case RelSem::Kind::Grid:
      return comp_holds(sem.row, sa.row - sb.row) &&
             comp_holds(sem.col, sa.col - sb.col);
    case RelSem::Kind::MirrorNeighbor: {
      if (sa.row != sb.row) return false;
      int handedness = sa.row == 0 ? 1 : -1;
      return sa.col - sb.col == sem.dir * handedness;
    }
    case RelSem::Kind::CycleOffset: {
      if (!param) return false;
      int n = geom.n;
      int k = static_cast<int>(*param);
      if (k <= 0 || k >= n) return false;
      int diff = ((sa.col - sb.col) % n + n) % n;
      int want = sem.offset_sign > 0 ? k : n - k;
      return diff == want;
    }
    case RelSem::Kind::CycleOrder:
      return sem.order_lt ? sa.col < sb.col : sa.col > sb.col;
    case RelSem::Kind::FamilyPath: {
      auto reach = family_walk(geom, slot_a, sem.path);
      return std::find(reach.begin(), reach.end(), slot_b) != reach.end();
    }
    default:
      return false;
  }
}

bool relation_exact(const Scenario& scenario, const Geometry& geom,
                    const RelationDecl& rel, const std::optional<double>& param) {
  if (rel.semantics.kind == RelSem::Kind::NumCompare)
    return rel.semantics.num_mode != RelSem::NumMode::Lt &&
           rel.semantics.num_mode != RelSem::NumMode::Gt;
  int n = geom.n;
  for (int a = 0; a < n; ++a) {
    int count = 0;
    for (int b = 0; b < n; ++b)
      if (relation_holds_slots(scenario, geom, rel, a, b, param)) count++;
    if (count > 1) return false;
  }
  for (int b = 0; b < n; ++b) {
    int count = 0;
    for (int a = 0; a < n; ++a)
      if (relation_holds_slots(scenario, geom, rel, a, b, param)) count++;
    if (count > 1) return false;
  }
  return true;
}

std::optional<std::string> region_value(const Scenario& scenario,
                                        const std::string& property, int slot) {
  for (const auto& reg : scenario.regions) {
    if (reg.property != property) continue;
    int coord = reg.axis == RegionDecl::Axis::Row ? scenario.slots[slot].row
                                                  : scenario.slots[slot].col;
    auto it = reg.values.find(coord);
    if (it != reg.values.end()) return it->second;
    return std::nullopt;
  }
  return std::nullopt;
}

bool is_region_property(const Scenario& scenario, const std::string& property) {
  for (const auto& reg : scenario.regions)
    if (reg.property == property) return true;
  return false;
}

std::vector<int> term_candidates(const KnowledgeBase& kb,
                                 const std::vector<const Entity*>& roster,
                                 const Scenario& scenario, const Geometry& geom,
                                 const std::vector<int>& entity_of_slot,
                                 const std::vector<int>& slot_of_entity,
                                 const Term& term) {
  (void)kb;
  (void)geom;
  (void)slot_of_entity;
  std::vector<int> out;
  switch (term.kind) {
    case Term::Kind::Entity:
      for (size_t i = 0; i < roster.size(); ++i)
        if (roster[i]->id == term.id) { out.push_back(static_cast<int>(i)); break; }
      break;
    case Term::Kind::SlotRef: {
      int si = scenario.slot_index(term.id);
      if (si >= 0 && si < static_cast<int>(entity_of_slot.size()) &&
          entity_of_slot[si] >= 0)
        out.push_back(entity_of_slot[si]);
      break;
    }
    case Term::Kind::Desc:
      for (size_t i = 0; i < roster.size(); ++i) {
        auto it = roster[i]->properties.find(term.prop);
        if (it != roster[i]->properties.end() && it->second == term.value)
          out.push_back(static_cast<int>(i));
      }
      break;
    case Term::Kind::None:
      break;
  }
  return out;
}

bool eval_relation(const EvalContext& ctx, const RelationDecl& rel, int ea,
                   int eb, const std::optional<double>& param) {
  if (ea == eb) return false;
  const auto& roster = *ctx.roster;
  const RelSem& sem = rel.semantics;
  if (sem.kind == RelSem::Kind::NumCompare) {
    auto ita = roster[ea]->properties.find(sem.num_property);
    auto itb = roster[eb]->properties.find(sem.num_property);
    if (ita == roster[ea]->properties.end() ||
        itb == roster[eb]->properties.end())
      return false;
    if (!value_is_number(ita->second) || !value_is_number(itb->second))
      return false;
    double va = value_number(ita->second);
    double vb = value_number(itb->second);
    switch (sem.num_mode) {
      case RelSem::NumMode::DiffParam:
        return param && std::fabs((vb - va) - *param) < 1e-9;
      case RelSem::NumMode::ExcessParam:
        return param && std::fabs((va - vb) - *param) < 1e-9;
      case RelSem::NumMode::SumParam:
        return param && std::fabs((va + vb) - *param) < 1e-9;
      case RelSem::NumMode::Lt: return va < vb;
      case RelSem::NumMode::Gt: return va > vb;
    }
    return false;
  }
  int sa = (*ctx.slot_of_entity)[ea];
  int sb = (*ctx.slot_of_entity)[eb];
  if (sa < 0 || sb < 0) return false;
  if (sem.kind == RelSem::Kind::FamilyPath && !sem.subject_gender.empty()) {
    auto it = roster[ea]->properties.find("gender");
    if (it == roster[ea]->properties.end() ||
        !(it->second == Value(sem.subject_gender)))
      return false;
  }
  return relation_holds_slots(*ctx.scenario, *ctx.geom, rel, sa, sb, param);
}

bool eval_fact(const EvalContext& ctx, const Fact& fact) {
  const auto& kb = *ctx.kb;
  const auto& scenario = *ctx.scenario;
  const auto& roster = *ctx.roster;
  auto cands = term_candidates(kb, roster, scenario, *ctx.geom,
                               *ctx.entity_of_slot, *ctx.slot_of_entity,
                               fact.subject);
  bool inner = false;
  switch (fact.form) {
    case FactForm::SlotAssign: {
      int si = scenario.slot_index(fact.predicate);
      if (si < 0) throw VocabularyMismatch("unknown slot '" + fact.predicate + "'");
      for (int e : cands)
        if ((*ctx.entity_of_slot)[si] == e) { inner = true; break; }
      break;
    }
    case FactForm::Property: {
      if (is_region_property(scenario, fact.predicate)) {
        for (int e : cands) {
          int slot = (*ctx.slot_of_entity)[e];
          if (slot < 0) continue;
          auto rv = region_value(scenario, fact.predicate, slot);
          if (rv && Value(*rv) == fact.value) { inner = true; break; }
        }
      } else {
        kb.property_or_throw(fact.predicate);
        for (int e : cands) {
          auto it = roster[e]->properties.find(fact.predicate);
          if (it != roster[e]->properties.end() && it->second == fact.value) {
            inner = true;
            break;
          }
        }
      }
      break;
    }
    case FactForm::Relation: {
      const auto& rel = kb.relation_or_throw(fact.predicate);
      auto obj_cands = term_candidates(kb, roster, scenario, *ctx.geom,
                                       *ctx.entity_of_slot, *ctx.slot_of_entity,
                                       fact.object);
      for (int a : cands) {
        for (int b : obj_cands)
          if (eval_relation(ctx, rel, a, b, fact.param)) { inner = true; break; }
        if (inner) break;
      }
      break;
    }
  }
  return inner == fact.truth;
}

Precision compute_precision(const KnowledgeBase& kb, const Scenario& scenario,
                            const Geometry& geom,
                            const std::vector<const Entity*>& roster,
                            const Fact& fact) {
  auto desc_matches = [&](const Term& t) -> int {
    int n = 0;
    for (const auto* e : roster) {
      auto it = e->properties.find(t.prop);
      if (it != e->properties.end() && it->second == t.value) n++;
    }
    return n;
  };
  if (fact.subject.kind == Term::Kind::Desc && desc_matches(fact.subject) != 1)
    return Precision::Vague;
  if (fact.object.kind == Term::Kind::Desc && desc_matches(fact.object) != 1)
    return Precision::Vague;

  if (!fact.truth) {
    if (fact.form == FactForm::Property) {
      const auto* p = kb.find_property(fact.predicate);
      if (p && p->type == ValueType::Boolean) return Precision::Precise;
    }
    return Precision::Vague;
  }
  switch (fact.form) {
    case FactForm::SlotAssign:
      return Precision::Precise;
    case FactForm::Property: {
      for (const auto& reg : scenario.regions) {
        if (reg.property != fact.predicate) continue;
        int covered = 0;
        for (int s = 0; s < geom.n; ++s) {
          auto rv = region_value(scenario, fact.predicate, s);
          if (rv && Value(*rv) == fact.value) covered++;
        }
        return covered > 1 ? Precision::Vague : Precision::Precise;
      }
      return Precision::Precise;
    }
    case FactForm::Relation: {
      const auto& rel = kb.relation_or_throw(fact.predicate);
      return relation_exact(scenario, geom, rel, fact.param) ? Precision::Precise
                                                             : Precision::Vague;
    }
  }
  return Precision::Precise;
}

}  // namespace scoreforge
