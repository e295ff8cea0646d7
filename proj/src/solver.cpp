#include "scoreforge/solver.hpp"

#include <algorithm>

#include "scoreforge/errors.hpp"

namespace scoreforge {

namespace {

void check_vocabulary(const AssignmentSpace& space) {
  for (const auto& f : space.statements) {
    if (f.form == FactForm::Relation &&
        !space.scenario->relation_vocab.count(f.predicate))
      throw VocabularyMismatch("relation '" + f.predicate +
                               "' is not admissible in scenario " +
                               space.scenario->id);
    if (f.form == FactForm::Property &&
        !is_region_property(*space.scenario, f.predicate) &&
        !space.kb->find_property(f.predicate))
      throw VocabularyMismatch("unknown property '" + f.predicate + "'");
    if (f.form == FactForm::SlotAssign &&
        space.scenario->slot_index(f.predicate) < 0)
      throw VocabularyMismatch("unknown slot '" + f.predicate + "'");
  }
}

struct Enumerator {
  const AssignmentSpace& space;
  Geometry geom;
  int n_slots;
  int n_cands;
  std::vector<int> entity_of_slot;
  std::vector<int> slot_of_entity;
  EvalContext ctx;

  explicit Enumerator(const AssignmentSpace& space)
      : space(space), geom(Geometry::build(*space.scenario)) {
    n_slots = static_cast<int>(space.scenario->slots.size());
    n_cands = static_cast<int>(space.candidates.size());
    entity_of_slot.assign(n_slots, -1);
    slot_of_entity.assign(n_cands, -1);
    ctx.kb = space.kb;
    ctx.scenario = space.scenario;
    ctx.geom = &geom;
    ctx.roster = &space.candidates;
    ctx.entity_of_slot = &entity_of_slot;
    ctx.slot_of_entity = &slot_of_entity;
  }

  bool satisfies_all() {
    for (const auto& f : space.statements)
      if (!eval_fact(ctx, f)) return false;
    return true;
  }

  // Visits consistent assignments in lexicographic candidate order; the
  // visitor returns false to stop early.
  template <typename Fn>
  void enumerate(Fn&& visit) {
    recurse(0, visit);
  }

  template <typename Fn>
  bool recurse(int slot, Fn&& visit) {
    if (slot == n_slots) {
      if (!satisfies_all()) return true;
      return visit(entity_of_slot);
    }
    const std::string& slot_id = space.scenario->slots[slot].id;
    for (int e = 0; e < n_cands; ++e) {
      if (slot_of_entity[e] >= 0) continue;
      if (!entity_fits_slot(*space.scenario, *space.candidates[e], slot_id))
        continue;
      entity_of_slot[slot] = e;
      slot_of_entity[e] = slot;
      bool keep_going = recurse(slot + 1, visit);
      entity_of_slot[slot] = -1;
      slot_of_entity[e] = -1;
      if (!keep_going) return false;
    }
    return true;
  }

  AssignmentMap to_map(const std::vector<int>& eos) const {
    AssignmentMap m;
    for (int s = 0; s < n_slots; ++s)
      m[space.scenario->slots[s].id] = space.candidates[eos[s]]->id;
    return m;
  }
};

}  // namespace

std::vector<AssignmentMap> consistent_assignments(const AssignmentSpace& space) {
  check_vocabulary(space);
  Enumerator en(space);
  std::vector<AssignmentMap> out;
  en.enumerate([&](const std::vector<int>& eos) {
    out.push_back(en.to_map(eos));
    return true;
  });
  return out;
}

namespace {

// Stops as soon as two models are found.
int count_up_to_two(const AssignmentSpace& space) {
  Enumerator en(space);
  int count = 0;
  en.enumerate([&](const std::vector<int>&) {
    ++count;
    return count < 2;
  });
  return count;
}

}  // namespace

bool is_unique(const AssignmentSpace& space) {
  check_vocabulary(space);
  int count = count_up_to_two(space);
  if (count == 0)
    throw NoConsistentAssignment("no assignment satisfies the statement set");
  return count == 1;
}

std::vector<Fact> prune_to_minimal(const AssignmentSpace& space) {
  if (!is_unique(space))
    throw NotUnique("prune_to_minimal needs a uniquely pinned statement set");
  std::vector<Fact> kept = space.statements;
  // Newest statements first; the incremental selection loop makes them the
  // most likely to be redundant.
  for (int i = static_cast<int>(kept.size()) - 1; i >= 0; --i) {
    std::vector<Fact> trial = kept;
    trial.erase(trial.begin() + i);
    AssignmentSpace sub{space.kb, space.scenario, space.candidates, trial};
    int count = count_up_to_two(sub);
    if (count == 1) kept = std::move(trial);
  }
  return kept;
}

std::vector<std::string> answer_set(const AssignmentSpace& space,
                                    const Query& query, QueryMode mode) {
  check_vocabulary(space);

  // Completion pool by masked position.
  std::vector<std::pair<std::string, Fact>> completions;
  switch (query.mask) {
    case Query::Mask::Subject:
    case Query::Mask::Object: {
      for (const auto* e : space.candidates) {
        Fact f = query.fact;
        (query.mask == Query::Mask::Subject ? f.subject : f.object) =
            Term::entity(e->id);
        completions.emplace_back(e->id, std::move(f));
      }
      break;
    }
    case Query::Mask::Slot: {
      for (const auto& s : space.scenario->slots) {
        Fact f = query.fact;
        f.predicate = s.id;
        completions.emplace_back(s.id, std::move(f));
      }
      break;
    }
    case Query::Mask::Value: {
      if (query.fact.form != FactForm::Property)
        throw VocabularyMismatch("value masks apply to property assertions");
      std::vector<std::string> pool;
      if (is_region_property(*space.scenario, query.fact.predicate)) {
        for (const auto& reg : space.scenario->regions)
          if (reg.property == query.fact.predicate)
            for (const auto& [c, v] : reg.values)
              if (std::find(pool.begin(), pool.end(), v) == pool.end())
                pool.push_back(v);
      } else {
        const auto& decl = space.kb->property_or_throw(query.fact.predicate);
        if (decl.type == ValueType::Enum) {
          pool = decl.values;
        } else {
          std::set<std::string> seen;
          for (const auto* e : space.candidates) {
            auto it = e->properties.find(query.fact.predicate);
            if (it != e->properties.end() && seen.insert(value_key(it->second)).second)
              pool.push_back(value_key(it->second));
          }
        }
      }
      for (const auto& v : pool) {
        Fact f = query.fact;
        const auto* decl = space.kb->find_property(query.fact.predicate);
        if (decl && decl->type == ValueType::Number)
          f.value = std::stod(v);
        else if (decl && decl->type == ValueType::Boolean)
          f.value = v == "true";
        else
          f.value = v;
        completions.emplace_back(v, std::move(f));
      }
      break;
    }
  }

  Enumerator en(space);
  std::vector<std::vector<int>> models;
  en.enumerate([&](const std::vector<int>& eos) {
    models.push_back(eos);
    return mode == QueryMode::Precise ? models.size() < 2 : true;
  });
  if (models.empty())
    throw NoConsistentAssignment("no assignment satisfies the statement set");
  if (mode == QueryMode::Precise && models.size() > 1)
    throw NotUnique("precise queries need a uniquely pinned statement set");

  std::vector<std::string> out;
  for (const auto& [id, f] : completions) {
    bool ok = true;
    for (const auto& m : models) {
      en.entity_of_slot = m;
      std::fill(en.slot_of_entity.begin(), en.slot_of_entity.end(), -1);
      for (int s = 0; s < en.n_slots; ++s)
        if (m[s] >= 0) en.slot_of_entity[m[s]] = s;
      if (!eval_fact(en.ctx, f)) { ok = false; break; }
    }
    if (ok) out.push_back(id);
  }
  return out;
}

}  // namespace scoreforge
