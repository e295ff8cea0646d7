#include "scoreforge/reasoner.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <memory>

#include "scoreforge/errors.hpp"

namespace scoreforge {

namespace {

std::string fp_key(FactForm form, const std::string& pred) {
  const char* f = form == FactForm::Property ? "p|"
                  : form == FactForm::SlotAssign ? "s|" : "r|";
  return f + pred;
}

// Hole bindings live as pointers into the fact base, which is stable while
// a round is being matched; conclusions copy on instantiation.
struct Bindings {
  std::array<const Term*, 26> terms{};
  std::array<const Value*, 26> values{};
  // Backing store for values materialized during matching (relation
  // parameters); deque keeps pointers stable.
  std::shared_ptr<std::deque<Value>> owned;

  static int slot(char hole) { return hole - 'A'; }

  bool bind_term(char hole, const Term& t, bool desc_ok) {
    // Descriptor terms are existential ("a red item"): two occurrences only
    // co-refer when the descriptor is unique, which dedicated resolution
    // rules handle. A hole may carry a descriptor only where the same
    // witness flows from a single positive premise to a positive conclusion.
    if (t.kind == Term::Kind::Desc && !desc_ok) return false;
    int i = slot(hole);
    if (terms[i]) return *terms[i] == t;
    // Distinct placeholders denote distinct terms.
    for (const Term* bound : terms)
      if (bound && *bound == t) return false;
    terms[i] = &t;
    return true;
  }

  bool bind_value(char hole, const Value& v) {
    int i = slot(hole);
    if (values[i]) return *values[i] == v;
    values[i] = &v;
    return true;
  }

  bool bind_value_owned(char hole, Value v) {
    int i = slot(hole);
    if (values[i]) return *values[i] == v;
    if (!owned) owned = std::make_shared<std::deque<Value>>();
    owned->push_back(std::move(v));
    values[i] = &owned->back();
    return true;
  }
};

// Holes that may carry a descriptor term: appearing in at most one premise,
// with that premise and the conclusion (if it mentions the hole) positive.
std::set<char> desc_capable_holes(const Rule& rule) {
  std::map<char, int> premise_count;
  std::map<char, bool> positive;
  auto scan = [&](const Pattern& p, bool is_premise) {
    for (const PatternTerm* t : {&p.subject, &p.object}) {
      if (t->kind != PatternTerm::Kind::Hole) continue;
      if (is_premise) premise_count[t->hole]++;
      auto it = positive.find(t->hole);
      positive[t->hole] = (it == positive.end() ? true : it->second) && p.truth;
    }
  };
  for (const auto& p : rule.premises) scan(p, true);
  scan(rule.conclusion, false);
  std::set<char> ok;
  for (const auto& [h, n] : premise_count)
    if (n <= 1 && positive[h]) ok.insert(h);
  return ok;
}

bool match_term(const PatternTerm& p, const Term& t, Bindings& b,
                const std::set<char>& desc_ok) {
  if (p.kind == PatternTerm::Kind::Const) return p.term == t;
  if (p.entity_hole && t.kind != Term::Kind::Entity) return false;
  return b.bind_term(p.hole, t, desc_ok.count(p.hole) > 0);
}

bool match_value(const PatternValue& p, const Value& v, Bindings& b) {
  if (p.kind == PatternValue::Kind::Const) return p.value == v;
  return b.bind_value(p.hole, v);
}

bool match_pattern(const Pattern& p, const Fact& f, Bindings& b,
                   const std::set<char>& desc_ok) {
  if (p.form != f.form || p.predicate != f.predicate || p.truth != f.truth)
    return false;
  if (!match_term(p.subject, f.subject, b, desc_ok)) return false;
  switch (p.form) {
    case FactForm::Property:
      return match_value(p.value, f.value, b);
    case FactForm::Relation: {
      if (!match_term(p.object, f.object, b, desc_ok)) return false;
      if (p.param.has_value() != f.param.has_value()) return false;
      if (p.param) {
        if (p.param->kind == PatternValue::Kind::Const)
          return p.param->value == Value(*f.param);
        return b.bind_value_owned(p.param->hole, Value(*f.param));
      }
      return true;
    }
    case FactForm::SlotAssign:
      return true;
  }
  return false;
}

Term instantiate_term(const PatternTerm& p, const Bindings& b) {
  if (p.kind == PatternTerm::Kind::Const) return p.term;
  const Term* t = b.terms[Bindings::slot(p.hole)];
  if (!t) throw NotDerivable(std::string("unbound placeholder '") + p.hole + "'");
  return *t;
}

Value instantiate_value(const PatternValue& p, const Bindings& b) {
  if (p.kind == PatternValue::Kind::Const) return p.value;
  const Value* v = b.values[Bindings::slot(p.hole)];
  if (!v) throw NotDerivable(std::string("unbound placeholder '") + p.hole + "'");
  return *v;
}

Fact instantiate(const Pattern& p, const Bindings& b) {
  Fact f;
  f.form = p.form;
  f.truth = p.truth;
  f.predicate = p.predicate;
  f.subject = instantiate_term(p.subject, b);
  if (p.form == FactForm::Property) f.value = instantiate_value(p.value, b);
  if (p.form == FactForm::Relation) {
    f.object = instantiate_term(p.object, b);
    if (p.param) f.param = value_number(instantiate_value(*p.param, b));
  }
  return f;
}

}  // namespace

Labels fact_own_labels(const ChainContext& ctx, const Fact& f) {
  Labels l;
  auto add_term = [&](const Term& t) {
    if (t.kind == Term::Kind::Entity) l.entities.insert(t.id);
    if (t.kind == Term::Kind::Desc) {
      l.properties.insert(t.prop);
      if (const auto* p = ctx.kb->find_property(t.prop)) l.domains.insert(p->domain);
    }
  };
  add_term(f.subject);
  add_term(f.object);
  switch (f.form) {
    case FactForm::Property: {
      l.properties.insert(f.predicate);
      if (const auto* p = ctx.kb->find_property(f.predicate))
        l.domains.insert(p->domain);
      break;
    }
    case FactForm::Relation: {
      l.relations.insert(f.predicate);
      if (const auto* r = ctx.kb->find_relation(f.predicate))
        l.domains.insert(r->domain);
      break;
    }
    case FactForm::SlotAssign:
      l.domains.insert(ctx.scenario->domain);
      break;
  }
  return l;
}

int FactBase::add(Fact fact) {
  std::string key = fact.key();
  auto it = by_key_.find(key);
  if (it != by_key_.end()) return it->second;
  int id = static_cast<int>(facts_.size());
  facts_.push_back(std::move(fact));
  by_key_.emplace(std::move(key), id);
  const Fact& f = facts_[id];
  form_pred_[fp_key(f.form, f.predicate)].push_back(id);
  form_pred_subj_[fp_key(f.form, f.predicate) + "|" + f.subject.key()].push_back(id);
  return id;
}

const Fact* FactBase::find(const std::string& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &facts_[it->second];
}

int FactBase::find_id(const std::string& key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? -1 : it->second;
}

const std::vector<int>& FactBase::by_form_pred(FactForm form,
                                               const std::string& pred) const {
  static const std::vector<int> kEmpty;
  auto it = form_pred_.find(fp_key(form, pred));
  return it == form_pred_.end() ? kEmpty : it->second;
}

const std::vector<int>& FactBase::by_form_pred_subj(FactForm form,
                                                    const std::string& pred,
                                                    const Term& subject) const {
  static const std::vector<int> kEmpty;
  auto it = form_pred_subj_.find(fp_key(form, pred) + "|" + subject.key());
  return it == form_pred_subj_.end() ? kEmpty : it->second;
}

FactBase init_facts(const ChainContext& ctx,
                    const std::map<std::string, std::string>& assignment) {
  const auto& kb = *ctx.kb;
  const auto& scenario = *ctx.scenario;
  const auto& roster = *ctx.roster;
  const int n = static_cast<int>(scenario.slots.size());

  if (assignment.size() != static_cast<size_t>(n))
    throw NonInjectiveAssignment("assignment must cover every slot exactly once");
  std::map<std::string, std::string> entity_to_slot;
  for (const auto& [slot, eid] : assignment) {
    if (scenario.slot_index(slot) < 0)
      throw UnknownScenario("unknown slot '" + slot + "'");
    if (!entity_to_slot.emplace(eid, slot).second)
      throw NonInjectiveAssignment("entity '" + eid + "' fills two slots");
  }
  for (const auto& [slot, eid] : assignment) {
    const auto& e = kb.entity_or_throw(eid);
    if (!entity_fits_slot(scenario, e, slot))
      throw ConstraintViolation("entity '" + eid + "' violates the constraint of slot '" +
                                slot + "'");
  }

  std::vector<int> entity_of_slot(n, -1);
  std::vector<int> slot_of_entity(roster.size(), -1);
  for (const auto& [slot, eid] : assignment) {
    int si = scenario.slot_index(slot);
    int ei = -1;
    for (size_t i = 0; i < roster.size(); ++i)
      if (roster[i]->id == eid) { ei = static_cast<int>(i); break; }
    if (ei < 0)
      throw ConstraintViolation("assigned entity '" + eid + "' is not in the roster");
    entity_of_slot[si] = ei;
    slot_of_entity[ei] = si;
  }

  FactBase fb;
  auto add0 = [&](Fact f) {
    f.depth = 0;
    f.labels = fact_own_labels(ctx, f);
    f.precision = compute_precision(kb, scenario, *ctx.geom, roster, f);
    fb.add(std::move(f));
  };

  for (int si = 0; si < n; ++si) {
    int ei = entity_of_slot[si];
    Fact f = Fact::slot_assign(Term::entity(roster[ei]->id), scenario.slots[si].id);
    if (scenario.geometry == GeometryKind::Cycle)
      f.time = static_cast<double>(scenario.slots[si].col);
    add0(std::move(f));
  }
  for (const auto* e : roster)
    for (const auto& prop : kb.properties) {
      auto it = e->properties.find(prop.id);
      if (it == e->properties.end()) continue;
      add0(Fact::property(Term::entity(e->id), prop.id, it->second));
    }

  // Base relations forced by the layout between occupants.
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (!relation_slot_determined(rel)) continue;
    std::vector<std::optional<double>> params;
    if (rel.parameterized)
      for (int k = 1; k < n; ++k) params.push_back(static_cast<double>(k));
    else
      params.push_back(std::nullopt);
    for (int sa = 0; sa < n; ++sa)
      for (int sb = 0; sb < n; ++sb) {
        if (sa == sb) continue;
        for (const auto& param : params)
          if (relation_holds_slots(scenario, *ctx.geom, rel, sa, sb, param))
            add0(Fact::relation(Term::entity(roster[entity_of_slot[sa]]->id),
                                rel.id,
                                Term::entity(roster[entity_of_slot[sb]]->id),
                                param));
      }
  }
  return fb;
}

void chain_to_fixpoint(FactBase& fb, const std::vector<Rule>& rules,
                       const ChainContext& ctx) {
  // Premise index: (form, predicate) -> [(rule idx, premise idx)].
  std::unordered_map<std::string, std::vector<std::pair<int, int>>> premise_index;
  std::vector<std::set<char>> desc_ok(rules.size());
  for (size_t ri = 0; ri < rules.size(); ++ri) {
    desc_ok[ri] = desc_capable_holes(rules[ri]);
    for (size_t pi = 0; pi < rules[ri].premises.size(); ++pi) {
      const auto& p = rules[ri].premises[pi];
      premise_index[fp_key(p.form, p.predicate)].push_back(
          {static_cast<int>(ri), static_cast<int>(pi)});
    }
  }

  std::vector<int> frontier(fb.size());
  for (size_t i = 0; i < fb.size(); ++i) frontier[i] = static_cast<int>(i);

  int round = 0;
  while (!frontier.empty()) {
    ++round;
    std::vector<std::tuple<Fact, std::string, std::vector<int>>> pending;
    for (int fid : frontier) {
      const Fact trigger = fb.fact(fid);
      auto idx = premise_index.find(fp_key(trigger.form, trigger.predicate));
      if (idx == premise_index.end()) continue;
      for (const auto& [ri, pi] : idx->second) {
        const Rule& rule = rules[ri];
        Bindings b;
        if (!match_pattern(rule.premises[pi], trigger, b, desc_ok[ri])) continue;
        if (rule.premises.size() == 1) {
          try {
            Fact derived = instantiate(rule.conclusion, b);
            pending.emplace_back(std::move(derived), rule.id, std::vector<int>{fid});
          } catch (const NotDerivable&) {
          }
          continue;
        }
        int other = 1 - pi;
        const auto& op = rule.premises[other];
        // Narrow the partner scan when the other premise's subject is
        // already fixed by the trigger's bindings.
        const std::vector<int>* partners = nullptr;
        if (op.subject.kind == PatternTerm::Kind::Const) {
          partners = &fb.by_form_pred_subj(op.form, op.predicate, op.subject.term);
        } else {
          const Term* bound = b.terms[Bindings::slot(op.subject.hole)];
          if (bound)
            partners = &fb.by_form_pred_subj(op.form, op.predicate, *bound);
          else
            partners = &fb.by_form_pred(op.form, op.predicate);
        }
        for (int pid : *partners) {
          Bindings b2 = b;
          if (!match_pattern(op, fb.fact(pid), b2, desc_ok[ri])) continue;
          try {
            Fact derived = instantiate(rule.conclusion, b2);
            std::vector<int> prem(2);
            prem[pi] = fid;
            prem[other] = pid;
            pending.emplace_back(std::move(derived), rule.id, std::move(prem));
          } catch (const NotDerivable&) {
          }
        }
      }
    }
    std::vector<int> next;
    for (auto& [fact, rule_id, premises] : pending) {
      if (fb.find_id(fact.key()) >= 0) continue;
      int depth = 0;
      Labels labels;
      for (int pid : premises) {
        depth = std::max(depth, fb.fact(pid).depth);
        labels.merge(fb.fact(pid).labels);
      }
      Labels own = fact_own_labels(ctx, fact);
      labels.merge(own);
      fact.depth = depth + 1;
      fact.labels = std::move(labels);
      fact.derivation = Derivation{rule_id, premises};
      fact.precision =
          compute_precision(*ctx.kb, *ctx.scenario, *ctx.geom, *ctx.roster, fact);
      next.push_back(fb.add(std::move(fact)));
    }
    frontier = std::move(next);
  }
  fb.closed = true;
}

DerivationChain chain_from_closure(const FactBase& closure, int goal_id) {
  DerivationChain chain;
  chain.hops = closure.fact(goal_id).depth;
  std::set<int> support;
  std::vector<int> stack{goal_id};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const Fact& f = closure.fact(id);
    if (!f.derivation) continue;
    if (!support.insert(id).second) continue;
    for (int pid : f.derivation->premises) stack.push_back(pid);
  }
  std::vector<int> ordered(support.begin(), support.end());
  std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
    if (closure.fact(a).depth != closure.fact(b).depth)
      return closure.fact(a).depth < closure.fact(b).depth;
    return a < b;
  });
  for (int id : ordered)
    chain.steps.push_back({closure.fact(id).derivation->rule, id});
  return chain;
}

DerivationChain derivation_chain(const ChainContext& ctx,
                                 const std::vector<Rule>& rules,
                                 const Fact& goal,
                                 const std::vector<Fact>& axioms,
                                 FactBase* rechained) {
  FactBase fb;
  for (Fact a : axioms) {
    a.depth = 0;
    a.derivation.reset();
    fb.add(std::move(a));
  }
  chain_to_fixpoint(fb, rules, ctx);
  int gid = fb.find_id(goal.key());
  if (gid < 0) throw NotDerivable("goal not derivable from the axioms: " + goal.key());
  DerivationChain chain = chain_from_closure(fb, gid);
  if (rechained) *rechained = std::move(fb);
  return chain;
}

}  // namespace scoreforge
