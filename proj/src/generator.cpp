#include "scoreforge/generator.hpp"
#include <cmath>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <thread>

#include "scoreforge/errors.hpp"
#include "scoreforge/rules.hpp"

namespace scoreforge {

bool clue_eligible(const KnowledgeBase& kb, const Scenario& scenario,
                   const Fact& fact) {
  switch (fact.form) {
    case FactForm::SlotAssign:
      return true;
    case FactForm::Property:
      if (fact.predicate == "kind") return false;
      if (is_region_property(scenario, fact.predicate)) return true;
      return fact.subject.kind == Term::Kind::SlotRef;
    case FactForm::Relation: {
      const auto* rel = kb.find_relation(fact.predicate);
      if (!rel) return false;
      if (rel->semantics.kind == RelSem::Kind::NumCompare)
        return fact.subject.kind == Term::Kind::SlotRef ||
               fact.object.kind == Term::Kind::SlotRef;
      return true;
    }
  }
  return false;
}

Generator::Generator(const KnowledgeBase& kb, GenConfig config)
    : kb_(&kb), cfg_(std::move(config)) {
  for (const auto& scenario : kb.scenarios) {
    ScenarioCache cache;
    cache.scenario = &scenario;
    cache.geom = Geometry::build(scenario);
    cache.scenario_rules = expand_scenario_rules(kb, scenario, cache.geom);
    cache.candidates = candidate_entities(kb, scenario);
    caches_.emplace(scenario.id, std::move(cache));
  }
}

Generator::Skeleton Generator::instantiate(const Scenario& scenario,
                                           Rng& rng) const {
  const auto& cache = caches_.at(scenario.id);
  const auto& cands = cache.candidates;
  const size_t k = scenario.slots.size();
  if (cands.size() < k)
    throw UnsatisfiableScenario("scenario '" + scenario.id + "' offers " +
                                std::to_string(cands.size()) + " candidates for " +
                                std::to_string(k) + " slots");
  std::vector<size_t> idx(cands.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  // Uniform over constraint-respecting injective maps by rejection: a
  // uniform ordered k-sample either fits every slot or is redrawn.
  for (int attempt = 0; attempt < 500; ++attempt) {
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + rng.uniform(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    bool ok = true;
    for (size_t i = 0; i < k && ok; ++i)
      ok = entity_fits_slot(scenario, *cands[idx[i]], scenario.slots[i].id);
    if (!ok) continue;
    Skeleton out;
    for (size_t i = 0; i < k; ++i) {
      out.entities.push_back(cands[idx[i]]->id);
      out.assignment[scenario.slots[i].id] = cands[idx[i]]->id;
    }
    return out;
  }
  throw UnsatisfiableScenario("no constraint-respecting assignment found for '" +
                              scenario.id + "'");
}

namespace {

struct GroundTruth {
  std::vector<int> entity_of_slot;
  std::vector<int> slot_of_entity;
  EvalContext ev;
};

GroundTruth ground_truth(const ChainContext& ctx,
                         const std::map<std::string, std::string>& assignment) {
  GroundTruth gt;
  gt.entity_of_slot.assign(ctx.scenario->slots.size(), -1);
  gt.slot_of_entity.assign(ctx.roster->size(), -1);
  for (const auto& [slot, eid] : assignment) {
    int si = ctx.scenario->slot_index(slot);
    for (size_t i = 0; i < ctx.roster->size(); ++i)
      if ((*ctx.roster)[i]->id == eid) {
        gt.entity_of_slot[si] = static_cast<int>(i);
        gt.slot_of_entity[i] = si;
      }
  }
  gt.ev = EvalContext{ctx.kb,  ctx.scenario,        ctx.geom,
                      ctx.roster, &gt.entity_of_slot, &gt.slot_of_entity};
  return gt;
}

// Entity ids named outright (not through a descriptor or slot reference).
void collect_named_entities(const Fact& f, std::set<std::string>& out) {
  if (f.subject.kind == Term::Kind::Entity) out.insert(f.subject.id);
  if (f.object.kind == Term::Kind::Entity) out.insert(f.object.id);
}

double statement_weight(const KnowledgeBase& kb, const Fact& f) {
  double w = 1.0;
  if (f.form == FactForm::Relation)
    if (const auto* r = kb.find_relation(f.predicate)) w = std::max(w, r->weight);
  if (f.form == FactForm::Property)
    if (const auto* p = kb.find_property(f.predicate)) w = std::max(w, p->weight);
  for (const Term* t : {&f.subject, &f.object})
    if (t->kind == Term::Kind::Desc)
      if (const auto* p = kb.find_property(t->prop)) w = std::max(w, p->weight);
  return w;
}

std::string letter(size_t i) { return std::string(1, static_cast<char>('A' + i)); }

}  // namespace

GeneratedQuestion Generator::try_generate(const QuestionSpec& spec,
                                          uint64_t index, Rng& rng) const {
  const auto& cache = caches_.at(spec.scenario);
  const Scenario& scenario = *cache.scenario;
  const int n_slots = static_cast<int>(scenario.slots.size());
  const bool four_slots = n_slots == 4;

  Skeleton skel = instantiate(scenario, rng);
  std::vector<const Entity*> roster;
  for (const auto& id : skel.entities) roster.push_back(&kb_->entity_or_throw(id));
  ChainContext ctx{kb_, &scenario, &cache.geom, &roster};

  std::vector<Rule> rules = cache.scenario_rules;
  {
    auto inst = expand_instance_rules(*kb_, scenario, cache.geom, roster);
    rules.insert(rules.end(), inst.begin(), inst.end());
  }

  FactBase ground = init_facts(ctx, skel.assignment);
  chain_to_fixpoint(ground, rules, ctx);
  GroundTruth gt = ground_truth(ctx, skel.assignment);

  // Statement selection: add random facts until the solver confirms a unique
  // assignment, then prune to a 1-minimal subset. Selection is weighted
  // toward indirect clues (vague relations, descriptors, negations); direct
  // placements are admissible but rare, which is what stretches reasoning
  // chains.
  auto clue_weight = [&](const Fact& f) {
    double w = 1.0;
    switch (f.form) {
      case FactForm::SlotAssign:
        w = f.truth ? 0.25 : 1.5;
        break;
      case FactForm::Property:
        w = f.truth ? 0.6 : 1.5;
        break;
      case FactForm::Relation: {
        const auto& rel = kb_->relation_or_throw(f.predicate);
        bool exact = relation_exact(scenario, cache.geom, rel, f.param);
        w = exact ? 1.0 : 2.0;
        break;
      }
    }
    if (f.subject.kind == Term::Kind::Desc || f.object.kind == Term::Kind::Desc)
      w *= 1.5;
    if (f.subject.kind == Term::Kind::SlotRef ||
        f.object.kind == Term::Kind::SlotRef)
      w *= 1.3;
    return w;
  };
  std::vector<std::pair<double, int>> weighted;
  for (size_t i = 0; i < ground.size(); ++i) {
    const Fact& f = ground.fact(i);
    if (!clue_eligible(*kb_, scenario, f)) continue;
    // Weighted order without replacement (exponential keys).
    double u = rng.uniform_real();
    double key = std::pow(u <= 0 ? 1e-300 : u, 1.0 / clue_weight(f));
    weighted.emplace_back(-key, static_cast<int>(i));
  }
  std::sort(weighted.begin(), weighted.end());
  std::vector<int> pool_ids;
  pool_ids.reserve(weighted.size());
  for (const auto& [k, id] : weighted) pool_ids.push_back(id);

  AssignmentSpace space{kb_, &scenario, roster, {}};
  bool unique = false;
  for (int fid : pool_ids) {
    space.statements.push_back(ground.fact(fid));
    if (is_unique(space)) {
      unique = true;
      break;
    }
  }
  if (!unique) throw NoConsistentAssignment("statement pool failed to pin the assignment");
  if (cfg_.prune) space.statements = prune_to_minimal(space);

  GeneratedQuestion q;
  q.scenario = scenario.id;
  q.index = index;
  q.entities = skel.entities;
  q.assignment = skel.assignment;
  q.statements = space.statements;
  q.qtype = spec.qtype;
  for (const auto& f : q.statements) {
    int gid = ground.find_id(f.key());
    if (gid >= 0)
      q.statement_max_depth = std::max(q.statement_max_depth, ground.fact(gid).depth);
  }

  // Re-chain from the selected statements plus standalone entity knowledge;
  // question goals and hop counts live in this closure.
  std::vector<Fact> axioms;
  std::set<std::string> axiom_keys;
  for (Fact f : q.statements) {
    f.derivation.reset();
    f.depth = 0;
    f.labels = fact_own_labels(ctx, f);
    axiom_keys.insert(f.key());
    axioms.push_back(std::move(f));
  }
  for (const auto* e : roster)
    for (const auto& prop : kb_->properties) {
      auto it = e->properties.find(prop.id);
      if (it == e->properties.end()) continue;
      Fact f = Fact::property(Term::entity(e->id), prop.id, it->second);
      f.labels = fact_own_labels(ctx, f);
      f.precision = compute_precision(*kb_, scenario, cache.geom, roster, f);
      if (axiom_keys.insert(f.key()).second) axioms.push_back(std::move(f));
    }
  FactBase closure;
  for (const auto& a : axioms) closure.add(a);
  chain_to_fixpoint(closure, rules, ctx);

  // Derived, unstated, position-bearing facts make question material.
  std::vector<int> goal_ids;
  for (size_t i = 0; i < closure.size(); ++i) {
    const Fact& f = closure.fact(i);
    if (f.depth < 1) continue;
    if (!clue_eligible(*kb_, scenario, f)) continue;
    if (axiom_keys.count(f.key())) continue;
    goal_ids.push_back(static_cast<int>(i));
  }
  rng.shuffle(goal_ids);
  if (goal_ids.empty()) throw DegenerateOptions("no derivable question material");

  auto in_hop_range = [&](int hops) {
    if (spec.target_hops) return hops == *spec.target_hops;
    return hops >= cfg_.hop_min && hops <= cfg_.hop_max;
  };

  auto finish_answers = [&](std::vector<std::string> keys) {
    std::sort(keys.begin(), keys.end());
    q.answer_keys = std::move(keys);
  };

  if (spec.qtype == "precise" || spec.qtype == "vague") {
    const bool want_vague = spec.qtype == "vague";
    bool found = false;
    for (int gid : goal_ids) {
      const Fact& goal = closure.fact(gid);
      std::vector<Query::Mask> masks;
      if (goal.form == FactForm::SlotAssign) {
        masks = {Query::Mask::Subject, Query::Mask::Slot};
      } else if (goal.form == FactForm::Property) {
        if (goal.subject.kind != Term::Kind::SlotRef) masks = {Query::Mask::Subject};
      } else {
        masks = {Query::Mask::Subject, Query::Mask::Object};
      }
      for (auto mask : masks) {
        // Ground completions over the full pool, true under the ground truth.
        std::vector<std::string> pool_items;
        if (mask == Query::Mask::Slot)
          for (const auto& s : scenario.slots) pool_items.push_back(s.id);
        else
          for (const auto& id : skel.entities) pool_items.push_back(id);

        std::vector<std::string> true_items;
        int chain_depth = -1;
        int best_completion = -1;
        for (const auto& item : pool_items) {
          Fact completion = goal;
          if (mask == Query::Mask::Slot)
            completion.predicate = item;
          else if (mask == Query::Mask::Subject)
            completion.subject = Term::entity(item);
          else
            completion.object = Term::entity(item);
          if (!eval_fact(gt.ev, completion)) continue;
          true_items.push_back(item);
          int cid = closure.find_id(completion.key());
          if (cid >= 0 && closure.fact(cid).depth > chain_depth) {
            chain_depth = closure.fact(cid).depth;
            best_completion = cid;
          }
        }
        if (want_vague ? true_items.size() < 2 : true_items.size() != 1) continue;
        if (chain_depth < 1 || !in_hop_range(chain_depth)) continue;

        q.goal = goal;
        q.query = Query{goal, mask};
        q.chain = chain_from_closure(closure, best_completion);
        for (const auto& step : q.chain.steps)
          q.chain_steps.emplace_back(step.rule, closure.fact(step.fact));

        // Option rule: four-slot scenarios list the whole pool; otherwise
        // three sampled options plus "None of the above".
        if (four_slots || pool_items.size() == 4) {
          q.pool = pool_items;
          rng.shuffle(q.pool);
          q.none_option = false;
        } else {
          rng.shuffle(pool_items);
          q.pool.assign(pool_items.begin(), pool_items.begin() + 3);
          q.none_option = true;
        }
        std::vector<std::string> keys;
        for (size_t i = 0; i < q.pool.size(); ++i)
          if (std::find(true_items.begin(), true_items.end(), q.pool[i]) !=
              true_items.end())
            keys.push_back(letter(i));
        if (q.none_option && keys.empty()) keys.push_back(letter(q.pool.size()));
        if (keys.empty()) continue;  // four-slot vague with no option hit
        finish_answers(std::move(keys));
        found = true;
        break;
      }
      if (found) break;
    }
    if (!found)
      throw DegenerateOptions("no " + spec.qtype + " query in hop range");
  } else if (spec.qtype == "correct_statement" ||
             spec.qtype == "incorrect_statement") {
    const size_t option_count = four_slots ? 4 : 3;
    // Mixed truth values by construction; the answer key is never empty on
    // four-slot questions and degenerates to "None of the above" otherwise.
    size_t want_true = four_slots ? 1 + rng.uniform(3) : rng.uniform(option_count + 1);

    // True options come from the derived closure; false ones perturb them by
    // a single edit and are verified false against the ground truth.
    std::vector<Fact> trues, falses;
    std::set<std::string> used_keys;
    int chain_depth = 0;
    if (spec.target_hops && want_true > 0) {
      // Lead with a statement at exactly the target depth so the recorded
      // chain lands on it.
      for (int gid : goal_ids) {
        const Fact& f = closure.fact(gid);
        if (f.depth == *spec.target_hops) {
          used_keys.insert(f.key());
          trues.push_back(f);
          chain_depth = f.depth;
          break;
        }
      }
      if (trues.empty()) throw DegenerateOptions("no option at the target depth");
    }
    for (int gid : goal_ids) {
      if (trues.size() >= want_true) break;
      const Fact& f = closure.fact(gid);
      if (spec.target_hops && f.depth > *spec.target_hops) continue;
      if (!used_keys.insert(f.key()).second) continue;
      trues.push_back(f);
      chain_depth = std::max(chain_depth, f.depth);
    }
    if (trues.size() < want_true) throw DegenerateOptions("too few true options");

    auto perturb = [&](const Fact& source) -> std::optional<Fact> {
      for (int attempt = 0; attempt < 12; ++attempt) {
        Fact f = source;
        switch (f.form) {
          case FactForm::SlotAssign: {
            f.predicate = scenario.slots[rng.uniform(n_slots)].id;
            break;
          }
          case FactForm::Property: {
            if (is_region_property(scenario, f.predicate)) {
              std::vector<std::string> values;
              for (const auto& reg : scenario.regions)
                if (reg.property == f.predicate)
                  for (const auto& [c, v] : reg.values) values.push_back(v);
              if (values.empty()) return std::nullopt;
              f.value = values[rng.uniform(values.size())];
            } else if (std::holds_alternative<double>(f.value)) {
              double v = std::get<double>(f.value);
              f.value = rng.chance(0.5) ? v + 1 : std::max(0.0, v - 1);
            } else if (std::holds_alternative<bool>(f.value)) {
              f.value = !std::get<bool>(f.value);
            } else {
              const auto* decl = kb_->find_property(f.predicate);
              if (!decl || decl->values.empty()) return std::nullopt;
              f.value = decl->values[rng.uniform(decl->values.size())];
            }
            break;
          }
          case FactForm::Relation: {
            int strategy = static_cast<int>(rng.uniform(3));
            if (strategy == 0) {
              std::swap(f.subject, f.object);
            } else if (strategy == 1 && f.param) {
              double p = *f.param;
              f.param = rng.chance(0.5) ? p + 1 : std::max(1.0, p - 1);
            } else {
              // Swap in a sibling relation of the same shape.
              std::vector<std::string> others;
              const auto& self = kb_->relation_or_throw(f.predicate);
              for (const auto& rid : scenario.relation_vocab) {
                const auto& r = kb_->relation_or_throw(rid);
                if (rid != f.predicate && r.parameterized == self.parameterized)
                  others.push_back(rid);
              }
              if (others.empty()) continue;
              std::sort(others.begin(), others.end());
              f.predicate = others[rng.uniform(others.size())];
            }
            break;
          }
        }
        if (used_keys.count(f.key())) continue;
        try {
          if (eval_fact(gt.ev, f)) continue;  // still true, try again
        } catch (const Error&) {
          continue;
        }
        used_keys.insert(f.key());
        return f;
      }
      return std::nullopt;
    };

    std::vector<int> source_ids = goal_ids;
    rng.shuffle(source_ids);
    size_t si = 0;
    while (falses.size() < option_count - trues.size() && si < source_ids.size()) {
      const Fact& source = closure.fact(source_ids[si++]);
      if (spec.target_hops && source.depth > *spec.target_hops) continue;
      if (auto f = perturb(source)) {
        falses.push_back(*f);
        chain_depth = std::max(chain_depth, source.depth);
      }
    }
    if (trues.size() + falses.size() < option_count)
      throw DegenerateOptions("could not assemble a full option list");
    if (!in_hop_range(chain_depth))
      throw DegenerateOptions("statement options out of hop range");

    q.option_facts = trues;
    q.option_facts.insert(q.option_facts.end(), falses.begin(), falses.end());
    rng.shuffle(q.option_facts);
    q.none_option = !four_slots;

    const bool want_correct = spec.qtype == "correct_statement";
    std::vector<std::string> keys;
    Fact deepest_true;
    int deepest = -1;
    for (size_t i = 0; i < q.option_facts.size(); ++i) {
      bool truth = eval_fact(gt.ev, q.option_facts[i]);
      if (truth) {
        int cid = closure.find_id(q.option_facts[i].key());
        int d = cid >= 0 ? closure.fact(cid).depth : 0;
        if (d > deepest) {
          deepest = d;
          deepest_true = q.option_facts[i];
        }
      }
      if (truth == want_correct) keys.push_back(letter(i));
    }
    if (q.none_option && keys.empty()) keys.push_back(letter(q.option_facts.size()));
    if (keys.empty()) throw DegenerateOptions("statement options share one truth value");
    finish_answers(std::move(keys));

    q.goal = deepest >= 0 ? deepest_true : q.option_facts.front();
    if (deepest >= 0) {
      int gid = closure.find_id(q.goal.key());
      q.chain = chain_from_closure(closure, gid);
      for (const auto& step : q.chain.steps)
        q.chain_steps.emplace_back(step.rule, closure.fact(step.fact));
    }
    q.chain.hops = chain_depth;
  } else {
    throw UsageError("unknown question type '" + spec.qtype + "'");
  }

  // Seven label kinds: four from the facts, plus scenario, chain length, and
  // question type on the record itself.
  for (const auto& f : q.statements) {
    Labels own = fact_own_labels(ctx, f);
    q.labels.merge(own);
  }
  {
    int gid = closure.find_id(q.goal.key());
    if (gid >= 0) q.labels.merge(closure.fact(gid).labels);
    for (const auto& f : q.option_facts) {
      Labels own = fact_own_labels(ctx, f);
      q.labels.merge(own);
    }
  }
  q.domain = q.labels.domains.size() > 1 ? "mix" : *q.labels.domains.begin();

  // Difficulty features per the domain formulas.
  std::set<std::string> text_entities;
  for (const auto& f : q.statements) collect_named_entities(f, text_entities);
  std::set<std::string> question_entities;
  if (q.query) {
    Fact stem = q.query->fact;
    if (q.query->mask == Query::Mask::Subject) stem.subject = Term{};
    if (q.query->mask == Query::Mask::Object) stem.object = Term{};
    collect_named_entities(stem, question_entities);
    if (q.query->mask != Query::Mask::Slot)
      for (size_t i = 0; i < q.pool.size(); ++i)
        if (std::find(q.answer_keys.begin(), q.answer_keys.end(), letter(i)) !=
            q.answer_keys.end())
          question_entities.insert(q.pool[i]);
  }
  for (const auto& f : q.option_facts) collect_named_entities(f, question_entities);

  std::set<std::string> stem_entities;
  if (q.query) {
    Fact stem = q.query->fact;
    if (q.query->mask == Query::Mask::Subject) stem.subject = Term{};
    if (q.query->mask == Query::Mask::Object) stem.object = Term{};
    collect_named_entities(stem, stem_entities);
  }
  std::set<std::string> answer_entities;
  if (q.query && q.query->mask != Query::Mask::Slot)
    for (size_t i = 0; i < q.pool.size(); ++i)
      if (std::find(q.answer_keys.begin(), q.answer_keys.end(), letter(i)) !=
          q.answer_keys.end())
        answer_entities.insert(q.pool[i]);

  auto implicit = [&](const std::set<std::string>& ids) {
    for (const auto& id : ids)
      if (!text_entities.count(id)) return 1.0;
    return 0.0;
  };

  DifficultyFeatures& f = q.features;
  f.na = static_cast<double>(q.pool.size() + q.option_facts.size() +
                             (q.none_option ? 1 : 0));
  f.cl = q.chain.hops;
  f.lc = static_cast<double>(q.chain.steps.size());
  f.dc = scenario.cyclic ? 0.5 : 0.0;
  f.ne = 0;
  for (const auto& st : q.statements)
    if (st.form == FactForm::Relation) f.ne += 1;
  f.cg = 0;
  for (const auto& st : q.statements)
    f.cg = std::max(f.cg, statement_weight(*kb_, st));
  f.dk = 0;
  for (const auto& pid : q.labels.properties)
    if (const auto* p = kb_->find_property(pid)) f.dk = std::max(f.dk, p->weight);
  f.dq = 1.0;
  if (q.goal.form == FactForm::Relation)
    if (const auto* r = kb_->find_relation(q.goal.predicate)) f.dq = r->weight;
  f.kl = 0;
  for (const auto& pid : q.labels.properties)
    if (const auto* p = kb_->find_property(pid)) f.kl += p->weight;
  f.level_nature = f.kl;
  f.level_space = 0;
  {
    Fact g = q.goal;
    if (compute_precision(*kb_, scenario, cache.geom, roster, g) == Precision::Vague)
      f.level_space = 1;
  }
  f.nm_q = implicit(stem_entities);
  f.nm_a = implicit(answer_entities);
  if (q.domain == "space") {
    f.nm = static_cast<double>(q.entities.size());
    f.pr = question_entities.size() > 2 ? 1.0 : 0.0;
    f.al = 0;
    for (const auto& id : q.entities)
      if (!text_entities.count(id)) f.al = 1.0;
  } else {
    f.nm = implicit(question_entities);
    f.pr = 0;
    f.al = 0;
  }

  q.score = difficulty_score(q.domain, f);
  q.bucket = difficulty_bucket(cfg_.thresholds, q.domain, q.score);
  return q;
}

GeneratedQuestion Generator::generate_one(const QuestionSpec& spec,
                                          uint64_t index) const {
  kb_->scenario_or_throw(spec.scenario);
  static const char* kTypes[] = {"precise", "vague", "correct_statement",
                                 "incorrect_statement"};
  std::string last_error = "exhausted";
  for (int attempt = 0; attempt < cfg_.retry_budget; ++attempt) {
    Rng rng = Rng::child(cfg_.seed, index, static_cast<uint64_t>(attempt));
    QuestionSpec attempt_spec = spec;
    if (spec.qtype == "mixed") attempt_spec.qtype = kTypes[attempt % 4];
    try {
      return try_generate(attempt_spec, index, rng);
    } catch (const DegenerateOptions& e) {
      last_error = e.what();
    } catch (const NoConsistentAssignment& e) {
      last_error = e.what();
    }
  }
  if (spec.target_hops && spec.best_effort_target) {
    QuestionSpec fallback = spec;
    fallback.target_hops.reset();
    fallback.best_effort_target = false;
    return generate_one(fallback, index);
  }
  throw RetryBudgetExhausted("question " + std::to_string(index) + " (" +
                             spec.scenario + "/" + spec.qtype + ") failed after " +
                             std::to_string(cfg_.retry_budget) +
                             " attempts: " + last_error);
}

std::vector<GeneratedQuestion> Generator::generate_corpus(
    const std::vector<QuestionSpec>& plan) const {
  std::vector<GeneratedQuestion> out(plan.size());
  std::vector<std::exception_ptr> errors(plan.size());
  std::atomic<size_t> next{0};
  int jobs = std::max(1, cfg_.jobs);
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= plan.size()) return;
      try {
        out[i] = generate_one(plan[i], i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<QuestionSpec> build_plan(const KnowledgeBase& kb, int count,
                                     const std::string& scenario,
                                     const std::string& qtype, int hop_min,
                                     int hop_max) {
  std::vector<std::string> order;
  if (scenario.empty())
    for (const auto& s : kb.scenarios) order.push_back(s.id);
  else
    order.push_back(kb.scenario_or_throw(scenario).id);

  std::string anchor = order.front();
  if (scenario.empty()) {
    size_t best = 0;
    for (const auto& s : kb.scenarios) {
      bool has_regions = !s.regions.empty();
      size_t rank = s.slots.size() + (has_regions ? 100 : 0);
      if (rank > best) {
        best = rank;
        anchor = s.id;
      }
    }
  }

  static const char* kTypes[] = {"precise", "vague", "correct_statement",
                                 "incorrect_statement"};
  std::vector<QuestionSpec> plan;
  int stratum = 0;
  for (int i = 0; i < count; ++i) {
    QuestionSpec spec;
    spec.scenario = order[i % order.size()];
    spec.qtype = qtype == "mixed" ? kTypes[(i / order.size()) % 4] : qtype;
    if (hop_min == hop_max) {
      spec.target_hops = hop_min;
    } else if (i % 20 == 19) {
      // Hop stratum: pin one question in twenty to a cycled target so the
      // corpus covers the whole range.
      spec.target_hops = hop_min + (stratum % (hop_max - hop_min + 1));
      spec.best_effort_target = true;
      ++stratum;
      spec.scenario = anchor;
      spec.qtype = qtype == "mixed" ? "mixed" : qtype;
    }
    plan.push_back(std::move(spec));
  }
  return plan;
}

nlohmann::json question_record(const KnowledgeBase& kb, const TemplateTable& table,
                               const GeneratedQuestion& q,
                               const std::string& locale, uint64_t master_seed) {
  const Scenario& scenario = kb.scenario_or_throw(q.scenario);
  RenderContext rc{&kb, &scenario, &table, locale};

  nlohmann::json rec;
  char idbuf[64];
  std::snprintf(idbuf, sizeof(idbuf), "%s-%05llu-%s", q.scenario.c_str(),
                static_cast<unsigned long long>(q.index), locale.c_str());
  rec["id"] = idbuf;
  rec["seed"] = master_seed;
  rec["locale"] = locale;
  rec["domain"] = q.domain;
  rec["scenario"] = q.scenario;

  std::string context = render_context_text(rc, q.statements, q.entities);
  rec["context_text"] = context;

  std::vector<std::pair<std::string, std::string>> options;
  std::string stem;
  if (q.query) {
    stem = render_masked_fact(rc, q.query->fact, q.query->mask);
    for (size_t i = 0; i < q.pool.size(); ++i)
      options.emplace_back(letter(i),
                           render_pool_item(rc, q.query->mask, q.pool[i]));
  } else {
    stem = table.lookup(locale, "stem." + q.qtype);
    for (size_t i = 0; i < q.option_facts.size(); ++i)
      options.emplace_back(letter(i), render_fact(rc, q.option_facts[i]));
  }
  if (q.none_option)
    options.emplace_back(letter(options.size()), table.lookup(locale, "option.none"));
  rec["question_text"] = stem;
  auto opts = nlohmann::json::array();
  for (const auto& [k, text] : options) opts.push_back({{"key", k}, {"text", text}});
  rec["options"] = std::move(opts);
  rec["answer"] = q.answer_keys;
  rec["prompt"] = render_prompt(rc, context, stem, options);

  nlohmann::json labels = q.labels.to_json();
  labels["scenarios"] = std::vector<std::string>{q.scenario};
  labels["chain_length"] = q.chain.hops;
  labels["question_type"] = q.qtype;
  rec["labels"] = std::move(labels);

  rec["difficulty"] = {{"features", q.features.to_json(q.domain)},
                       {"score", q.score},
                       {"bucket", q.bucket}};

  nlohmann::json steps = nlohmann::json::array();
  for (const auto& [rule, fact] : q.chain_steps)
    steps.push_back({{"rule", rule}, {"fact", render_fact(rc, fact)}});
  rec["chain"] = {{"length", q.chain.hops},
                  {"statement_max_depth", q.statement_max_depth},
                  {"steps", std::move(steps)}};

  nlohmann::json puzzle;
  puzzle["entities"] = q.entities;
  nlohmann::json assign = nlohmann::json::object();
  for (const auto& [slot, eid] : q.assignment) assign[slot] = eid;
  puzzle["assignment"] = std::move(assign);
  auto stmts = nlohmann::json::array();
  for (const auto& f : q.statements) stmts.push_back(f.to_json());
  puzzle["statements"] = std::move(stmts);
  if (q.query) {
    const char* mask = "subject";
    switch (q.query->mask) {
      case Query::Mask::Subject: mask = "subject"; break;
      case Query::Mask::Object: mask = "object"; break;
      case Query::Mask::Slot: mask = "slot"; break;
      case Query::Mask::Value: mask = "value"; break;
    }
    puzzle["query"] = {{"fact", q.query->fact.to_json()}, {"mask", mask}};
    puzzle["pool"] = q.pool;
  } else {
    auto ofacts = nlohmann::json::array();
    for (const auto& f : q.option_facts) ofacts.push_back(f.to_json());
    puzzle["option_facts"] = std::move(ofacts);
  }
  puzzle["none_option"] = q.none_option;
  rec["puzzle"] = std::move(puzzle);
  return rec;
}

size_t emit_dataset(const std::vector<nlohmann::json>& records,
                    const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  fs::path tmp = out;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw SinkError("cannot open " + tmp.string() + " for writing");
    for (const auto& rec : records) {
      os << rec.dump() << "\n";
      if (!os) throw SinkError("write failed on " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, out, ec);
  if (ec) {
    fs::remove(tmp);
    throw SinkError("rename to " + out.string() + " failed: " + ec.message());
  }
  return records.size();
}

}  // namespace scoreforge
