#include "scoreforge/rules.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace scoreforge {

namespace {

PatternTerm hole(char c) {
  PatternTerm t;
  t.kind = PatternTerm::Kind::Hole;
  t.hole = c;
  return t;
}

PatternTerm ehole(char c) {
  PatternTerm t = hole(c);
  t.entity_hole = true;
  return t;
}

PatternTerm cterm(Term term) {
  PatternTerm t;
  t.term = std::move(term);
  return t;
}

PatternValue vhole(char c) {
  PatternValue v;
  v.kind = PatternValue::Kind::Hole;
  v.hole = c;
  return v;
}

PatternValue cval(Value v) {
  PatternValue pv;
  pv.value = std::move(v);
  return pv;
}

Pattern slot_pat(PatternTerm subject, std::string slot) {
  Pattern p;
  p.form = FactForm::SlotAssign;
  p.subject = std::move(subject);
  p.predicate = std::move(slot);
  return p;
}

Pattern prop_pat(PatternTerm subject, std::string prop, PatternValue value) {
  Pattern p;
  p.form = FactForm::Property;
  p.subject = std::move(subject);
  p.predicate = std::move(prop);
  p.value = std::move(value);
  return p;
}

Pattern rel_pat(PatternTerm subject, std::string rel, PatternTerm object,
                std::optional<PatternValue> param = std::nullopt) {
  Pattern p;
  p.form = FactForm::Relation;
  p.subject = std::move(subject);
  p.predicate = std::move(rel);
  p.object = std::move(object);
  p.param = std::move(param);
  return p;
}

Rule make_rule(std::string id, RuleKind kind, std::vector<Pattern> premises,
               Pattern conclusion) {
  Rule r;
  r.id = std::move(id);
  r.kind = kind;
  r.premises = std::move(premises);
  r.conclusion = std::move(conclusion);
  return r;
}

std::optional<PatternValue> param_hole(const RelationDecl& rel) {
  if (rel.parameterized) return vhole('V');
  return std::nullopt;
}

// Region lookup by axis for region-pair rules.
const RegionDecl* region_for_axis(const Scenario& s, RegionDecl::Axis axis) {
  for (const auto& r : s.regions)
    if (r.axis == axis) return &r;
  return nullptr;
}

int axis_coord(const Scenario& s, int slot, RegionDecl::Axis axis) {
  return axis == RegionDecl::Axis::Row ? s.slots[slot].row : s.slots[slot].col;
}

}  // namespace

bool rule_applicable(const KnowledgeBase& kb, const Rule& rule,
                     const Scenario& scenario) {
  if (!rule.guard_scenarios.empty() && !rule.guard_scenarios.count(scenario.id))
    return false;
  if (!rule.guard_domains.empty() && !rule.guard_domains.count(scenario.domain))
    return false;
  auto check = [&](const Pattern& p) {
    if (p.form == FactForm::Relation && !scenario.relation_vocab.count(p.predicate))
      return false;
    if (p.form == FactForm::SlotAssign && scenario.slot_index(p.predicate) < 0)
      return false;
    return true;
  };
  for (const auto& p : rule.premises)
    if (!check(p)) return false;
  return check(rule.conclusion);
}

std::vector<Rule> expand_scenario_rules(const KnowledgeBase& kb,
                                        const Scenario& scenario,
                                        const Geometry& geom) {
  std::vector<Rule> out;
  const int n = geom.n;

  for (const auto& rule : kb.rules)
    if (rule_applicable(kb, rule, scenario)) out.push_back(rule);

  // Symmetry and inverse equivalences from relation metadata.
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (rel.symmetric)
      out.push_back(make_rule("sym." + rel.id, RuleKind::Equivalence,
                              {rel_pat(hole('X'), rel.id, hole('Y'), param_hole(rel))},
                              rel_pat(hole('Y'), rel.id, hole('X'), param_hole(rel))));
    if (rel.inverse && scenario.relation_vocab.count(*rel.inverse))
      out.push_back(make_rule("inv." + rel.id, RuleKind::Equivalence,
                              {rel_pat(hole('X'), rel.id, hole('Y'), param_hole(rel))},
                              rel_pat(hole('Y'), *rel.inverse, hole('X'), param_hole(rel))));
  }

  // Slot-pair introduction and pinning rules for layout-determined relations.
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (!relation_slot_determined(rel)) continue;
    std::vector<std::optional<double>> params;
    if (rel.parameterized)
      for (int k = 1; k < n; ++k) params.push_back(static_cast<double>(k));
    else
      params.push_back(std::nullopt);

    for (const auto& param : params) {
      std::string suffix = param ? "." + format_number(*param) : "";
      for (int sa = 0; sa < n; ++sa) {
        for (int sb = 0; sb < n; ++sb) {
          if (sa == sb) continue;
          if (!relation_holds_slots(scenario, geom, rel, sa, sb, param)) continue;
          std::optional<PatternValue> pv;
          if (param) pv = cval(Value(*param));
          out.push_back(make_rule(
              "geo." + rel.id + suffix + "." + scenario.slots[sa].id + "." +
                  scenario.slots[sb].id,
              RuleKind::Join,
              {slot_pat(hole('X'), scenario.slots[sa].id),
               slot_pat(hole('Y'), scenario.slots[sb].id)},
              rel_pat(hole('X'), rel.id, hole('Y'), pv)));
        }
      }
      // Pins: a placed end plus the relation forces the other end's slot.
      for (int sk = 0; sk < n; ++sk) {
        std::vector<int> subj_slots, obj_slots;
        for (int s = 0; s < n; ++s) {
          if (s == sk) continue;
          if (relation_holds_slots(scenario, geom, rel, s, sk, param))
            subj_slots.push_back(s);
          if (relation_holds_slots(scenario, geom, rel, sk, s, param))
            obj_slots.push_back(s);
        }
        std::optional<PatternValue> pv;
        if (param) pv = cval(Value(*param));
        if (subj_slots.size() == 1)
          out.push_back(make_rule(
              "pin." + rel.id + suffix + ".obj_at." + scenario.slots[sk].id,
              RuleKind::Join,
              {slot_pat(hole('X'), scenario.slots[sk].id),
               rel_pat(hole('Y'), rel.id, hole('X'), pv)},
              slot_pat(hole('Y'), scenario.slots[subj_slots[0]].id)));
        if (obj_slots.size() == 1)
          out.push_back(make_rule(
              "pin." + rel.id + suffix + ".subj_at." + scenario.slots[sk].id,
              RuleKind::Join,
              {slot_pat(hole('X'), scenario.slots[sk].id),
               rel_pat(hole('X'), rel.id, hole('Y'), pv)},
              slot_pat(hole('Y'), scenario.slots[obj_slots[0]].id)));
      }
    }
  }

  // Region membership from slots, slots from full region coordinates, and
  // region-pair rules for relations that constrain a single axis.
  for (const auto& reg : scenario.regions) {
    for (int s = 0; s < n; ++s) {
      auto rv = region_value(scenario, reg.property, s);
      if (!rv) continue;
      out.push_back(make_rule("reg." + reg.property + "." + scenario.slots[s].id,
                              RuleKind::Equivalence,
                              {slot_pat(hole('X'), scenario.slots[s].id)},
                              prop_pat(hole('X'), reg.property, cval(Value(*rv)))));
    }
  }
  const RegionDecl* row_reg = region_for_axis(scenario, RegionDecl::Axis::Row);
  const RegionDecl* col_reg = region_for_axis(scenario, RegionDecl::Axis::Col);
  if (row_reg && col_reg) {
    for (int s = 0; s < n; ++s) {
      auto rv = region_value(scenario, row_reg->property, s);
      auto cv = region_value(scenario, col_reg->property, s);
      if (!rv || !cv) continue;
      out.push_back(make_rule(
          "regpin." + scenario.slots[s].id, RuleKind::Join,
          {prop_pat(ehole('X'), row_reg->property, cval(Value(*rv))),
           prop_pat(ehole('X'), col_reg->property, cval(Value(*cv)))},
          slot_pat(ehole('X'), scenario.slots[s].id)));
    }
  }
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (rel.semantics.kind != RelSem::Kind::Grid || rel.parameterized) continue;
    bool row_only = rel.semantics.col.op == RelSem::Comp::Op::Any &&
                    rel.semantics.row.op != RelSem::Comp::Op::Any;
    bool col_only = rel.semantics.row.op == RelSem::Comp::Op::Any &&
                    rel.semantics.col.op != RelSem::Comp::Op::Any;
    if (!row_only && !col_only) continue;
    auto axis = row_only ? RegionDecl::Axis::Row : RegionDecl::Axis::Col;
    const RegionDecl* reg = region_for_axis(scenario, axis);
    if (!reg) continue;
    for (const auto& [ca, va] : reg->values) {
      for (const auto& [cb, vb] : reg->values) {
        bool all = true, any = false;
        for (int sa = 0; sa < n && all; ++sa) {
          if (axis_coord(scenario, sa, axis) != ca) continue;
          for (int sb = 0; sb < n; ++sb) {
            if (sa == sb || axis_coord(scenario, sb, axis) != cb) continue;
            any = true;
            if (!relation_holds_slots(scenario, geom, rel, sa, sb, std::nullopt)) {
              all = false;
              break;
            }
          }
        }
        if (all && any)
          out.push_back(make_rule(
              "regrel." + rel.id + "." + va + "." + vb, RuleKind::Join,
              {prop_pat(ehole('X'), reg->property, cval(Value(va))),
               prop_pat(ehole('Y'), reg->property, cval(Value(vb)))},
              rel_pat(ehole('X'), rel.id, ehole('Y'))));
      }
    }
  }

  // Elimination scaffolding over regions. Knowing an occupant's region rules
  // out the other cells; ruling out the cells of a region rules out the
  // region; ruling out all but one region pins the remaining one. Premise
  // arity caps these at regions whose values cover at most two slots and
  // region domains of at most three values.
  for (const auto& reg : scenario.regions) {
    std::map<std::string, std::vector<int>> cells_of;
    for (int s = 0; s < n; ++s) {
      auto rv = region_value(scenario, reg.property, s);
      if (rv) cells_of[*rv].push_back(s);
    }
    for (const auto& [v, cells] : cells_of) {
      // Downward: not in the region means not in any of its cells.
      for (int c : cells) {
        Pattern prem = prop_pat(ehole('X'), reg.property, cval(Value(v)));
        prem.truth = false;
        Pattern conc = slot_pat(ehole('X'), scenario.slots[c].id);
        conc.truth = false;
        out.push_back(make_rule(
            "regdown." + reg.property + "." + v + "." + scenario.slots[c].id,
            RuleKind::Equivalence, {prem}, std::move(conc)));
      }
      // Upward: excluded from every cell of the region.
      if (cells.size() <= 2) {
        std::vector<Pattern> prems;
        for (int c : cells) {
          Pattern p = slot_pat(ehole('X'), scenario.slots[c].id);
          p.truth = false;
          prems.push_back(std::move(p));
        }
        Pattern conc = prop_pat(ehole('X'), reg.property, cval(Value(v)));
        conc.truth = false;
        out.push_back(make_rule("regneg." + reg.property + "." + v,
                                prems.size() == 1 ? RuleKind::Equivalence
                                                  : RuleKind::Join,
                                std::move(prems), std::move(conc)));
      }
    }
    // Elimination across the region's value domain.
    std::vector<std::string> values;
    for (const auto& [v, cells] : cells_of) values.push_back(v);
    if (values.size() >= 2 && values.size() <= 3) {
      for (const auto& v : values) {
        std::vector<Pattern> prems;
        for (const auto& other : values) {
          if (other == v) continue;
          Pattern p = prop_pat(ehole('X'), reg.property, cval(Value(other)));
          p.truth = false;
          prems.push_back(std::move(p));
        }
        out.push_back(make_rule("regelim." + reg.property + "." + v,
                                prems.size() == 1 ? RuleKind::Equivalence
                                                  : RuleKind::Join,
                                std::move(prems),
                                prop_pat(ehole('X'), reg.property, cval(Value(v)))));
      }
    }
  }

  // Absolute content of a relation: when every slot pair satisfying the
  // relation agrees on a region value for one end, the relation alone pins
  // (or rules out) that region for the corresponding term.
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (!relation_slot_determined(rel)) continue;
    std::vector<std::optional<double>> params;
    if (rel.parameterized)
      for (int k = 1; k < n; ++k) params.push_back(static_cast<double>(k));
    else
      params.push_back(std::nullopt);
    for (const auto& param : params) {
      std::string suffix = param ? "." + format_number(*param) : "";
      std::optional<PatternValue> pv;
      if (param) pv = cval(Value(*param));
      for (const auto& reg : scenario.regions) {
        for (const auto& [coord, v] : reg.values) {
          bool subj_all = true, subj_none = true, obj_all = true, obj_none = true;
          bool any_pair = false;
          for (int sa = 0; sa < n; ++sa)
            for (int sb = 0; sb < n; ++sb) {
              if (sa == sb) continue;
              if (!relation_holds_slots(scenario, geom, rel, sa, sb, param))
                continue;
              any_pair = true;
              bool sa_v = axis_coord(scenario, sa, reg.axis) == coord;
              bool sb_v = axis_coord(scenario, sb, reg.axis) == coord;
              subj_all &= sa_v;
              subj_none &= !sa_v;
              obj_all &= sb_v;
              obj_none &= !sb_v;
            }
          if (!any_pair) continue;
          auto emit = [&](char h, bool subject, bool positive) {
            Pattern conc = prop_pat(positive ? hole(h) : ehole(h), reg.property,
                                    cval(Value(v)));
            conc.truth = positive;
            Pattern prem =
                subject ? rel_pat(positive ? hole('X') : ehole('X'), rel.id,
                                  hole('Y'), pv)
                        : rel_pat(hole('X'), rel.id,
                                  positive ? hole('Y') : ehole('Y'), pv);
            out.push_back(make_rule(std::string("relreg.") + rel.id + suffix +
                                        (subject ? ".subj." : ".obj.") +
                                        reg.property + "." + v +
                                        (positive ? "" : ".neg"),
                                    RuleKind::Equivalence, {std::move(prem)},
                                    std::move(conc)));
          };
          if (subj_all) emit('X', true, true);
          if (subj_none) emit('X', true, false);
          if (obj_all) emit('Y', false, true);
          if (obj_none) emit('Y', false, false);
        }
      }
    }
  }

  // A region placement plus one excluded cell forces the remaining cell.
  for (const auto& reg : scenario.regions) {
    std::map<std::string, std::vector<int>> cells_of;
    for (int s = 0; s < n; ++s) {
      auto rv = region_value(scenario, reg.property, s);
      if (rv) cells_of[*rv].push_back(s);
    }
    for (const auto& [v, cells] : cells_of) {
      if (cells.size() != 2) continue;
      for (int i = 0; i < 2; ++i) {
        Pattern neg = slot_pat(ehole('X'), scenario.slots[cells[i]].id);
        neg.truth = false;
        out.push_back(make_rule(
            "regpinneg." + reg.property + "." + v + "." + scenario.slots[cells[i]].id,
            RuleKind::Join,
            {prop_pat(ehole('X'), reg.property, cval(Value(v))), std::move(neg)},
            slot_pat(ehole('X'), scenario.slots[cells[1 - i]].id)));
      }
    }
  }

  // Constraint propagation for relations that do not pin a unique slot: a
  // placed end excludes every cell incompatible with the relation.
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (!relation_slot_determined(rel)) continue;
    std::vector<std::optional<double>> params;
    if (rel.parameterized)
      for (int k = 1; k < n; ++k) params.push_back(static_cast<double>(k));
    else
      params.push_back(std::nullopt);
    for (const auto& param : params) {
      if (relation_exact(scenario, geom, rel, param)) continue;
      std::string suffix = param ? "." + format_number(*param) : "";
      std::optional<PatternValue> pv;
      if (param) pv = cval(Value(*param));
      for (int sk = 0; sk < n; ++sk) {
        for (int sx = 0; sx < n; ++sx) {
          if (sx == sk) continue;
          if (!relation_holds_slots(scenario, geom, rel, sx, sk, param)) {
            Pattern conc = slot_pat(hole('Y'), scenario.slots[sx].id);
            conc.truth = false;
            out.push_back(make_rule("exclrel." + rel.id + suffix + ".subj." +
                                        scenario.slots[sk].id + "." +
                                        scenario.slots[sx].id,
                                    RuleKind::Join,
                                    {slot_pat(hole('X'), scenario.slots[sk].id),
                                     rel_pat(hole('Y'), rel.id, hole('X'), pv)},
                                    std::move(conc)));
          }
          if (!relation_holds_slots(scenario, geom, rel, sk, sx, param)) {
            Pattern conc = slot_pat(hole('Y'), scenario.slots[sx].id);
            conc.truth = false;
            out.push_back(make_rule("exclrel." + rel.id + suffix + ".obj." +
                                        scenario.slots[sk].id + "." +
                                        scenario.slots[sx].id,
                                    RuleKind::Join,
                                    {slot_pat(hole('X'), scenario.slots[sk].id),
                                     rel_pat(hole('X'), rel.id, hole('Y'), pv)},
                                    std::move(conc)));
          }
        }
      }
    }
  }

  // Offset composition around a cycle.
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (rel.semantics.kind != RelSem::Kind::CycleOffset) continue;
    for (int k1 = 1; k1 < n; ++k1)
      for (int k2 = 1; k2 < n; ++k2) {
        int k3 = (k1 + k2) % n;
        if (k3 == 0) continue;
        out.push_back(make_rule(
            "cycomp." + rel.id + "." + std::to_string(k1) + "." + std::to_string(k2),
            RuleKind::Composition,
            {rel_pat(hole('X'), rel.id, hole('M'), cval(Value(double(k1)))),
             rel_pat(hole('M'), rel.id, hole('Y'), cval(Value(double(k2))))},
            rel_pat(hole('X'), rel.id, hole('Y'), cval(Value(double(k3))))));
      }
  }

  // Slot-reference lifting in both directions.
  std::vector<std::string> liftable_props;
  for (const auto& p : kb.properties)
    if (!p.layout || is_region_property(scenario, p.id))
      liftable_props.push_back(p.id);
  for (int s = 0; s < n; ++s) {
    const std::string& sid = scenario.slots[s].id;
    Term sref = Term::slot_ref(sid);
    for (const auto& pid : liftable_props) {
      out.push_back(make_rule("lift.prop." + pid + "." + sid, RuleKind::Join,
                              {slot_pat(hole('X'), sid),
                               prop_pat(hole('X'), pid, vhole('V'))},
                              prop_pat(cterm(sref), pid, vhole('V'))));
      out.push_back(make_rule("unlift.prop." + pid + "." + sid, RuleKind::Join,
                              {prop_pat(cterm(sref), pid, vhole('V')),
                               slot_pat(hole('X'), sid)},
                              prop_pat(hole('X'), pid, vhole('V'))));
    }
    for (const auto& rel : kb.relations) {
      if (!scenario.relation_vocab.count(rel.id)) continue;
      auto ph = param_hole(rel);
      out.push_back(make_rule("lift.rel_subj." + rel.id + "." + sid, RuleKind::Join,
                              {slot_pat(hole('X'), sid),
                               rel_pat(hole('X'), rel.id, hole('Y'), ph)},
                              rel_pat(cterm(sref), rel.id, hole('Y'), ph)));
      out.push_back(make_rule("lift.rel_obj." + rel.id + "." + sid, RuleKind::Join,
                              {slot_pat(hole('Y'), sid),
                               rel_pat(hole('X'), rel.id, hole('Y'), ph)},
                              rel_pat(hole('X'), rel.id, cterm(sref), ph)));
      out.push_back(make_rule("unlift.rel_subj." + rel.id + "." + sid, RuleKind::Join,
                              {rel_pat(cterm(sref), rel.id, hole('Y'), ph),
                               slot_pat(hole('X'), sid)},
                              rel_pat(hole('X'), rel.id, hole('Y'), ph)));
      out.push_back(make_rule("unlift.rel_obj." + rel.id + "." + sid, RuleKind::Join,
                              {rel_pat(hole('X'), rel.id, cterm(sref), ph),
                               slot_pat(hole('Y'), sid)},
                              rel_pat(hole('X'), rel.id, hole('Y'), ph)));
    }
  }

  // An entity sits in exactly one slot.
  for (int sa = 0; sa < n; ++sa)
    for (int sb = 0; sb < n; ++sb) {
      if (sa == sb) continue;
      Pattern neg = slot_pat(hole('X'), scenario.slots[sb].id);
      neg.truth = false;
      out.push_back(make_rule(
          "negslot." + scenario.slots[sa].id + "." + scenario.slots[sb].id,
          RuleKind::Equivalence, {slot_pat(hole('X'), scenario.slots[sa].id)},
          std::move(neg)));
    }

  return out;
}

std::vector<Rule> expand_instance_rules(const KnowledgeBase& kb,
                                        const Scenario& scenario,
                                        const Geometry& geom,
                                        const std::vector<const Entity*>& roster) {
  std::vector<Rule> out;
  const int n = geom.n;

  // Descriptor vocabulary over the roster, in declaration order. Scenarios
  // may restrict it; by default the bare sortal property "kind" is skipped,
  // it never makes an informative clue.
  auto desc_admissible = [&](const PropertyDecl& prop) {
    if (scenario.descriptor_properties)
      return std::find(scenario.descriptor_properties->begin(),
                       scenario.descriptor_properties->end(),
                       prop.id) != scenario.descriptor_properties->end();
    return !prop.layout && prop.id != "kind";
  };
  std::vector<std::pair<std::string, Value>> descs;
  std::map<std::string, std::vector<const Entity*>> desc_matches;
  for (const auto& prop : kb.properties) {
    if (!desc_admissible(prop)) continue;
    std::set<std::string> seen;
    for (const auto* e : roster) {
      auto it = e->properties.find(prop.id);
      if (it == e->properties.end()) continue;
      std::string k = value_key(it->second);
      if (seen.insert(k).second) descs.emplace_back(prop.id, it->second);
      desc_matches[prop.id + "=" + k].push_back(e);
    }
  }

  for (const auto& [dp, dv] : descs) {
    Term d = Term::desc(dp, dv);
    std::string did = dp + "=" + value_key(dv);
    for (int s = 0; s < n; ++s) {
      const std::string& sid = scenario.slots[s].id;
      out.push_back(make_rule("desc.slot." + did + "." + sid, RuleKind::Join,
                              {prop_pat(hole('X'), dp, cval(dv)),
                               slot_pat(hole('X'), sid)},
                              slot_pat(cterm(d), sid)));
    }
    for (const auto& reg : scenario.regions)
      out.push_back(make_rule("desc.reg." + did + "." + reg.property,
                              RuleKind::Join,
                              {prop_pat(hole('X'), dp, cval(dv)),
                               prop_pat(hole('X'), reg.property, vhole('V'))},
                              prop_pat(cterm(d), reg.property, vhole('V'))));
    for (const auto& rel : kb.relations) {
      if (!scenario.relation_vocab.count(rel.id)) continue;
      auto ph = param_hole(rel);
      out.push_back(make_rule("desc.rel_subj." + did + "." + rel.id,
                              RuleKind::Join,
                              {prop_pat(hole('X'), dp, cval(dv)),
                               rel_pat(hole('X'), rel.id, hole('Y'), ph)},
                              rel_pat(cterm(d), rel.id, hole('Y'), ph)));
      out.push_back(make_rule("desc.rel_obj." + did + "." + rel.id,
                              RuleKind::Join,
                              {prop_pat(hole('Y'), dp, cval(dv)),
                               rel_pat(hole('X'), rel.id, hole('Y'), ph)},
                              rel_pat(hole('X'), rel.id, cterm(d), ph)));
    }
    // A descriptor naming exactly one roster entity resolves to it.
    const auto& matches = desc_matches[did];
    if (matches.size() == 1) {
      Term m = Term::entity(matches.front()->id);
      for (int s = 0; s < n; ++s) {
        const std::string& sid = scenario.slots[s].id;
        out.push_back(make_rule("res.slot." + did + "." + sid,
                                RuleKind::Equivalence,
                                {slot_pat(cterm(d), sid)},
                                slot_pat(cterm(m), sid)));
      }
      for (const auto& reg : scenario.regions)
        out.push_back(make_rule("res.reg." + did + "." + reg.property,
                                RuleKind::Equivalence,
                                {prop_pat(cterm(d), reg.property, vhole('V'))},
                                prop_pat(cterm(m), reg.property, vhole('V'))));
      for (const auto& rel : kb.relations) {
        if (!scenario.relation_vocab.count(rel.id)) continue;
        auto ph = param_hole(rel);
        out.push_back(make_rule("res.rel_subj." + did + "." + rel.id,
                                RuleKind::Equivalence,
                                {rel_pat(cterm(d), rel.id, hole('Y'), ph)},
                                rel_pat(cterm(m), rel.id, hole('Y'), ph)));
        out.push_back(make_rule("res.rel_obj." + did + "." + rel.id,
                                RuleKind::Equivalence,
                                {rel_pat(hole('X'), rel.id, cterm(d), ph)},
                                rel_pat(hole('X'), rel.id, cterm(m), ph)));
      }
    }
  }

  // Single-valued properties: holding one value rules out the others.
  for (const auto& prop : kb.properties) {
    if (prop.layout && !is_region_property(scenario, prop.id)) continue;
    if (prop.type == ValueType::Boolean) {
      for (bool v : {false, true}) {
        bool used = prop.layout;
        for (const auto* e : roster) {
          auto it = e->properties.find(prop.id);
          if (it != e->properties.end() && std::get<bool>(it->second) == v)
            used = true;
        }
        if (!used) continue;
        Pattern neg = prop_pat(hole('X'), prop.id, cval(Value(!v)));
        neg.truth = false;
        out.push_back(make_rule("negprop." + prop.id + "." + value_key(Value(v)),
                                RuleKind::Equivalence,
                                {prop_pat(hole('X'), prop.id, cval(Value(v)))},
                                std::move(neg)));
      }
      continue;
    }
    if (prop.type != ValueType::Enum) continue;
    std::vector<std::string> present;
    if (is_region_property(scenario, prop.id)) {
      for (const auto& reg : scenario.regions)
        if (reg.property == prop.id)
          for (const auto& [c, v] : reg.values)
            if (std::find(present.begin(), present.end(), v) == present.end())
              present.push_back(v);
    } else {
      for (const auto& v : prop.values) {
        for (const auto* e : roster) {
          auto it = e->properties.find(prop.id);
          if (it != e->properties.end() && it->second == Value(v)) {
            present.push_back(v);
            break;
          }
        }
      }
    }
    for (const auto& va : present)
      for (const auto& vb : present) {
        if (va == vb) continue;
        Pattern neg = prop_pat(hole('X'), prop.id, cval(Value(vb)));
        neg.truth = false;
        out.push_back(make_rule("negprop." + prop.id + "." + va + "." + vb,
                                RuleKind::Equivalence,
                                {prop_pat(hole('X'), prop.id, cval(Value(va)))},
                                std::move(neg)));
      }
  }

  // Each slot holds exactly one entity: a placement excludes every other
  // roster member from that slot.
  for (const auto* a : roster)
    for (const auto* b : roster) {
      if (a == b) continue;
      for (int s = 0; s < n; ++s) {
        Pattern conc = slot_pat(cterm(Term::entity(b->id)), scenario.slots[s].id);
        conc.truth = false;
        out.push_back(make_rule(
            "exclslot." + a->id + "." + b->id + "." + scenario.slots[s].id,
            RuleKind::Equivalence,
            {slot_pat(cterm(Term::entity(a->id)), scenario.slots[s].id)},
            std::move(conc)));
      }
    }

  // Numeric comparison introduction over roster values.
  for (const auto& rel : kb.relations) {
    if (!scenario.relation_vocab.count(rel.id)) continue;
    if (rel.semantics.kind != RelSem::Kind::NumCompare) continue;
    const std::string& pid = rel.semantics.num_property;
    std::vector<double> vals;
    for (const auto* e : roster) {
      auto it = e->properties.find(pid);
      if (it != e->properties.end() && value_is_number(it->second)) {
        double v = value_number(it->second);
        if (std::find(vals.begin(), vals.end(), v) == vals.end()) vals.push_back(v);
      }
    }
    std::sort(vals.begin(), vals.end());
    for (double a : vals)
      for (double b : vals) {
        std::optional<double> k;
        switch (rel.semantics.num_mode) {
          case RelSem::NumMode::DiffParam:
            if (b - a > 0) k = b - a;
            break;
          case RelSem::NumMode::ExcessParam:
            if (a - b > 0) k = a - b;
            break;
          case RelSem::NumMode::SumParam:
            if (a <= b) k = a + b;
            break;
          case RelSem::NumMode::Lt:
            if (a < b) k = std::nullopt;
            else continue;
            break;
          case RelSem::NumMode::Gt:
            if (a > b) k = std::nullopt;
            else continue;
            break;
        }
        bool needs_param = rel.semantics.num_mode == RelSem::NumMode::DiffParam ||
                           rel.semantics.num_mode == RelSem::NumMode::ExcessParam ||
                           rel.semantics.num_mode == RelSem::NumMode::SumParam;
        if (needs_param && !k) continue;
        std::optional<PatternValue> pv;
        if (k) pv = cval(Value(*k));
        out.push_back(make_rule(
            "num." + rel.id + "." + format_number(a) + "." + format_number(b),
            RuleKind::Join,
            {prop_pat(ehole('X'), pid, cval(Value(a))),
             prop_pat(ehole('Y'), pid, cval(Value(b)))},
            rel_pat(ehole('X'), rel.id, ehole('Y'), pv)));
      }
  }

  return out;
}

}  // namespace scoreforge
