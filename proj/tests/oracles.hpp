#pragma once

// Test-only oracles, independent of the engine implementation paths they
// check.

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "scoreforge/kb.hpp"
#include "scoreforge/reasoner.hpp"

namespace scoreforge::oracles {

// Independent pattern matcher for the naive oracle. Deliberately written
// from scratch against the pattern definition rather than reusing the
// engine's matcher.
struct NaiveBindings {
  std::map<char, Term> terms;
  std::map<char, Value> values;
  const std::set<char>* desc_ok = nullptr;
};

// Same descriptor policy as the engine: a hole carries an existential
// descriptor only when it occurs in at most one premise and every pattern
// mentioning it is positive.
std::set<char> naive_desc_holes(const Rule& rule) {
  std::map<char, int> count;
  std::map<char, bool> positive;
  auto scan = [&](const Pattern& p, bool is_premise) {
    for (const PatternTerm* t : {&p.subject, &p.object}) {
      if (t->kind != PatternTerm::Kind::Hole) continue;
      if (is_premise) count[t->hole]++;
      auto it = positive.find(t->hole);
      positive[t->hole] = (it == positive.end() ? true : it->second) && p.truth;
    }
  };
  for (const auto& p : rule.premises) scan(p, true);
  scan(rule.conclusion, false);
  std::set<char> ok;
  for (const auto& [h, n] : count)
    if (n <= 1 && positive[h]) ok.insert(h);
  return ok;
}

bool naive_match_term(const PatternTerm& p, const Term& t, NaiveBindings& b) {
  if (p.kind == PatternTerm::Kind::Const) return p.term == t;
  if (p.entity_hole && t.kind != Term::Kind::Entity) return false;
  if (t.kind == Term::Kind::Desc && (!b.desc_ok || !b.desc_ok->count(p.hole)))
    return false;
  auto it = b.terms.find(p.hole);
  if (it != b.terms.end()) return it->second == t;
  for (const auto& [h, bound] : b.terms)
    if (bound == t) return false;
  b.terms[p.hole] = t;
  return true;
}

bool naive_match_value(const PatternValue& p, const Value& v, NaiveBindings& b) {
  if (p.kind == PatternValue::Kind::Const) return p.value == v;
  auto it = b.values.find(p.hole);
  if (it != b.values.end()) return it->second == v;
  b.values[p.hole] = v;
  return true;
}

bool naive_match(const Pattern& p, const Fact& f, NaiveBindings& b) {
  if (p.form != f.form || p.predicate != f.predicate || p.truth != f.truth)
    return false;
  if (!naive_match_term(p.subject, f.subject, b)) return false;
  if (p.form == FactForm::Property) return naive_match_value(p.value, f.value, b);
  if (p.form == FactForm::Relation) {
    if (!naive_match_term(p.object, f.object, b)) return false;
    if (p.param.has_value() != f.param.has_value()) return false;
    if (p.param) return naive_match_value(*p.param, Value(*f.param), b);
  }
  return true;
}

std::optional<Fact> naive_conclude(const Pattern& c, const NaiveBindings& b) {
  Fact f;
  f.form = c.form;
  f.truth = c.truth;
  f.predicate = c.predicate;
  auto term = [&](const PatternTerm& t) -> std::optional<Term> {
    if (t.kind == PatternTerm::Kind::Const) return t.term;
    auto it = b.terms.find(t.hole);
    if (it == b.terms.end()) return std::nullopt;
    return it->second;
  };
  auto subj = term(c.subject);
  if (!subj) return std::nullopt;
  f.subject = *subj;
  if (c.form == FactForm::Property) {
    if (c.value.kind == PatternValue::Kind::Const) {
      f.value = c.value.value;
    } else {
      auto it = b.values.find(c.value.hole);
      if (it == b.values.end()) return std::nullopt;
      f.value = it->second;
    }
  }
  if (c.form == FactForm::Relation) {
    auto obj = term(c.object);
    if (!obj) return std::nullopt;
    f.object = *obj;
    if (c.param) {
      if (c.param->kind == PatternValue::Kind::Const) {
        f.param = value_number(c.param->value);
      } else {
        auto it = b.values.find(c.param->hole);
        if (it == b.values.end()) return std::nullopt;
        f.param = value_number(it->second);
      }
    }
  }
  return f;
}

// Naive oracle: repeated full scans of every rule against every fact (and
// every fact pair), no frontier, until nothing new appears.
std::set<std::string> naive_closure(const std::vector<Rule>& rules, const FactBase& init) {
  std::vector<Fact> facts = init.facts();
  std::set<std::string> keys;
  for (const auto& f : facts) keys.insert(f.key());
  bool changed = true;
  auto emit = [&](const std::optional<Fact>& f, std::vector<Fact>& fresh) {
    if (f && keys.insert(f->key()).second) fresh.push_back(*f);
  };
  std::vector<std::set<char>> desc_ok;
  for (const auto& rule : rules) desc_ok.push_back(naive_desc_holes(rule));
  while (changed) {
    changed = false;
    std::vector<Fact> fresh;
    for (size_t ri = 0; ri < rules.size(); ++ri) {
      const auto& rule = rules[ri];
      if (rule.premises.size() == 1) {
        for (const auto& f : facts) {
          NaiveBindings b;
          b.desc_ok = &desc_ok[ri];
          if (naive_match(rule.premises[0], f, b))
            emit(naive_conclude(rule.conclusion, b), fresh);
        }
      } else {
        for (const auto& f0 : facts) {
          NaiveBindings b0;
          b0.desc_ok = &desc_ok[ri];
          if (!naive_match(rule.premises[0], f0, b0)) continue;
          for (const auto& f1 : facts) {
            NaiveBindings b = b0;
            if (naive_match(rule.premises[1], f1, b))
              emit(naive_conclude(rule.conclusion, b), fresh);
          }
        }
      }
    }
    if (!fresh.empty()) {
      changed = true;
      for (auto& f : fresh) facts.push_back(std::move(f));
    }
  }
  return keys;
}


}  // namespace scoreforge::oracles
