#include "scoreforge/kb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "scoreforge/errors.hpp"

namespace scoreforge {

namespace {

const nlohmann::json& req(const nlohmann::json& j, const char* key,
                          const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError("missing field '" + std::string(key) + "' in " + where);
  return *it;
}

std::map<std::string, std::string> parse_locale_map(const nlohmann::json& j) {
  std::map<std::string, std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it)
    out[it.key()] = it.value().get<std::string>();
  return out;
}

RelSem::Comp parse_comp(const std::string& s) {
  RelSem::Comp c;
  if (s == "any") { c.op = RelSem::Comp::Op::Any; return c; }
  if (s == "lt") { c.op = RelSem::Comp::Op::Lt; return c; }
  if (s == "gt") { c.op = RelSem::Comp::Op::Gt; return c; }
  if (s.size() >= 3 && s.front() == '|' && s.back() == '|') {
    c.op = RelSem::Comp::Op::AbsDiff;
    c.k = std::stoi(s.substr(1, s.size() - 2));
    return c;
  }
  c.op = RelSem::Comp::Op::Diff;
  c.k = std::stoi(s);
  return c;
}

RelSem parse_semantics(const nlohmann::json& j, const std::string& where) {
  RelSem sem;
  std::string kind = req(j, "kind", where).get<std::string>();
  if (kind == "grid") {
    sem.kind = RelSem::Kind::Grid;
    sem.row = parse_comp(j.value("row", "any"));
    sem.col = parse_comp(j.value("col", "any"));
  } else if (kind == "mirror_neighbor") {
    sem.kind = RelSem::Kind::MirrorNeighbor;
    sem.dir = j.value("dir", "right") == std::string("right") ? 1 : -1;
  } else if (kind == "cycle_offset") {
    sem.kind = RelSem::Kind::CycleOffset;
    sem.offset_sign = j.value("sign", "after") == std::string("after") ? 1 : -1;
  } else if (kind == "cycle_order") {
    sem.kind = RelSem::Kind::CycleOrder;
    sem.order_lt = j.value("op", "lt") == std::string("lt");
  } else if (kind == "family") {
    sem.kind = RelSem::Kind::FamilyPath;
    sem.path = req(j, "path", where).get<std::string>();
    sem.subject_gender = j.value("gender", "");
  } else if (kind == "num_compare") {
    sem.kind = RelSem::Kind::NumCompare;
    sem.num_property = req(j, "property", where).get<std::string>();
    std::string mode = j.value("mode", "diff_param");
    if (mode == "diff_param") sem.num_mode = RelSem::NumMode::DiffParam;
    else if (mode == "excess_param") sem.num_mode = RelSem::NumMode::ExcessParam;
    else if (mode == "sum_param") sem.num_mode = RelSem::NumMode::SumParam;
    else if (mode == "lt") sem.num_mode = RelSem::NumMode::Lt;
    else if (mode == "gt") sem.num_mode = RelSem::NumMode::Gt;
    else throw SchemaError("unknown num_compare mode '" + mode + "' in " + where);
  } else {
    throw SchemaError("unknown semantics kind '" + kind + "' in " + where);
  }
  return sem;
}

bool is_term_hole(const std::string& tok) {
  return tok.size() == 1 && (tok == "X" || tok == "Y" || tok == "A" ||
                             tok == "B" || tok == "M");
}

bool is_value_hole(const std::string& tok) {
  return tok.size() == 1 && (tok == "T" || tok == "V");
}

Value parse_literal(const std::string& tok) {
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (!tok.empty() &&
      (std::isdigit(static_cast<unsigned char>(tok[0])) || tok[0] == '-' ||
       tok[0] == '+')) {
    try {
      size_t pos = 0;
      double d = std::stod(tok, &pos);
      if (pos == tok.size()) return d;
    } catch (...) {
    }
  }
  return tok;
}

// Splits the argument list of a pattern on top-level commas; "desc(...)"
// keeps its inner comma.
std::vector<std::string> split_args(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') depth++;
    if (ch == ')') depth--;
    if (ch == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  for (auto& a : out) {
    size_t b = a.find_first_not_of(" \t");
    size_t e = a.find_last_not_of(" \t");
    a = (b == std::string::npos) ? std::string() : a.substr(b, e - b + 1);
  }
  return out;
}

PatternTerm parse_pattern_term(const std::string& tok) {
  PatternTerm t;
  if (is_term_hole(tok)) {
    t.kind = PatternTerm::Kind::Hole;
    t.hole = tok[0];
    return t;
  }
  if (tok.rfind("desc(", 0) == 0 && tok.back() == ')') {
    auto args = split_args(tok.substr(5, tok.size() - 6));
    if (args.size() != 2) throw SchemaError("malformed desc term: " + tok);
    t.term = Term::desc(args[0], parse_literal(args[1]));
    return t;
  }
  if (tok.rfind("slotref:", 0) == 0) {
    t.term = Term::slot_ref(tok.substr(8));
    return t;
  }
  t.term = Term::entity(tok);
  return t;
}

PatternValue parse_pattern_value(const std::string& tok) {
  PatternValue v;
  if (is_value_hole(tok)) {
    v.kind = PatternValue::Kind::Hole;
    v.hole = tok[0];
    return v;
  }
  v.value = parse_literal(tok);
  return v;
}

}  // namespace

Pattern parse_pattern(const std::string& text) {
  std::string s = text;
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  Pattern p;
  if (!s.empty() && s[0] == '!') {
    p.truth = false;
    s = s.substr(1);
  }
  size_t open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw SchemaError("malformed pattern: " + text);
  std::string form = s.substr(0, open);
  auto args = split_args(s.substr(open + 1, s.size() - open - 2));
  if (form == "slot") {
    if (args.size() != 2) throw SchemaError("slot pattern needs 2 args: " + text);
    p.form = FactForm::SlotAssign;
    p.subject = parse_pattern_term(args[0]);
    p.predicate = args[1];
  } else if (form == "prop") {
    if (args.size() != 3) throw SchemaError("prop pattern needs 3 args: " + text);
    p.form = FactForm::Property;
    p.subject = parse_pattern_term(args[0]);
    p.predicate = args[1];
    p.value = parse_pattern_value(args[2]);
  } else if (form == "rel") {
    if (args.size() != 3 && args.size() != 4)
      throw SchemaError("rel pattern needs 3 or 4 args: " + text);
    p.form = FactForm::Relation;
    p.subject = parse_pattern_term(args[0]);
    p.predicate = args[1];
    p.object = parse_pattern_term(args[2]);
    if (args.size() == 4) p.param = parse_pattern_value(args[3]);
  } else {
    throw SchemaError("unknown pattern form '" + form + "' in: " + text);
  }
  return p;
}

std::string Pattern::to_string() const {
  auto term_str = [](const PatternTerm& t) -> std::string {
    if (t.kind == PatternTerm::Kind::Hole) return std::string(1, t.hole);
    switch (t.term.kind) {
      case Term::Kind::Entity: return t.term.id;
      case Term::Kind::SlotRef: return "slotref:" + t.term.id;
      case Term::Kind::Desc:
        return "desc(" + t.term.prop + "," + value_key(t.term.value) + ")";
      default: return "?";
    }
  };
  auto value_str = [](const PatternValue& v) -> std::string {
    if (v.kind == PatternValue::Kind::Hole) return std::string(1, v.hole);
    return value_key(v.value);
  };
  std::string s = truth ? "" : "!";
  switch (form) {
    case FactForm::SlotAssign:
      return s + "slot(" + term_str(subject) + "," + predicate + ")";
    case FactForm::Property:
      return s + "prop(" + term_str(subject) + "," + predicate + "," +
             value_str(value) + ")";
    case FactForm::Relation: {
      std::string r = s + "rel(" + term_str(subject) + "," + predicate + "," +
                      term_str(object);
      if (param) r += "," + value_str(*param);
      return r + ")";
    }
  }
  return s;
}

int Scenario::slot_index(const std::string& slot_id) const {
  for (size_t i = 0; i < slots.size(); ++i)
    if (slots[i].id == slot_id) return static_cast<int>(i);
  return -1;
}

const SlotDecl& Scenario::slot(const std::string& slot_id) const {
  int i = slot_index(slot_id);
  if (i < 0) throw DanglingReference("unknown slot '" + slot_id + "' in scenario " + id);
  return slots[i];
}

const PropertyDecl* KnowledgeBase::find_property(const std::string& id) const {
  for (const auto& p : properties)
    if (p.id == id) return &p;
  return nullptr;
}
const RelationDecl* KnowledgeBase::find_relation(const std::string& id) const {
  for (const auto& r : relations)
    if (r.id == id) return &r;
  return nullptr;
}
const Entity* KnowledgeBase::find_entity(const std::string& id) const {
  for (const auto& e : entities)
    if (e.id == id) return &e;
  return nullptr;
}
const Scenario* KnowledgeBase::find_scenario(const std::string& id) const {
  for (const auto& s : scenarios)
    if (s.id == id) return &s;
  return nullptr;
}

const PropertyDecl& KnowledgeBase::property_or_throw(const std::string& id) const {
  if (const auto* p = find_property(id)) return *p;
  throw DanglingReference("unknown property '" + id + "'");
}
const RelationDecl& KnowledgeBase::relation_or_throw(const std::string& id) const {
  if (const auto* r = find_relation(id)) return *r;
  throw DanglingReference("unknown relation '" + id + "'");
}
const Entity& KnowledgeBase::entity_or_throw(const std::string& id) const {
  if (const auto* e = find_entity(id)) return *e;
  throw DanglingReference("unknown entity '" + id + "'");
}
const Scenario& KnowledgeBase::scenario_or_throw(const std::string& id) const {
  if (const auto* s = find_scenario(id)) return *s;
  throw UnknownScenario("unknown scenario '" + id + "'");
}

namespace {

void parse_document(const nlohmann::json& doc, KnowledgeBase& kb) {
  if (doc.contains("locales"))
    for (const auto& l : doc.at("locales")) {
      std::string loc = l.get<std::string>();
      if (std::find(kb.locales.begin(), kb.locales.end(), loc) == kb.locales.end())
        kb.locales.push_back(loc);
    }

  if (doc.contains("properties"))
    for (const auto& j : doc.at("properties")) {
      PropertyDecl p;
      p.id = req(j, "id", "property").get<std::string>();
      p.domain = req(j, "domain", "property " + p.id).get<std::string>();
      std::string ty = j.value("type", "enum");
      if (ty == "enum") p.type = ValueType::Enum;
      else if (ty == "number") p.type = ValueType::Number;
      else if (ty == "boolean") p.type = ValueType::Boolean;
      else throw SchemaError("unknown property type '" + ty + "' for " + p.id);
      if (j.contains("values"))
        for (const auto& v : j.at("values")) p.values.push_back(v.get<std::string>());
      p.weight = j.value("weight", 1.0);
      p.layout = j.value("layout", false);
      if (j.contains("names")) p.names = parse_locale_map(j.at("names"));
      if (j.contains("value_names"))
        for (auto it = j.at("value_names").begin(); it != j.at("value_names").end(); ++it)
          p.value_names[it.key()] = parse_locale_map(it.value());
      kb.properties.push_back(std::move(p));
    }

  if (doc.contains("relations"))
    for (const auto& j : doc.at("relations")) {
      RelationDecl r;
      r.id = req(j, "id", "relation").get<std::string>();
      r.domain = req(j, "domain", "relation " + r.id).get<std::string>();
      r.weight = j.value("weight", 1.0);
      r.symmetric = j.value("symmetric", false);
      r.parameterized = j.value("parameterized", false);
      if (j.contains("inverse") && !j.at("inverse").is_null())
        r.inverse = j.at("inverse").get<std::string>();
      r.semantics = parse_semantics(req(j, "semantics", "relation " + r.id),
                                    "relation " + r.id);
      kb.relations.push_back(std::move(r));
    }

  if (doc.contains("rules"))
    for (const auto& j : doc.at("rules")) {
      Rule r;
      r.id = req(j, "id", "rule").get<std::string>();
      std::string kind = req(j, "kind", "rule " + r.id).get<std::string>();
      if (kind == "equivalence") r.kind = RuleKind::Equivalence;
      else if (kind == "join") r.kind = RuleKind::Join;
      else if (kind == "composition") r.kind = RuleKind::Composition;
      else throw SchemaError("unknown rule kind '" + kind + "' for " + r.id);
      for (const auto& p : req(j, "premises", "rule " + r.id))
        r.premises.push_back(parse_pattern(p.get<std::string>()));
      r.conclusion = parse_pattern(req(j, "conclusion", "rule " + r.id).get<std::string>());
      if (j.contains("guard")) {
        const auto& g = j.at("guard");
        if (g.contains("domains"))
          for (const auto& d : g.at("domains")) r.guard_domains.insert(d.get<std::string>());
        if (g.contains("scenarios"))
          for (const auto& s : g.at("scenarios")) r.guard_scenarios.insert(s.get<std::string>());
      }
      kb.rules.push_back(std::move(r));
    }

  if (doc.contains("entities"))
    for (const auto& j : doc.at("entities")) {
      Entity e;
      e.id = req(j, "id", "entity").get<std::string>();
      e.domain = req(j, "domain", "entity " + e.id).get<std::string>();
      e.names = parse_locale_map(req(j, "names", "entity " + e.id));
      if (j.contains("properties"))
        for (auto it = j.at("properties").begin(); it != j.at("properties").end(); ++it)
          e.properties[it.key()] = value_from_json(it.value());
      kb.entities.push_back(std::move(e));
    }

  if (doc.contains("scenarios"))
    for (const auto& j : doc.at("scenarios")) {
      Scenario s;
      s.id = req(j, "id", "scenario").get<std::string>();
      s.domain = req(j, "domain", "scenario " + s.id).get<std::string>();
      std::string geo = j.value("geometry", "grid");
      if (geo == "grid") s.geometry = GeometryKind::Grid;
      else if (geo == "facing_rows") s.geometry = GeometryKind::FacingRows;
      else if (geo == "cycle") s.geometry = GeometryKind::Cycle;
      else if (geo == "family") s.geometry = GeometryKind::Family;
      else throw SchemaError("unknown geometry '" + geo + "' for scenario " + s.id);
      s.cyclic = j.value("cyclic", false);
      for (const auto& sj : req(j, "slots", "scenario " + s.id)) {
        SlotDecl slot;
        slot.id = req(sj, "id", "slot").get<std::string>();
        slot.row = sj.value("row", 0);
        slot.col = sj.value("col", 0);
        if (sj.contains("names")) slot.names = parse_locale_map(sj.at("names"));
        s.slots.push_back(std::move(slot));
      }
      if (j.contains("regions"))
        for (const auto& rj : j.at("regions")) {
          RegionDecl reg;
          reg.property = req(rj, "property", "region").get<std::string>();
          reg.axis = rj.value("axis", "row") == std::string("row")
                         ? RegionDecl::Axis::Row
                         : RegionDecl::Axis::Col;
          for (auto it = req(rj, "values", "region").begin();
               it != rj.at("values").end(); ++it)
            reg.values[std::stoi(it.key())] = it.value().get<std::string>();
          s.regions.push_back(std::move(reg));
        }
      if (j.contains("slot_constraints"))
        for (auto it = j.at("slot_constraints").begin();
             it != j.at("slot_constraints").end(); ++it) {
          std::vector<Constraint> cs;
          for (const auto& cj : it.value()) {
            Constraint c;
            c.property = req(cj, "property", "constraint").get<std::string>();
            std::string op = cj.value("op", "equals");
            if (op == "equals") c.op = Constraint::Op::Equals;
            else if (op == "in") c.op = Constraint::Op::In;
            else if (op == "exists") c.op = Constraint::Op::Exists;
            else throw SchemaError("unknown constraint op '" + op + "'");
            if (cj.contains("value")) c.values.push_back(value_from_json(cj.at("value")));
            if (cj.contains("values"))
              for (const auto& v : cj.at("values")) c.values.push_back(value_from_json(v));
            cs.push_back(std::move(c));
          }
          s.slot_constraints[it.key()] = std::move(cs);
        }
      for (const auto& v : req(j, "relation_vocab", "scenario " + s.id))
        s.relation_vocab.insert(v.get<std::string>());
      if (j.contains("descriptor_properties")) {
        std::vector<std::string> descs;
        for (const auto& v : j.at("descriptor_properties"))
          descs.push_back(v.get<std::string>());
        s.descriptor_properties = std::move(descs);
      }
      if (j.contains("intro_templates"))
        s.intro_templates = parse_locale_map(j.at("intro_templates"));
      kb.scenarios.push_back(std::move(s));
    }
}

void check_pattern_refs(const KnowledgeBase& kb, const Pattern& p,
                        const std::string& where) {
  auto check_term = [&](const PatternTerm& t) {
    if (t.kind != PatternTerm::Kind::Const) return;
    switch (t.term.kind) {
      case Term::Kind::Entity:
        kb.entity_or_throw(t.term.id);
        break;
      case Term::Kind::Desc:
        kb.property_or_throw(t.term.prop);
        break;
      default:
        break;
    }
  };
  check_term(p.subject);
  if (p.form == FactForm::Property) kb.property_or_throw(p.predicate);
  if (p.form == FactForm::Relation) {
    kb.relation_or_throw(p.predicate);
    check_term(p.object);
  }
  (void)where;
}

void link_check(const KnowledgeBase& kb) {
  auto dup = [](const std::string& what, const std::string& id) {
    throw DuplicateId("duplicate " + what + " id '" + id + "'");
  };
  std::set<std::string> seen;
  for (const auto& p : kb.properties)
    if (!seen.insert("p:" + p.id).second) dup("property", p.id);
  for (const auto& r : kb.relations)
    if (!seen.insert("r:" + r.id).second) dup("relation", r.id);
  for (const auto& r : kb.rules)
    if (!seen.insert("u:" + r.id).second) dup("rule", r.id);
  for (const auto& e : kb.entities)
    if (!seen.insert("e:" + e.id).second) dup("entity", e.id);
  for (const auto& s : kb.scenarios)
    if (!seen.insert("s:" + s.id).second) dup("scenario", s.id);

  for (const auto& r : kb.relations) {
    if (r.inverse) kb.relation_or_throw(*r.inverse);
    if (r.semantics.kind == RelSem::Kind::NumCompare)
      kb.property_or_throw(r.semantics.num_property);
    if (r.semantics.kind == RelSem::Kind::FamilyPath &&
        !r.semantics.subject_gender.empty())
      kb.property_or_throw("gender");
  }
  for (const auto& e : kb.entities)
    for (const auto& [pid, v] : e.properties) {
      const auto& decl = kb.property_or_throw(pid);
      bool ok = true;
      switch (decl.type) {
        case ValueType::Enum: {
          ok = std::holds_alternative<std::string>(v) &&
               std::find(decl.values.begin(), decl.values.end(),
                         std::get<std::string>(v)) != decl.values.end();
          break;
        }
        case ValueType::Number: ok = std::holds_alternative<double>(v); break;
        case ValueType::Boolean: ok = std::holds_alternative<bool>(v); break;
      }
      if (!ok)
        throw SchemaError("entity '" + e.id + "' value for property '" + pid +
                          "' does not match the declared type");
    }
  for (const auto& s : kb.scenarios) {
    std::set<std::string> slot_ids;
    for (const auto& slot : s.slots)
      if (!slot_ids.insert(slot.id).second)
        throw DuplicateId("duplicate slot id '" + slot.id + "' in scenario " + s.id);
    for (const auto& reg : s.regions) {
      const auto& p = kb.property_or_throw(reg.property);
      if (p.type != ValueType::Enum)
        throw SchemaError("region property '" + reg.property + "' must be an enum");
    }
    for (const auto& [slot_id, cs] : s.slot_constraints) {
      if (slot_id != "*" && s.slot_index(slot_id) < 0)
        throw DanglingReference("constraint for unknown slot '" + slot_id +
                                "' in scenario " + s.id);
      for (const auto& c : cs) kb.property_or_throw(c.property);
    }
    for (const auto& rid : s.relation_vocab) kb.relation_or_throw(rid);
    if (s.descriptor_properties)
      for (const auto& pid : *s.descriptor_properties) kb.property_or_throw(pid);
  }
  for (const auto& r : kb.rules) {
    for (const auto& p : r.premises) check_pattern_refs(kb, p, r.id);
    check_pattern_refs(kb, r.conclusion, r.id);
  }
}

}  // namespace

KnowledgeBase load_kb_json(const std::vector<nlohmann::json>& documents) {
  KnowledgeBase kb;
  for (const auto& doc : documents) {
    if (!doc.is_object()) throw SchemaError("KB document must be an object");
    parse_document(doc, kb);
  }
  if (kb.locales.empty()) throw SchemaError("KB declares no locales");
  link_check(kb);
  return kb;
}

KnowledgeBase load_kb(const std::filesystem::path& source) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(source)) {
    for (const auto& ent : fs::directory_iterator(source))
      if (ent.is_regular_file() && ent.path().extension() == ".json")
        files.push_back(ent.path());
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(source)) {
    files.push_back(source);
  } else {
    throw SchemaError("KB source not found: " + source.string());
  }
  if (files.empty())
    throw SchemaError("no KB documents under " + source.string());

  std::vector<nlohmann::json> docs;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw SchemaError("cannot open " + f.string());
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("parse error in " + f.string() + ": " + e.what());
    }
    docs.push_back(std::move(doc));
  }
  return load_kb_json(docs);
}

bool entity_satisfies(const Entity& entity,
                      const std::vector<Constraint>& constraints) {
  for (const auto& c : constraints) {
    auto it = entity.properties.find(c.property);
    switch (c.op) {
      case Constraint::Op::Exists:
        if (it == entity.properties.end()) return false;
        break;
      case Constraint::Op::Equals:
        if (it == entity.properties.end() || c.values.empty() ||
            !(it->second == c.values.front()))
          return false;
        break;
      case Constraint::Op::In: {
        if (it == entity.properties.end()) return false;
        bool any = false;
        for (const auto& v : c.values)
          if (it->second == v) { any = true; break; }
        if (!any) return false;
        break;
      }
    }
  }
  return true;
}

bool entity_fits_slot(const Scenario& scenario, const Entity& entity,
                      const std::string& slot_id) {
  auto star = scenario.slot_constraints.find("*");
  if (star != scenario.slot_constraints.end() &&
      !entity_satisfies(entity, star->second))
    return false;
  auto it = scenario.slot_constraints.find(slot_id);
  if (it != scenario.slot_constraints.end() &&
      !entity_satisfies(entity, it->second))
    return false;
  return true;
}

std::vector<const Entity*> candidate_entities(const KnowledgeBase& kb,
                                              const Scenario& scenario) {
  if (!kb.find_scenario(scenario.id))
    throw UnknownScenario("scenario '" + scenario.id + "' is not part of this KB");
  // An entity qualifies when it could legally occupy at least one slot.
  std::vector<const Entity*> out;
  for (const auto& e : kb.entities) {
    for (const auto& slot : scenario.slots) {
      if (entity_fits_slot(scenario, e, slot.id)) {
        out.push_back(&e);
        break;
      }
    }
  }
  return out;
}

namespace {

void collect_pattern_holes(const Pattern& p, std::set<char>& term_holes,
                           std::set<char>& value_holes) {
  if (p.subject.kind == PatternTerm::Kind::Hole) term_holes.insert(p.subject.hole);
  if (p.object.kind == PatternTerm::Kind::Hole) term_holes.insert(p.object.hole);
  if (p.form == FactForm::Property && p.value.kind == PatternValue::Kind::Hole)
    value_holes.insert(p.value.hole);
  if (p.param && p.param->kind == PatternValue::Kind::Hole)
    value_holes.insert(p.param->hole);
}

}  // namespace

ValidationReport validate(const KnowledgeBase& kb) {
  ValidationReport report;
  auto add = [&](std::string code, std::string subject, std::string message) {
    report.findings.push_back({std::move(code), std::move(subject), std::move(message)});
  };

  for (const auto& p : kb.properties)
    if (!(p.weight >= 0) || !std::isfinite(p.weight))
      add("bad weight", p.id, "property weight must be finite and >= 0");
  for (const auto& r : kb.relations)
    if (!(r.weight >= 0) || !std::isfinite(r.weight))
      add("bad weight", r.id, "relation weight must be finite and >= 0");

  for (const auto& e : kb.entities)
    for (const auto& loc : kb.locales)
      if (!e.names.count(loc))
        add("missing name", e.id, "entity has no name for locale '" + loc + "'");

  for (const auto& r : kb.rules) {
    std::set<char> prem_terms, prem_values, conc_terms, conc_values;
    for (const auto& p : r.premises) collect_pattern_holes(p, prem_terms, prem_values);
    collect_pattern_holes(r.conclusion, conc_terms, conc_values);
    for (char h : conc_terms)
      if (!prem_terms.count(h))
        add("fresh placeholder", r.id,
            std::string("conclusion placeholder '") + h + "' absent from premises");
    for (char h : conc_values)
      if (!prem_values.count(h))
        add("fresh placeholder", r.id,
            std::string("conclusion placeholder '") + h + "' absent from premises");
    size_t n = r.premises.size();
    if (r.kind == RuleKind::Equivalence && n != 1)
      add("bad arity", r.id, "equivalence rules take exactly one premise");
    if ((r.kind == RuleKind::Join || r.kind == RuleKind::Composition) && n != 2)
      add("bad arity", r.id, "join and composition rules take exactly two premises");
    if (r.kind == RuleKind::Composition) {
      bool shaped = n == 2 && r.premises[0].form == FactForm::Relation &&
                    r.premises[1].form == FactForm::Relation &&
                    r.premises[0].object.kind == PatternTerm::Kind::Hole &&
                    r.premises[1].subject.kind == PatternTerm::Kind::Hole &&
                    r.premises[0].object.hole == r.premises[1].subject.hole;
      if (!shaped)
        add("bad composition", r.id,
            "composition premises must be relations sharing a middle term");
    }
  }

  for (const auto& s : kb.scenarios) {
    if (s.slots.size() < 2)
      add("too few slots", s.id, "scenario needs at least 2 slots");
    if (s.relation_vocab.empty())
      add("empty vocabulary", s.id, "scenario admits no relations");
    if (s.cyclic && s.geometry != GeometryKind::Cycle)
      add("bad cycle flag", s.id, "cyclic is set but the layout is not a cycle");
    if (!s.cyclic && s.geometry == GeometryKind::Cycle)
      add("bad cycle flag", s.id, "cycle layouts must set cyclic");
    for (const auto& loc : kb.locales)
      if (!s.intro_templates.count(loc))
        add("missing intro", s.id, "no intro template for locale '" + loc + "'");
    auto cands = candidate_entities(kb, s);
    if (cands.size() < s.slots.size())
      add("unsatisfiable scenario", s.id,
          "only " + std::to_string(cands.size()) + " entities satisfy the constraints of " +
              std::to_string(s.slots.size()) + " slots");
  }
  return report;
}

nlohmann::json KnowledgeBase::to_json() const {
  nlohmann::json j;
  j["locales"] = locales;
  auto& props = j["properties"] = nlohmann::json::array();
  for (const auto& p : properties) {
    nlohmann::json pj{{"id", p.id}, {"domain", p.domain}, {"weight", p.weight}};
    pj["type"] = p.type == ValueType::Enum ? "enum"
                 : p.type == ValueType::Number ? "number" : "boolean";
    if (!p.values.empty()) pj["values"] = p.values;
    if (p.layout) pj["layout"] = true;
    if (!p.names.empty()) pj["names"] = p.names;
    if (!p.value_names.empty()) pj["value_names"] = p.value_names;
    props.push_back(std::move(pj));
  }
  auto& rels = j["relations"] = nlohmann::json::array();
  for (const auto& r : relations) {
    nlohmann::json rj{{"id", r.id}, {"domain", r.domain}, {"weight", r.weight}};
    if (r.symmetric) rj["symmetric"] = true;
    if (r.parameterized) rj["parameterized"] = true;
    if (r.inverse) rj["inverse"] = *r.inverse;
    nlohmann::json sj;
    auto comp_str = [](const RelSem::Comp& c) -> std::string {
      switch (c.op) {
        case RelSem::Comp::Op::Any: return "any";
        case RelSem::Comp::Op::Lt: return "lt";
        case RelSem::Comp::Op::Gt: return "gt";
        case RelSem::Comp::Op::AbsDiff: return "|" + std::to_string(c.k) + "|";
        case RelSem::Comp::Op::Diff: return std::to_string(c.k);
      }
      return "any";
    };
    switch (r.semantics.kind) {
      case RelSem::Kind::Grid:
        sj = {{"kind", "grid"}, {"row", comp_str(r.semantics.row)},
              {"col", comp_str(r.semantics.col)}};
        break;
      case RelSem::Kind::MirrorNeighbor:
        sj = {{"kind", "mirror_neighbor"},
              {"dir", r.semantics.dir > 0 ? "right" : "left"}};
        break;
      case RelSem::Kind::CycleOffset:
        sj = {{"kind", "cycle_offset"},
              {"sign", r.semantics.offset_sign > 0 ? "after" : "before"}};
        break;
      case RelSem::Kind::CycleOrder:
        sj = {{"kind", "cycle_order"}, {"op", r.semantics.order_lt ? "lt" : "gt"}};
        break;
      case RelSem::Kind::FamilyPath:
        sj = {{"kind", "family"}, {"path", r.semantics.path}};
        if (!r.semantics.subject_gender.empty())
          sj["gender"] = r.semantics.subject_gender;
        break;
      case RelSem::Kind::NumCompare: {
        const char* mode = "diff_param";
        switch (r.semantics.num_mode) {
          case RelSem::NumMode::DiffParam: mode = "diff_param"; break;
          case RelSem::NumMode::ExcessParam: mode = "excess_param"; break;
          case RelSem::NumMode::SumParam: mode = "sum_param"; break;
          case RelSem::NumMode::Lt: mode = "lt"; break;
          case RelSem::NumMode::Gt: mode = "gt"; break;
        }
        sj = {{"kind", "num_compare"}, {"property", r.semantics.num_property},
              {"mode", mode}};
        break;
      }
      case RelSem::Kind::None:
        sj = {{"kind", "grid"}, {"row", "any"}, {"col", "any"}};
        break;
    }
    rj["semantics"] = std::move(sj);
    rels.push_back(std::move(rj));
  }
  auto& rules_j = j["rules"] = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json rj{{"id", r.id}};
    rj["kind"] = r.kind == RuleKind::Equivalence ? "equivalence"
                 : r.kind == RuleKind::Join ? "join" : "composition";
    auto& prem = rj["premises"] = nlohmann::json::array();
    for (const auto& p : r.premises) prem.push_back(p.to_string());
    rj["conclusion"] = r.conclusion.to_string();
    if (!r.guard_domains.empty() || !r.guard_scenarios.empty()) {
      nlohmann::json g;
      if (!r.guard_domains.empty()) g["domains"] = r.guard_domains;
      if (!r.guard_scenarios.empty()) g["scenarios"] = r.guard_scenarios;
      rj["guard"] = std::move(g);
    }
    rules_j.push_back(std::move(rj));
  }
  auto& ents = j["entities"] = nlohmann::json::array();
  for (const auto& e : entities) {
    nlohmann::json ej{{"id", e.id}, {"domain", e.domain}, {"names", e.names}};
    nlohmann::json props_j = nlohmann::json::object();
    for (const auto& [k, v] : e.properties) props_j[k] = value_to_json(v);
    ej["properties"] = std::move(props_j);
    ents.push_back(std::move(ej));
  }
  auto& scens = j["scenarios"] = nlohmann::json::array();
  for (const auto& s : scenarios) {
    nlohmann::json sj{{"id", s.id}, {"domain", s.domain}, {"cyclic", s.cyclic}};
    switch (s.geometry) {
      case GeometryKind::Grid: sj["geometry"] = "grid"; break;
      case GeometryKind::FacingRows: sj["geometry"] = "facing_rows"; break;
      case GeometryKind::Cycle: sj["geometry"] = "cycle"; break;
      case GeometryKind::Family: sj["geometry"] = "family"; break;
    }
    auto& slots = sj["slots"] = nlohmann::json::array();
    for (const auto& slot : s.slots) {
      nlohmann::json slj{{"id", slot.id}, {"row", slot.row}, {"col", slot.col}};
      if (!slot.names.empty()) slj["names"] = slot.names;
      slots.push_back(std::move(slj));
    }
    if (!s.regions.empty()) {
      auto& regs = sj["regions"] = nlohmann::json::array();
      for (const auto& reg : s.regions) {
        nlohmann::json rj{{"property", reg.property},
                          {"axis", reg.axis == RegionDecl::Axis::Row ? "row" : "col"}};
        nlohmann::json vals = nlohmann::json::object();
        for (const auto& [k, v] : reg.values) vals[std::to_string(k)] = v;
        rj["values"] = std::move(vals);
        regs.push_back(std::move(rj));
      }
    }
    if (!s.slot_constraints.empty()) {
      nlohmann::json cj = nlohmann::json::object();
      for (const auto& [slot_id, cs] : s.slot_constraints) {
        auto arr = nlohmann::json::array();
        for (const auto& c : cs) {
          nlohmann::json one{{"property", c.property}};
          one["op"] = c.op == Constraint::Op::Equals ? "equals"
                      : c.op == Constraint::Op::In ? "in" : "exists";
          if (c.op == Constraint::Op::Equals && !c.values.empty())
            one["value"] = value_to_json(c.values.front());
          else if (!c.values.empty()) {
            auto vals = nlohmann::json::array();
            for (const auto& v : c.values) vals.push_back(value_to_json(v));
            one["values"] = std::move(vals);
          }
          arr.push_back(std::move(one));
        }
        cj[slot_id] = std::move(arr);
      }
      sj["slot_constraints"] = std::move(cj);
    }
    sj["relation_vocab"] = s.relation_vocab;
    if (s.descriptor_properties)
      sj["descriptor_properties"] = *s.descriptor_properties;
    if (!s.intro_templates.empty()) sj["intro_templates"] = s.intro_templates;
    scens.push_back(std::move(sj));
  }
  return j;
}

}  // namespace scoreforge
