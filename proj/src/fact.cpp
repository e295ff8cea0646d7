#include "scoreforge/fact.hpp"

#include "scoreforge/errors.hpp"

namespace scoreforge {

std::string Term::key() const {
  switch (kind) {
    case Kind::Entity:  return "e:" + id;
    case Kind::SlotRef: return "s:" + id;
    case Kind::Desc:    return "d:" + prop + "=" + value_key(value);
    case Kind::None:    return "-";
  }
  return "-";
}

void Labels::merge(const Labels& o) {
  domains.insert(o.domains.begin(), o.domains.end());
  entities.insert(o.entities.begin(), o.entities.end());
  properties.insert(o.properties.begin(), o.properties.end());
  relations.insert(o.relations.begin(), o.relations.end());
}

nlohmann::json Labels::to_json() const {
  return nlohmann::json{{"domains", domains},
                        {"entities", entities},
                        {"properties", properties},
                        {"relations", relations}};
}

Fact Fact::slot_assign(Term subject, std::string slot) {
  Fact f;
  f.form = FactForm::SlotAssign;
  f.subject = std::move(subject);
  f.predicate = std::move(slot);
  return f;
}

Fact Fact::property(Term subject, std::string prop, Value v) {
  Fact f;
  f.form = FactForm::Property;
  f.subject = std::move(subject);
  f.predicate = std::move(prop);
  f.value = std::move(v);
  return f;
}

Fact Fact::relation(Term subject, std::string rel, Term object,
                    std::optional<double> param) {
  Fact f;
  f.form = FactForm::Relation;
  f.subject = std::move(subject);
  f.predicate = std::move(rel);
  f.object = std::move(object);
  f.param = param;
  return f;
}

std::string Fact::key() const {
  std::string k;
  k.reserve(64);
  switch (form) {
    case FactForm::Property:   k = "p|"; break;
    case FactForm::SlotAssign: k = "s|"; break;
    case FactForm::Relation:   k = "r|"; break;
  }
  k += subject.key();
  k += '|';
  k += predicate;
  if (form == FactForm::Property) {
    k += '|';
    k += value_key(value);
  }
  if (form == FactForm::Relation) {
    k += '|';
    k += object.key();
    if (param) {
      k += '|';
      k += format_number(*param);
    }
  }
  k += truth ? "|+" : "|-";
  return k;
}

std::string Fact::classify() const {
  if (has_descriptor()) return "descriptor-assertion";
  switch (form) {
    case FactForm::Property:   return "property-assertion";
    case FactForm::SlotAssign: return "slot-assertion";
    case FactForm::Relation:   return "relation-assertion";
  }
  return "property-assertion";
}

static nlohmann::json term_to_json(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Entity:
      return nlohmann::json{{"entity", t.id}};
    case Term::Kind::SlotRef:
      return nlohmann::json{{"slot", t.id}};
    case Term::Kind::Desc:
      return nlohmann::json{{"desc", {{"property", t.prop},
                                      {"value", value_to_json(t.value)}}}};
    case Term::Kind::None:
      return nullptr;
  }
  return nullptr;
}

static Term term_from_json(const nlohmann::json& j) {
  if (j.is_null()) return Term{};
  if (j.contains("entity")) return Term::entity(j.at("entity").get<std::string>());
  if (j.contains("slot")) return Term::slot_ref(j.at("slot").get<std::string>());
  if (j.contains("desc")) {
    const auto& d = j.at("desc");
    return Term::desc(d.at("property").get<std::string>(),
                      value_from_json(d.at("value")));
  }
  throw SchemaError("malformed term");
}

nlohmann::json Fact::to_json() const {
  nlohmann::json j;
  switch (form) {
    case FactForm::Property:   j["form"] = "property"; break;
    case FactForm::SlotAssign: j["form"] = "slot"; break;
    case FactForm::Relation:   j["form"] = "relation"; break;
  }
  j["subject"] = term_to_json(subject);
  j["predicate"] = predicate;
  if (form == FactForm::Relation) j["object"] = term_to_json(object);
  if (form == FactForm::Property) j["value"] = value_to_json(value);
  if (param) j["param"] = *param;
  j["truth"] = truth;
  if (precision == Precision::Vague) j["precision"] = "vague";
  if (time) j["time"] = *time;
  return j;
}

Fact Fact::from_json(const nlohmann::json& j) {
  Fact f;
  std::string form = j.at("form").get<std::string>();
  if (form == "property") f.form = FactForm::Property;
  else if (form == "slot") f.form = FactForm::SlotAssign;
  else if (form == "relation") f.form = FactForm::Relation;
  else throw SchemaError("unknown fact form: " + form);
  f.subject = term_from_json(j.at("subject"));
  f.predicate = j.at("predicate").get<std::string>();
  if (j.contains("object")) f.object = term_from_json(j.at("object"));
  if (j.contains("value")) f.value = value_from_json(j.at("value"));
  if (j.contains("param")) f.param = j.at("param").get<double>();
  if (j.contains("truth")) f.truth = j.at("truth").get<bool>();
  if (j.contains("precision") && j.at("precision") == "vague")
    f.precision = Precision::Vague;
  if (j.contains("time")) f.time = j.at("time").get<double>();
  return f;
}

}  // namespace scoreforge
