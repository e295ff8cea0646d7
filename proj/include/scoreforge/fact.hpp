#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "scoreforge/value.hpp"

namespace scoreforge {

// A term appearing in a grounded proposition. Besides plain entities, a
// subject or object can be a slot reference ("the animal in enclosure No.3")
// or a descriptor ("the red item").
struct Term {
  enum class Kind { None, Entity, SlotRef, Desc };

  Kind kind = Kind::None;
  std::string id;    // entity id or slot id
  std::string prop;  // descriptor property
  Value value{};     // descriptor value

  static Term entity(std::string eid) {
    return Term{Kind::Entity, std::move(eid), {}, {}};
  }
  static Term slot_ref(std::string sid) {
    return Term{Kind::SlotRef, std::move(sid), {}, {}};
  }
  static Term desc(std::string property, Value v) {
    return Term{Kind::Desc, {}, std::move(property), std::move(v)};
  }

  bool operator==(const Term& o) const {
    return kind == o.kind && id == o.id && prop == o.prop && value == o.value;
  }

  std::string key() const;
};

enum class FactForm { Property, SlotAssign, Relation };
enum class Precision { Precise, Vague };

// The four label dimensions recorded on every fact. Derived facts carry the
// union of their premises' labels.
struct Labels {
  std::set<std::string> domains;
  std::set<std::string> entities;
  std::set<std::string> properties;
  std::set<std::string> relations;

  void merge(const Labels& o);
  nlohmann::json to_json() const;
};

struct Derivation {
  std::string rule;
  std::vector<int> premises;  // fact ids in the owning base
};

struct Fact {
  FactForm form = FactForm::Property;
  Term subject;
  std::string predicate;  // property id, slot id, or relation id
  Term object;            // Relation only
  Value value{};          // Property only
  std::optional<double> param;  // parameterized relations
  bool truth = true;
  Precision precision = Precision::Precise;
  std::optional<double> time;
  Labels labels;
  std::optional<Derivation> derivation;
  int depth = 0;

  static Fact slot_assign(Term subject, std::string slot);
  static Fact property(Term subject, std::string prop, Value v);
  static Fact relation(Term subject, std::string rel, Term object,
                       std::optional<double> param = std::nullopt);

  // Identity: form plus truth value, ignoring provenance and labels.
  std::string key() const;

  // Reports the spec-level shape: a proposition whose subject or object is a
  // descriptor counts as a descriptor assertion.
  std::string classify() const;

  bool has_descriptor() const {
    return subject.kind == Term::Kind::Desc || object.kind == Term::Kind::Desc;
  }

  nlohmann::json to_json() const;
  static Fact from_json(const nlohmann::json& j);
};

}  // namespace scoreforge
