#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "scoreforge/fact.hpp"
#include "scoreforge/value.hpp"

namespace scoreforge {

enum class ValueType { Enum, Number, Boolean };

struct PropertyDecl {
  std::string id;
  std::string domain;
  ValueType type = ValueType::Enum;
  std::vector<std::string> values;  // enum domain
  double weight = 1.0;
  bool layout = false;  // filled by scenario regions, not by entity data
  std::map<std::string, std::string> names;  // locale -> display
  // enum value -> locale -> display
  std::map<std::string, std::map<std::string, std::string>> value_names;
};

// Positional semantics of a relation, interpreted against the scenario
// geometry and entity properties by the solver and the rule expander.
struct RelSem {
  enum class Kind {
    None,
    Grid,            // row/col offset constraints between occupied slots
    MirrorNeighbor,  // same row, handedness flips on the facing row
    CycleOffset,     // subject index = object index +/- param (mod n)
    CycleOrder,      // index comparison around the fixed slot order
    FamilyPath,      // walk over parent/spouse edges, optional subject gender
    NumCompare,      // arithmetic over a numeric entity property
  };
  struct Comp {
    enum class Op { Any, Eq, Lt, Gt, Diff, AbsDiff };
    Op op = Op::Any;
    int k = 0;
  };
  // DiffParam: object minus subject equals the parameter (subject trails).
  // ExcessParam: subject minus object equals the parameter (subject leads).
  enum class NumMode { DiffParam, ExcessParam, SumParam, Lt, Gt };

  Kind kind = Kind::None;
  Comp row, col;            // Grid (subject minus object)
  int dir = 1;              // MirrorNeighbor: +1 right, -1 left
  bool order_lt = true;     // CycleOrder
  int offset_sign = 1;      // CycleOffset: +1 after, -1 before
  std::string path;         // FamilyPath steps: c=child, f=parent, s=spouse
  std::string subject_gender;  // FamilyPath, empty when ungendered
  std::string num_property;    // NumCompare
  NumMode num_mode = NumMode::DiffParam;
};

struct RelationDecl {
  std::string id;
  std::string domain;
  double weight = 1.0;
  bool symmetric = false;
  bool parameterized = false;
  std::optional<std::string> inverse;
  RelSem semantics;
};

enum class RuleKind { Equivalence, Join, Composition };

// Premise/conclusion patterns. Placeholders: X Y M bind terms, A B bind
// event terms (the time domain), T V bind values or parameters.
struct PatternTerm {
  enum class Kind { Const, Hole };
  Kind kind = Kind::Const;
  Term term;      // Const
  char hole = 0;  // Hole
  // Restricts a hole to plain entity terms. Used by generated rule families
  // whose conclusions would otherwise relate two spellings of one entity.
  bool entity_hole = false;
};

struct PatternValue {
  enum class Kind { Const, Hole };
  Kind kind = Kind::Const;
  Value value{};
  char hole = 0;
};

struct Pattern {
  FactForm form = FactForm::Property;
  bool truth = true;
  PatternTerm subject;
  std::string predicate;
  PatternTerm object;
  PatternValue value;
  std::optional<PatternValue> param;

  std::string to_string() const;
};

struct Rule {
  std::string id;
  RuleKind kind = RuleKind::Equivalence;
  std::vector<Pattern> premises;
  Pattern conclusion;
  std::set<std::string> guard_domains;    // empty = applies everywhere
  std::set<std::string> guard_scenarios;  // empty = applies everywhere
};

struct SlotDecl {
  std::string id;
  int row = 0;
  int col = 0;
  std::map<std::string, std::string> names;  // locale -> display
};

// Maps one grid axis onto a layout property ("tier" over rows, say).
struct RegionDecl {
  std::string property;
  enum class Axis { Row, Col } axis = Axis::Row;
  std::map<int, std::string> values;  // coordinate -> enum value
};

struct Constraint {
  enum class Op { Equals, In, Exists };
  std::string property;
  Op op = Op::Equals;
  std::vector<Value> values;
};

enum class GeometryKind { Grid, FacingRows, Cycle, Family };

struct Scenario {
  std::string id;
  std::string domain;
  GeometryKind geometry = GeometryKind::Grid;
  bool cyclic = false;
  std::vector<SlotDecl> slots;
  std::vector<RegionDecl> regions;
  // slot id (or "*") -> conjunction of unary property predicates
  std::map<std::string, std::vector<Constraint>> slot_constraints;
  std::set<std::string> relation_vocab;
  // Properties admitted as descriptors ("the red item") in this scenario.
  // Unset means every non-layout property except the bare sortal "kind".
  std::optional<std::vector<std::string>> descriptor_properties;
  std::map<std::string, std::string> intro_templates;  // locale -> template

  int slot_index(const std::string& slot_id) const;
  const SlotDecl& slot(const std::string& slot_id) const;
};

struct Entity {
  std::string id;
  std::string domain;
  std::map<std::string, std::string> names;   // locale -> display
  std::map<std::string, Value> properties;    // property id -> value
};

struct ValidationFinding {
  std::string code;
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const { return findings.empty(); }
};

class KnowledgeBase {
public:
  std::vector<std::string> locales;
  std::vector<PropertyDecl> properties;
  std::vector<RelationDecl> relations;
  std::vector<Rule> rules;
  std::vector<Entity> entities;
  std::vector<Scenario> scenarios;

  const PropertyDecl* find_property(const std::string& id) const;
  const RelationDecl* find_relation(const std::string& id) const;
  const Entity* find_entity(const std::string& id) const;
  const Scenario* find_scenario(const std::string& id) const;

  const PropertyDecl& property_or_throw(const std::string& id) const;
  const RelationDecl& relation_or_throw(const std::string& id) const;
  const Entity& entity_or_throw(const std::string& id) const;
  const Scenario& scenario_or_throw(const std::string& id) const;

  nlohmann::json to_json() const;
};

// Loads and links a knowledge base from a directory of KB documents (one
// file per domain) or from a single document. Throws SchemaError,
// DuplicateId, or DanglingReference.
KnowledgeBase load_kb(const std::filesystem::path& source);
KnowledgeBase load_kb_json(const std::vector<nlohmann::json>& documents);

ValidationReport validate(const KnowledgeBase& kb);

// Entities satisfying every slot constraint of the scenario, in KB order.
std::vector<const Entity*> candidate_entities(const KnowledgeBase& kb,
                                              const Scenario& scenario);

bool entity_satisfies(const Entity& entity,
                      const std::vector<Constraint>& constraints);

// Applies the scenario-wide "*" constraints plus the slot's own.
bool entity_fits_slot(const Scenario& scenario, const Entity& entity,
                      const std::string& slot_id);

// Parses a textual premise/conclusion pattern, e.g.
//   "rel(X, parent_of, Y)", "prop(X, gender, male)", "!slot(X, no1)".
Pattern parse_pattern(const std::string& text);

}  // namespace scoreforge
