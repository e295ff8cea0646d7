#include <algorithm>

#include "doctest.h"
#include "scoreforge/errors.hpp"
#include "scoreforge/kb.hpp"
#include "scoreforge/solver.hpp"

using namespace scoreforge;

namespace {

const char* kSeedDir = SCOREFORGE_SOURCE_DIR "/seed";

KnowledgeBase& seed_kb() {
  static KnowledgeBase kb = load_kb(kSeedDir);
  return kb;
}

std::vector<const Entity*> roster(const KnowledgeBase& kb,
                                  const std::vector<std::string>& ids) {
  std::vector<const Entity*> out;
  for (const auto& id : ids) out.push_back(&kb.entity_or_throw(id));
  return out;
}

}  // namespace

TEST_CASE("empty statement set admits all permutations") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("booth_2x2"),
                        roster(kb, {"david", "jennifer"}), {}};
  // Two people over four seats: 4 * 3 injective maps... seats outnumber
  // people here, so restrict to a 2-slot scenario instead.
  AssignmentSpace two{&kb, kb.find_scenario("enclosures_row"),
                      roster(kb, {"carp", "duck", "turkey", "fox"}), {}};
  CHECK(consistent_assignments(two).size() == 24);
  (void)space;
}

TEST_CASE("a single ordering statement pins two entities") {
  auto& kb = seed_kb();
  nlohmann::json doc = kb.to_json();
  nlohmann::json scen = {
      {"id", "pair_row"},
      {"domain", "nature"},
      {"slots", {{{"id", "a"}}, {{"id", "b"}, {"col", 1}}}},
      {"slot_constraints",
       {{"*", {{{"property", "kind"}, {"op", "equals"}, {"value", "animal"}}}}}},
      {"relation_vocab", {"left_of", "right_of"}},
      {"intro_templates", {{"en", "{entities}."}, {"zh", "{entities}。"}}}};
  doc["scenarios"].push_back(scen);
  static KnowledgeBase kb2 = load_kb_json({doc});
  const auto* pair_row = kb2.find_scenario("pair_row");

  AssignmentSpace space{&kb2, pair_row, roster(kb2, {"carp", "duck"}), {}};
  CHECK(consistent_assignments(space).size() == 2);
  CHECK_FALSE(is_unique(space));

  space.statements.push_back(Fact::relation(Term::entity("carp"), "left_of",
                                            Term::entity("duck")));
  auto models = consistent_assignments(space);
  REQUIRE(models.size() == 1);
  CHECK(models[0].at("a") == "carp");
  CHECK(models[0].at("b") == "duck");
  CHECK(is_unique(space));

  space.statements.push_back(Fact::relation(Term::entity("duck"), "left_of",
                                            Term::entity("carp")));
  CHECK_THROWS_AS(is_unique(space), NoConsistentAssignment);
}

TEST_CASE("zoo enclosure puzzle answers turkey") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("enclosures_row"),
                        roster(kb, {"carp", "duck", "turkey", "fox"}), {}};
  // The animal in No.3 has 4 fewer legs than the animal in No.4; the animal
  // in No.2 can swim.
  space.statements.push_back(Fact::relation(Term::slot_ref("no3"),
                                            "fewer_legs_than",
                                            Term::slot_ref("no4"), 4.0));
  space.statements.push_back(
      Fact::property(Term::slot_ref("no2"), "can_swim", true));

  auto models = consistent_assignments(space);
  REQUIRE(models.size() == 1);
  CHECK(models[0].at("no1") == "turkey");
  CHECK(models[0].at("no2") == "duck");
  CHECK(models[0].at("no3") == "carp");
  CHECK(models[0].at("no4") == "fox");

  Query q;
  q.fact = Fact::slot_assign(Term::entity("?"), "no1");
  q.mask = Query::Mask::Subject;
  auto answers = answer_set(space, q, QueryMode::Precise);
  CHECK(answers == std::vector<std::string>{"turkey"});
}

TEST_CASE("booth puzzle answers David in every model") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("booth_2x2"),
                        roster(kb, {"david", "jennifer", "john", "james"}), {}};
  space.statements.push_back(Fact::relation(
      Term::entity("david"), "right_neighbor_of", Term::entity("jennifer")));
  space.statements.push_back(Fact::relation(
      Term::entity("john"), "right_neighbor_of", Term::entity("james")));

  auto models = consistent_assignments(space);
  CHECK(models.size() == 2);

  Query q;
  q.fact = Fact::relation(Term::entity("?"), "diagonally_opposite",
                          Term::entity("john"));
  q.mask = Query::Mask::Subject;
  auto answers = answer_set(space, q, QueryMode::Vague);
  CHECK(answers == std::vector<std::string>{"david"});
}

TEST_CASE("prune removes a redundant restatement") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("enclosures_row"),
                        roster(kb, {"carp", "duck", "turkey", "fox"}), {}};
  space.statements.push_back(Fact::slot_assign(Term::entity("carp"), "no1"));
  space.statements.push_back(Fact::slot_assign(Term::entity("duck"), "no2"));
  space.statements.push_back(Fact::slot_assign(Term::entity("turkey"), "no3"));
  // Redundant: forced once the first three are placed.
  space.statements.push_back(Fact::slot_assign(Term::entity("fox"), "no4"));
  // Redundant: true regardless of the arrangement.
  space.statements.push_back(Fact::relation(Term::entity("duck"),
                                            "more_legs_than",
                                            Term::entity("carp"), 2.0));
  REQUIRE(is_unique(space));
  auto minimal = prune_to_minimal(space);
  CHECK(minimal.size() == 3);

  // 1-minimality: dropping any survivor breaks uniqueness.
  for (size_t i = 0; i < minimal.size(); ++i) {
    std::vector<Fact> sub = minimal;
    sub.erase(sub.begin() + i);
    AssignmentSpace s2{space.kb, space.scenario, space.candidates, sub};
    CHECK(consistent_assignments(s2).size() != 1);
  }
}

TEST_CASE("already minimal sets come back unchanged") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("enclosures_row"),
                        roster(kb, {"carp", "duck", "turkey", "fox"}), {}};
  space.statements.push_back(Fact::slot_assign(Term::entity("carp"), "no1"));
  space.statements.push_back(Fact::slot_assign(Term::entity("duck"), "no2"));
  space.statements.push_back(Fact::slot_assign(Term::entity("turkey"), "no3"));
  auto minimal = prune_to_minimal(space);
  REQUIRE(minimal.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK(minimal[i].key() == space.statements[i].key());
}

TEST_CASE("vague queries intersect over all models") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("enclosures_row"),
                        roster(kb, {"carp", "duck", "turkey", "fox"}), {}};
  // Pin only carp; ask who is somewhere right of carp. Everyone else is, in
  // every model, since carp holds the leftmost slot.
  space.statements.push_back(Fact::slot_assign(Term::entity("carp"), "no1"));
  Query q;
  q.fact = Fact::relation(Term::entity("?"), "right_of", Term::entity("carp"));
  q.mask = Query::Mask::Subject;
  auto answers = answer_set(space, q, QueryMode::Vague);
  CHECK(answers == std::vector<std::string>{"duck", "turkey", "fox"});

  // Precise mode refuses a non-unique space.
  CHECK_THROWS_AS(answer_set(space, q, QueryMode::Precise), NotUnique);
}

TEST_CASE("statements outside the vocabulary are rejected") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("enclosures_row"),
                        roster(kb, {"carp", "duck", "turkey", "fox"}), {}};
  space.statements.push_back(Fact::relation(Term::entity("carp"), "days_after",
                                            Term::entity("duck"), 2.0));
  CHECK_THROWS_AS(consistent_assignments(space), VocabularyMismatch);
}

TEST_CASE("query over an empty candidate match yields the empty set") {
  auto& kb = seed_kb();
  AssignmentSpace space{&kb, kb.find_scenario("enclosures_row"),
                        roster(kb, {"carp", "duck", "turkey", "fox"}), {}};
  space.statements.push_back(Fact::slot_assign(Term::entity("carp"), "no1"));
  space.statements.push_back(Fact::slot_assign(Term::entity("duck"), "no2"));
  space.statements.push_back(Fact::slot_assign(Term::entity("turkey"), "no3"));
  Query q;
  // Nothing is left of the leftmost enclosure.
  q.fact = Fact::relation(Term::entity("?"), "left_of", Term::entity("carp"));
  q.mask = Query::Mask::Subject;
  auto answers = answer_set(space, q, QueryMode::Precise);
  CHECK(answers.empty());
}
