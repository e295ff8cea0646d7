#include <algorithm>

#include "doctest.h"
#include "scoreforge/errors.hpp"
#include "scoreforge/kb.hpp"

using namespace scoreforge;

namespace {
const char* kSeedDir = SCOREFORGE_SOURCE_DIR "/seed";
}

TEST_CASE("seed KB loads fully linked") {
  KnowledgeBase kb = load_kb(kSeedDir);
  CHECK(kb.scenarios.size() == 5);
  CHECK(kb.entities.size() >= 20);
  CHECK(kb.locales == std::vector<std::string>{"en", "zh"});
  CHECK(kb.find_scenario("shelf_3x2") != nullptr);
  CHECK(kb.find_scenario("week_cycle") != nullptr);
  CHECK(kb.find_relation("left_of")->inverse == std::string("right_of"));
}

TEST_CASE("seed KB validates clean") {
  KnowledgeBase kb = load_kb(kSeedDir);
  ValidationReport report = validate(kb);
  for (const auto& f : report.findings)
    MESSAGE(f.code, " ", f.subject, ": ", f.message);
  CHECK(report.ok());
}

TEST_CASE("KB round-trips through serialization") {
  KnowledgeBase kb = load_kb(kSeedDir);
  KnowledgeBase again = load_kb_json({kb.to_json()});
  CHECK(again.to_json() == kb.to_json());
  CHECK(again.entities.size() == kb.entities.size());
  CHECK(again.rules.size() == kb.rules.size());
}

TEST_CASE("dangling relation reference is rejected") {
  nlohmann::json doc = {
      {"locales", {"en"}},
      {"scenarios",
       {{{"id", "s"},
         {"domain", "space"},
         {"slots", {{{"id", "a"}}, {{"id", "b"}, {"col", 1}}}},
         {"relation_vocab", {"left_of"}}}}},
  };
  CHECK_THROWS_AS(load_kb_json({doc}), DanglingReference);
}

TEST_CASE("duplicate entity ids are rejected") {
  nlohmann::json ent = {{"id", "strawberry"},
                        {"domain", "nature"},
                        {"names", {{"en", "strawberry"}}}};
  nlohmann::json doc = {{"locales", {"en"}}, {"entities", {ent, ent}}};
  CHECK_THROWS_AS(load_kb_json({doc}), DuplicateId);
}

TEST_CASE("fresh conclusion placeholder is a finding") {
  nlohmann::json doc = {
      {"locales", {"en"}},
      {"relations",
       {{{"id", "r"},
         {"domain", "space"},
         {"semantics", {{"kind", "grid"}, {"row", "0"}, {"col", "-1"}}}}}},
      {"rules",
       {{{"id", "bad"},
         {"kind", "equivalence"},
         {"premises", {"rel(X, r, X)"}},
         {"conclusion", "rel(X, r, Y)"}}}},
  };
  KnowledgeBase kb = load_kb_json({doc});
  ValidationReport report = validate(kb);
  bool found = false;
  for (const auto& f : report.findings)
    if (f.code == "fresh placeholder") found = true;
  CHECK(found);
}

TEST_CASE("unsatisfiable scenario is a finding") {
  KnowledgeBase kb = load_kb(kSeedDir);
  // Six person-constrained slots but only four persons.
  nlohmann::json doc = kb.to_json();
  auto persons = nlohmann::json::array();
  int kept = 0;
  for (auto& e : doc["entities"]) {
    if (e["properties"].value("kind", "") == "person" && ++kept > 4) continue;
    persons.push_back(e);
  }
  doc["entities"] = persons;
  nlohmann::json scen = {
      {"id", "six_persons"},
      {"domain", "social"},
      {"slots", nlohmann::json::array()},
      {"slot_constraints",
       {{"*", {{{"property", "kind"}, {"op", "equals"}, {"value", "person"}}}}}},
      {"relation_vocab", {"spouse_of"}},
      {"intro_templates", {{"en", "{entities}."}, {"zh", "{entities}。"}}}};
  for (int i = 0; i < 6; ++i)
    scen["slots"].push_back({{"id", "p" + std::to_string(i)}, {"col", i}});
  doc["scenarios"].push_back(scen);
  KnowledgeBase cut = load_kb_json({doc});
  ValidationReport report = validate(cut);
  bool found = false;
  for (const auto& f : report.findings)
    if (f.code == "unsatisfiable scenario" && f.subject == "six_persons") found = true;
  CHECK(found);
}

TEST_CASE("candidate_entities equals the brute-force filter") {
  KnowledgeBase kb = load_kb(kSeedDir);
  for (const auto& scenario : kb.scenarios) {
    auto got = candidate_entities(kb, scenario);
    std::vector<const Entity*> expect;
    for (const auto& e : kb.entities) {
      bool any = false;
      for (const auto& slot : scenario.slots)
        if (entity_fits_slot(scenario, e, slot.id)) any = true;
      if (any) expect.push_back(&e);
    }
    CHECK(got == expect);
  }
}

TEST_CASE("four-legged filter picks the fox") {
  KnowledgeBase kb = load_kb(kSeedDir);
  std::vector<std::string> pool = {"carp", "duck", "turkey", "fox"};
  std::vector<std::string> four_legged;
  for (const auto& id : pool) {
    const auto& e = kb.entity_or_throw(id);
    auto it = e.properties.find("legs");
    if (it != e.properties.end() && it->second == Value(4.0))
      four_legged.push_back(id);
  }
  CHECK(four_legged == std::vector<std::string>{"fox"});
}

TEST_CASE("empty constraints admit all entities") {
  KnowledgeBase kb = load_kb(kSeedDir);
  nlohmann::json doc = kb.to_json();
  nlohmann::json scen = {
      {"id", "open"},
      {"domain", "mix"},
      {"slots", {{{"id", "a"}}, {{"id", "b"}, {"col", 1}}}},
      {"relation_vocab", {"left_of"}},
      {"intro_templates", {{"en", "{entities}."}, {"zh", "{entities}。"}}}};
  doc["scenarios"].push_back(scen);
  KnowledgeBase kb2 = load_kb_json({doc});
  auto cands = candidate_entities(kb2, kb2.scenario_or_throw("open"));
  CHECK(cands.size() == kb2.entities.size());
}
