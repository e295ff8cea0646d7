#include <set>

#include "doctest.h"
#include "scoreforge/errors.hpp"
#include "scoreforge/generator.hpp"

using namespace scoreforge;

namespace {

const char* kSeedDir = SCOREFORGE_SOURCE_DIR "/seed";

KnowledgeBase& seed_kb() {
  static KnowledgeBase kb = load_kb(kSeedDir);
  return kb;
}

GenConfig test_config(uint64_t seed) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.jobs = 2;
  for (const auto* d : {"space", "time", "social", "nature", "mix"})
    cfg.thresholds[d] = {1.0, 2.5};
  return cfg;
}

// Independent answer recomputation through the solver, mirroring what a
// consumer of the record schema would do.
std::vector<std::string> oracle_answer(const KnowledgeBase& kb,
                                       const GeneratedQuestion& q) {
  const auto& scenario = kb.scenario_or_throw(q.scenario);
  AssignmentSpace space;
  space.kb = &kb;
  space.scenario = &scenario;
  for (const auto& id : q.entities) space.candidates.push_back(&kb.entity_or_throw(id));
  space.statements = q.statements;

  auto models = consistent_assignments(space);
  REQUIRE(models.size() == 1);
  for (const auto& [slot, eid] : q.assignment) CHECK(models[0].at(slot) == eid);

  std::vector<std::string> keys;
  auto letter = [](size_t i) { return std::string(1, char('A' + i)); };
  if (q.query) {
    auto answers = answer_set(space, *q.query, QueryMode::Vague);
    std::set<std::string> answer_set_ids(answers.begin(), answers.end());
    bool any = false;
    for (size_t i = 0; i < q.pool.size(); ++i)
      if (answer_set_ids.count(q.pool[i])) {
        keys.push_back(letter(i));
        any = true;
      }
    if (!any && q.none_option) keys.push_back(letter(q.pool.size()));
  } else {
    Geometry geom = Geometry::build(scenario);
    std::vector<int> eos(scenario.slots.size(), -1), soe(space.candidates.size(), -1);
    for (const auto& [slot, eid] : models[0]) {
      int si = scenario.slot_index(slot);
      for (size_t i = 0; i < space.candidates.size(); ++i)
        if (space.candidates[i]->id == eid) { eos[si] = int(i); soe[i] = si; }
    }
    EvalContext ev{&kb, &scenario, &geom, &space.candidates, &eos, &soe};
    bool want_correct = q.qtype == "correct_statement";
    bool any = false;
    for (size_t i = 0; i < q.option_facts.size(); ++i)
      if (eval_fact(ev, q.option_facts[i]) == want_correct) {
        keys.push_back(letter(i));
        any = true;
      }
    if (!any && q.none_option) keys.push_back(letter(q.option_facts.size()));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

TEST_CASE("instantiate is deterministic and injective") {
  auto& kb = seed_kb();
  Generator gen(kb, test_config(5));
  const auto& scenario = kb.scenario_or_throw("booth_2x2");
  Rng a(123), b(123);
  auto s1 = gen.instantiate(scenario, a);
  auto s2 = gen.instantiate(scenario, b);
  CHECK(s1.entities == s2.entities);
  CHECK(s1.assignment == s2.assignment);

  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(trial);
    auto skel = gen.instantiate(scenario, rng);
    std::set<std::string> distinct(skel.entities.begin(), skel.entities.end());
    CHECK(distinct.size() == scenario.slots.size());
    for (const auto& [slot, eid] : skel.assignment)
      CHECK(entity_fits_slot(scenario, kb.entity_or_throw(eid), slot));
  }
}

TEST_CASE("per-slot constraints hold under sampling") {
  auto& kb = seed_kb();
  Generator gen(kb, test_config(6));
  const auto& family = kb.scenario_or_throw("family_tree");
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(trial);
    auto skel = gen.instantiate(family, rng);
    CHECK(kb.entity_or_throw(skel.assignment.at("grand_a")).properties.at("gender") ==
          Value(std::string("male")));
    CHECK(kb.entity_or_throw(skel.assignment.at("grand_b")).properties.at("gender") ==
          Value(std::string("female")));
  }
}

TEST_CASE("pigeonhole failures raise UnsatisfiableScenario") {
  auto& kb = seed_kb();
  nlohmann::json doc = kb.to_json();
  nlohmann::json scen = {
      {"id", "too_big"},
      {"domain", "social"},
      {"slots", nlohmann::json::array()},
      {"slot_constraints",
       {{"*",
         {{{"property", "gender"}, {"op", "equals"}, {"value", "male"}}}}}},
      {"relation_vocab", {"spouse_of"}},
      {"intro_templates", {{"en", "{entities}."}, {"zh", "{entities}。"}}}};
  for (int i = 0; i < 6; ++i)
    scen["slots"].push_back({{"id", "s" + std::to_string(i)}, {"col", i}});
  doc["scenarios"].push_back(scen);
  static KnowledgeBase kb2 = load_kb_json({doc});
  Generator gen(kb2, test_config(1));
  Rng rng(0);
  // Only five male persons exist in the seed.
  CHECK_THROWS_AS(gen.instantiate(kb2.scenario_or_throw("too_big"), rng),
                  UnsatisfiableScenario);
}

TEST_CASE("emitted questions withstand the solver oracle") {
  auto& kb = seed_kb();
  Generator gen(kb, test_config(99));
  auto plan = build_plan(kb, 60, "", "mixed", 2, 11);
  auto corpus = gen.generate_corpus(plan);
  REQUIRE(corpus.size() == 60);
  for (const auto& q : corpus) {
    CHECK(oracle_answer(kb, q) == q.answer_keys);
    CHECK(q.chain.hops >= 2);
    CHECK(q.chain.hops <= 11);
    CHECK_FALSE(q.answer_keys.empty());
  }
}

TEST_CASE("statement sets are 1-minimal") {
  auto& kb = seed_kb();
  Generator gen(kb, test_config(7));
  auto plan = build_plan(kb, 20, "", "mixed", 2, 11);
  auto corpus = gen.generate_corpus(plan);
  for (const auto& q : corpus) {
    const auto& scenario = kb.scenario_or_throw(q.scenario);
    AssignmentSpace space;
    space.kb = &kb;
    space.scenario = &scenario;
    for (const auto& id : q.entities)
      space.candidates.push_back(&kb.entity_or_throw(id));
    space.statements = q.statements;
    CHECK(is_unique(space));
    for (size_t drop = 0; drop < q.statements.size(); ++drop) {
      AssignmentSpace sub = space;
      sub.statements.erase(sub.statements.begin() + drop);
      CHECK(consistent_assignments(sub).size() != 1);
    }
  }
}

TEST_CASE("option rule: four slots list everything, otherwise none-of-the-above") {
  auto& kb = seed_kb();
  Generator gen(kb, test_config(13));
  auto plan = build_plan(kb, 40, "", "mixed", 2, 11);
  auto corpus = gen.generate_corpus(plan);
  for (const auto& q : corpus) {
    size_t slots = kb.scenario_or_throw(q.scenario).slots.size();
    size_t options = q.pool.size() + q.option_facts.size() + (q.none_option ? 1 : 0);
    CHECK(options == 4);
    CHECK(q.none_option == (slots != 4));
  }
}

TEST_CASE("same seed and plan reproduce identical records") {
  auto& kb = seed_kb();
  TemplateTable table = load_templates(std::string(kSeedDir) + "/templates", kb.locales);
  auto run = [&](int jobs) {
    GenConfig cfg = test_config(4242);
    cfg.jobs = jobs;
    Generator gen(kb, cfg);
    auto corpus = gen.generate_corpus(build_plan(kb, 12, "", "mixed", 2, 11));
    std::string out;
    for (const auto& q : corpus)
      for (const auto& loc : kb.locales)
        out += question_record(kb, table, q, loc, cfg.seed).dump() + "\n";
    return out;
  };
  std::string once = run(1);
  CHECK(once == run(1));
  // Worker count must not leak into the bytes.
  CHECK(once == run(3));
}

TEST_CASE("retry budget exhaustion is reported") {
  auto& kb = seed_kb();
  GenConfig cfg = test_config(3);
  cfg.retry_budget = 2;
  Generator gen(kb, cfg);
  QuestionSpec spec{"booth_2x2", "precise", 11};  // unreachable on 4 slots
  CHECK_THROWS_AS(gen.generate_one(spec, 0), RetryBudgetExhausted);
}

TEST_CASE("unknown scenarios are rejected") {
  auto& kb = seed_kb();
  Generator gen(kb, test_config(3));
  CHECK_THROWS_AS(gen.generate_one({"nope", "precise", std::nullopt}, 0),
                  UnknownScenario);
}

TEST_CASE("dataset emission is atomic and countable") {
  auto& kb = seed_kb();
  TemplateTable table = load_templates(std::string(kSeedDir) + "/templates", kb.locales);
  Generator gen(kb, test_config(21));
  auto corpus = gen.generate_corpus(build_plan(kb, 4, "", "mixed", 2, 11));
  std::vector<nlohmann::json> records;
  for (const auto& q : corpus)
    records.push_back(question_record(kb, table, q, "en", 21));

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "sf_emit_test";
  fs::create_directories(dir);
  fs::path out = dir / "data.jsonl";
  CHECK(emit_dataset(records, out) == 4);
  CHECK(fs::exists(out));
  CHECK_FALSE(fs::exists(out.string() + ".tmp"));

  CHECK(emit_dataset({}, dir / "empty.jsonl") == 0);
  CHECK(fs::file_size(dir / "empty.jsonl") == 0);

  // A failing sink leaves no partial output behind.
  fs::path bad = dir / "missing_dir" / "data.jsonl";
  CHECK_THROWS_AS(emit_dataset(records, bad), SinkError);
  CHECK_FALSE(fs::exists(bad));
}
