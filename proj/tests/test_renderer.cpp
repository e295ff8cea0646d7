#include <map>
#include <set>

#include "doctest.h"
#include "scoreforge/errors.hpp"
#include "scoreforge/renderer.hpp"
#include "scoreforge/reasoner.hpp"
#include "scoreforge/rules.hpp"

using namespace scoreforge;

namespace {

const char* kSeedDir = SCOREFORGE_SOURCE_DIR "/seed";

struct Fixture {
  KnowledgeBase kb = load_kb(kSeedDir);
  TemplateTable table =
      load_templates(std::string(kSeedDir) + "/templates", kb.locales);

  RenderContext ctx(const std::string& scenario, const std::string& locale) {
    return RenderContext{&kb, &kb.scenario_or_throw(scenario), &table, locale};
  }
};

}  // namespace

TEST_CASE("basic fact rendering fills every hole") {
  Fixture fx;
  auto en = fx.ctx("shelf_3x2", "en");
  Fact f = Fact::property(Term::entity("strawberry"), "tier", "middle");
  CHECK(render_fact(en, f) == "strawberry is on the middle tier");
  CHECK(render_fact(fx.ctx("shelf_3x2", "zh"), f) == "草莓在中层");

  Fact rel = Fact::relation(Term::entity("strawberry"), "left_of",
                            Term::entity("lemon"));
  CHECK(render_fact(en, rel) == "strawberry is somewhere to the left of lemon");

  Fact desc = Fact::property(Term::desc("color", Value(std::string("red"))),
                             "tier", "middle");
  CHECK(render_fact(en, desc) == "the red item is on the middle tier");

  Fact legs = Fact::property(Term::entity("carp"), "legs", 0.0);
  CHECK(render_fact(fx.ctx("enclosures_row", "en"), legs) == "carp has no legs");

  Fact neg = Fact::slot_assign(Term::entity("carp"), "no2");
  neg.truth = false;
  CHECK(render_fact(fx.ctx("enclosures_row", "en"), neg) ==
        "carp is not kept in enclosure No.2");
}

TEST_CASE("missing templates and names throw") {
  Fixture fx;
  auto en = fx.ctx("shelf_3x2", "en");
  Fact f = Fact::property(Term::entity("strawberry"), "tier", "middle");
  RenderContext bad = en;
  bad.locale = "fr";
  CHECK_THROWS_AS(render_fact(bad, f), MissingTemplate);

  Fact unbound = Fact::property(Term{}, "tier", "middle");
  CHECK_THROWS_AS(render_fact(en, unbound), MissingHoleBinding);
}

TEST_CASE("masked stems keep the blank visible") {
  Fixture fx;
  auto en = fx.ctx("enclosures_row", "en");
  Fact f = Fact::slot_assign(Term::entity("carp"), "no1");
  CHECK(render_masked_fact(en, f, Query::Mask::Subject) ==
        "____ is kept in enclosure No.1");
  CHECK(render_masked_fact(en, f, Query::Mask::Slot) == "carp is kept in ____");
}

TEST_CASE("prompt layout is byte exact") {
  Fixture fx;
  auto en = fx.ctx("enclosures_row", "en");
  std::string prompt = render_prompt(
      en, "Some context.", "What is kept in enclosure No.1?",
      {{"A", "carp"}, {"B", "duck"}, {"C", "turkey"}, {"D", "None of the above"}});
  CHECK(prompt ==
        "Some context.\n\n"
        "Question: What is kept in enclosure No.1?\n\n"
        "Options:\n"
        "A. carp\nB. duck\nC. turkey\nD. None of the above\n\n"
        "All questions are multiple-choice with one or more correct answers.\n"
        "No partial credit will be given for incorrect or incomplete answers.\n"
        "Answer choices must exactly match the standard answer to be considered correct.\n"
        "Please think step by step and finally place the answer choices in [].\n"
        "Answer:");

  auto zh = fx.ctx("enclosures_row", "zh");
  std::string prompt_zh = render_prompt(zh, "背景。", "1号场馆里养的是什么？",
                                        {{"A", "鲤鱼"}, {"B", "鸭子"}});
  CHECK(prompt_zh ==
        "背景。\n\n"
        "问题：1号场馆里养的是什么？\n\n"
        "选项：\nA. 鲤鱼\nB. 鸭子\n\n"
        "题目均为不定项选择题。多选或漏选均不得分。\n"
        "答案选项必须与标准答案完全一致才能得分。\n"
        "请逐步思考，并最终将答案选项放在【】中。\n"
        "回答：");
}

TEST_CASE("a line scanner can recover the options from a prompt") {
  Fixture fx;
  auto en = fx.ctx("enclosures_row", "en");
  std::vector<std::pair<std::string, std::string>> options{
      {"A", "carp"}, {"B", "duck"}, {"C", "turkey"}, {"D", "None of the above"}};
  std::string prompt = render_prompt(en, "Ctx.", "Q?", options);

  std::map<std::string, std::string> parsed;
  size_t pos = 0;
  bool in_options = false;
  while (pos < prompt.size()) {
    size_t eol = prompt.find('\n', pos);
    if (eol == std::string::npos) eol = prompt.size();
    std::string line = prompt.substr(pos, eol - pos);
    pos = eol + 1;
    if (line == "Options:") { in_options = true; continue; }
    if (in_options) {
      if (line.size() < 3 || line[1] != '.') break;
      parsed[line.substr(0, 1)] = line.substr(3);
    }
  }
  REQUIRE(parsed.size() == options.size());
  for (const auto& [k, text] : options) CHECK(parsed.at(k) == text);
}

TEST_CASE("rendering is injective over a closed instance") {
  Fixture fx;
  const auto& scenario = fx.kb.scenario_or_throw("shelf_3x2");
  Geometry geom = Geometry::build(scenario);
  std::vector<const Entity*> roster;
  for (const auto* id : {"strawberry", "lemon", "flute", "conch", "turkey", "envelope"})
    roster.push_back(&fx.kb.entity_or_throw(id));
  ChainContext cctx{&fx.kb, &scenario, &geom, &roster};
  std::map<std::string, std::string> assignment;
  for (size_t i = 0; i < roster.size(); ++i)
    assignment[scenario.slots[i].id] = roster[i]->id;
  auto rules = expand_scenario_rules(fx.kb, scenario, geom);
  auto inst = expand_instance_rules(fx.kb, scenario, geom, roster);
  rules.insert(rules.end(), inst.begin(), inst.end());
  FactBase fb = init_facts(cctx, assignment);
  chain_to_fixpoint(fb, rules, cctx);

  for (const auto& locale : fx.kb.locales) {
    RenderContext rctx{&fx.kb, &scenario, &fx.table, locale};
    std::map<std::string, std::string> seen;  // text -> fact key
    for (const auto& f : fb.facts()) {
      std::string text = render_fact(rctx, f);
      CHECK(text.find('{') == std::string::npos);
      auto [it, fresh] = seen.emplace(text, f.key());
      if (!fresh) CHECK(it->second == f.key());
    }
  }
}

TEST_CASE("entity lists follow locale conventions") {
  Fixture fx;
  auto en = fx.ctx("enclosures_row", "en");
  CHECK(render_entity_list(en, {"carp", "duck", "turkey", "fox"}) ==
        "carp, duck, turkey and fox");
  auto zh = fx.ctx("enclosures_row", "zh");
  CHECK(render_entity_list(zh, {"carp", "duck", "turkey", "fox"}) ==
        "鲤鱼、鸭子、火鸡、狐狸");
}
