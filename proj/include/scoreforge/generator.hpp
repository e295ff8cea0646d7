#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scoreforge/difficulty.hpp"
#include "scoreforge/kb.hpp"
#include "scoreforge/reasoner.hpp"
#include "scoreforge/renderer.hpp"
#include "scoreforge/rng.hpp"
#include "scoreforge/solver.hpp"

namespace scoreforge {

struct GenConfig {
  uint64_t seed = 0;
  int hop_min = 2;
  int hop_max = 11;
  int retry_budget = 50;
  bool prune = true;
  int jobs = 1;
  std::vector<std::string> locales{"en", "zh"};
  ThresholdTable thresholds;
};

struct QuestionSpec {
  std::string scenario;
  std::string qtype;  // precise | vague | correct_statement | incorrect_statement
  std::optional<int> target_hops;
  // Stratum questions drop their target instead of failing the corpus when
  // the retry budget runs out.
  bool best_effort_target = false;
};

// One fully built puzzle/question pair, structured; rendering to a locale
// happens at emit time.
struct GeneratedQuestion {
  std::string scenario;
  uint64_t index = 0;
  std::vector<std::string> entities;                 // roster, sampled order
  std::map<std::string, std::string> assignment;     // ground truth
  std::vector<Fact> statements;                      // minimal unique set
  int statement_max_depth = 0;

  std::string qtype;
  std::optional<Query> query;      // precise / vague
  std::vector<Fact> option_facts;  // statement-judging types, option order
  std::vector<std::string> pool;   // precise / vague options, option order
  bool none_option = false;
  std::vector<std::string> answer_keys;  // sorted option letters
  Fact goal;

  DerivationChain chain;
  std::vector<std::pair<std::string, Fact>> chain_steps;  // rule id, derived fact
  Labels labels;
  std::string domain;  // mix when more than one domain label
  DifficultyFeatures features;
  double score = 0;
  std::string bucket;
};

class Generator {
public:
  Generator(const KnowledgeBase& kb, GenConfig config);

  // Instantiate, select statements, design the question, and score it.
  // Retries with fresh randomness until the chain length lands in range (or
  // hits the target); throws RetryBudgetExhausted past the budget.
  GeneratedQuestion generate_one(const QuestionSpec& spec, uint64_t index) const;

  // Deterministic in (kb, seed, plan) regardless of the worker count.
  std::vector<GeneratedQuestion> generate_corpus(
      const std::vector<QuestionSpec>& plan) const;

  // Sampled roster and uniform injective assignment for one scenario.
  struct Skeleton {
    std::vector<std::string> entities;
    std::map<std::string, std::string> assignment;
  };
  Skeleton instantiate(const Scenario& scenario, Rng& rng) const;

  const GenConfig& config() const { return cfg_; }
  const KnowledgeBase& kb() const { return *kb_; }

private:
  struct ScenarioCache {
    const Scenario* scenario = nullptr;
    Geometry geom;
    std::vector<Rule> scenario_rules;
    std::vector<const Entity*> candidates;
  };

  GeneratedQuestion try_generate(const QuestionSpec& spec, uint64_t index,
                                 Rng& rng) const;

  const KnowledgeBase* kb_;
  GenConfig cfg_;
  std::map<std::string, ScenarioCache> caches_;
};

// A fact usable as a puzzle clue or question goal: it says something about
// positions rather than restating standalone entity knowledge.
bool clue_eligible(const KnowledgeBase& kb, const Scenario& scenario,
                   const Fact& fact);

// Default corpus plan: scenarios round-robin, question types cycled (or
// fixed), and a light stratum of hop-targeted questions so any sizable run
// covers every chain length in the range. Strata land on the deepest-capable
// scenario (most slots among those declaring regions).
std::vector<QuestionSpec> build_plan(const KnowledgeBase& kb, int count,
                                     const std::string& scenario,
                                     const std::string& qtype, int hop_min,
                                     int hop_max);

// Serialization of one question into the dataset record schema.
nlohmann::json question_record(const KnowledgeBase& kb, const TemplateTable& table,
                               const GeneratedQuestion& q,
                               const std::string& locale, uint64_t master_seed);

// Line-delimited records, written atomically (temp file then rename).
// Returns the record count.
size_t emit_dataset(const std::vector<nlohmann::json>& records,
                    const std::filesystem::path& out);

}  // namespace scoreforge
