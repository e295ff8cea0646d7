#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scoreforge/fact.hpp"
#include "scoreforge/kb.hpp"
#include "scoreforge/solver.hpp"

namespace scoreforge {

// Locale -> template key -> template string. Templates are data files beside
// the KB, one file per locale.
class TemplateTable {
public:
  std::map<std::string, std::map<std::string, std::string>> tables;

  const std::string& lookup(const std::string& locale,
                            const std::string& key) const;
  const std::string* try_lookup(const std::string& locale,
                                const std::string& key) const;
};

TemplateTable load_templates(const std::filesystem::path& dir,
                             const std::vector<std::string>& locales);

struct RenderContext {
  const KnowledgeBase* kb = nullptr;
  const Scenario* scenario = nullptr;
  const TemplateTable* table = nullptr;
  std::string locale;
};

// One fluent sentence for a grounded fact; no hole markers survive. Throws
// MissingTemplate / MissingHoleBinding.
std::string render_fact(const RenderContext& ctx, const Fact& fact);

// The fact with one element masked out as a blank, used as a question stem.
std::string render_masked_fact(const RenderContext& ctx, const Fact& fact,
                               Query::Mask mask);

std::string render_entity_list(const RenderContext& ctx,
                               const std::vector<std::string>& entity_ids);

// Intro sentence(s) plus the enumerated statements.
std::string render_context_text(const RenderContext& ctx,
                                const std::vector<Fact>& statements,
                                const std::vector<std::string>& entity_ids);

// Display text for an answer-pool member (entity id, slot id, or value key).
std::string render_pool_item(const RenderContext& ctx, Query::Mask mask,
                             const std::string& item,
                             const std::string& property = "");

// Full model prompt in the fixed layout: context, question, keyed options,
// instruction block, answer label.
std::string render_prompt(const RenderContext& ctx,
                          const std::string& context_text,
                          const std::string& question_text,
                          const std::vector<std::pair<std::string, std::string>>& options);

}  // namespace scoreforge
