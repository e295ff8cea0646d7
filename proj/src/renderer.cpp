#include "scoreforge/renderer.hpp"

#include <fstream>

#include "scoreforge/errors.hpp"

namespace scoreforge {

const std::string* TemplateTable::try_lookup(const std::string& locale,
                                             const std::string& key) const {
  auto lt = tables.find(locale);
  if (lt == tables.end()) return nullptr;
  auto it = lt->second.find(key);
  return it == lt->second.end() ? nullptr : &it->second;
}

const std::string& TemplateTable::lookup(const std::string& locale,
                                         const std::string& key) const {
  const std::string* t = try_lookup(locale, key);
  if (!t)
    throw MissingTemplate("no template '" + key + "' for locale '" + locale + "'");
  return *t;
}

TemplateTable load_templates(const std::filesystem::path& dir,
                             const std::vector<std::string>& locales) {
  TemplateTable table;
  for (const auto& locale : locales) {
    auto path = dir / (locale + ".json");
    std::ifstream in(path);
    if (!in) throw MissingTemplate("cannot open template file " + path.string());
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("parse error in " + path.string() + ": " + e.what());
    }
    for (auto it = doc.begin(); it != doc.end(); ++it)
      table.tables[locale][it.key()] = it.value().get<std::string>();
  }
  return table;
}

namespace {

void replace_all(std::string& text, const std::string& hole,
                 const std::string& value) {
  size_t pos = 0;
  while ((pos = text.find(hole, pos)) != std::string::npos) {
    text.replace(pos, hole.size(), value);
    pos += value.size();
  }
}

void check_no_holes(const std::string& text, const std::string& where) {
  size_t open = text.find('{');
  if (open != std::string::npos && text.find('}', open) != std::string::npos)
    throw MissingHoleBinding("unfilled hole in rendered text for " + where +
                             ": " + text);
}

std::string value_display(const RenderContext& ctx, const std::string& property,
                          const Value& value) {
  if (std::holds_alternative<double>(value))
    return format_number(std::get<double>(value));
  if (std::holds_alternative<std::string>(value)) {
    const std::string& v = std::get<std::string>(value);
    if (const auto* decl = ctx.kb->find_property(property)) {
      auto vit = decl->value_names.find(v);
      if (vit != decl->value_names.end()) {
        auto lit = vit->second.find(ctx.locale);
        if (lit != vit->second.end()) return lit->second;
      }
    }
    return v;
  }
  return std::get<bool>(value) ? "true" : "false";
}

std::string term_display(const RenderContext& ctx, const Term& term) {
  switch (term.kind) {
    case Term::Kind::Entity: {
      const auto& e = ctx.kb->entity_or_throw(term.id);
      auto it = e.names.find(ctx.locale);
      if (it == e.names.end())
        throw MissingHoleBinding("entity '" + term.id + "' has no name for locale '" +
                                 ctx.locale + "'");
      return it->second;
    }
    case Term::Kind::SlotRef:
      return ctx.table->lookup(ctx.locale,
                               "slotref." + ctx.scenario->id + "." + term.id);
    case Term::Kind::Desc: {
      std::string key = "desc." + term.prop + "." + value_key(term.value);
      const std::string* t = ctx.table->try_lookup(ctx.locale, key);
      if (!t) t = &ctx.table->lookup(ctx.locale, "desc." + term.prop);
      std::string text = *t;
      replace_all(text, "{value}", value_display(ctx, term.prop, term.value));
      return text;
    }
    case Term::Kind::None:
      break;
  }
  throw MissingHoleBinding("fact has an unbound term");
}

std::string render_fact_impl(const RenderContext& ctx, const Fact& fact,
                             int masked /* -1 none, 0 subj, 1 obj, 2 value */) {
  const std::string mask_text = ctx.table->lookup(ctx.locale, "mask");
  std::string key;
  switch (fact.form) {
    case FactForm::SlotAssign:
      key = "slot." + ctx.scenario->id + "." + fact.predicate;
      break;
    case FactForm::Property:
      key = "prop." + fact.predicate;
      break;
    case FactForm::Relation:
      key = "rel." + fact.predicate;
      break;
  }
  // Per-value phrasings ("has no legs", "lives on land") take precedence;
  // boolean properties always resolve through their .true/.false variants.
  const std::string* tpl = nullptr;
  const std::string suffix = fact.truth ? "" : ".neg";
  if (fact.form == FactForm::Property && masked != 2)
    tpl = ctx.table->try_lookup(ctx.locale,
                                key + "." + value_key(fact.value) + suffix);
  if (!tpl) tpl = ctx.table->try_lookup(ctx.locale, key + suffix);
  if (!tpl)
    throw MissingTemplate("no template '" + key + suffix + "' for locale '" +
                          ctx.locale + "'");
  std::string text = *tpl;

  replace_all(text, "{subject}",
              masked == 0 ? mask_text : term_display(ctx, fact.subject));
  if (fact.form == FactForm::Relation)
    replace_all(text, "{object}",
                masked == 1 ? mask_text : term_display(ctx, fact.object));
  if (fact.form == FactForm::Property && !std::holds_alternative<bool>(fact.value))
    replace_all(text, "{value}",
                masked == 2 ? mask_text
                            : value_display(ctx, fact.predicate, fact.value));
  if (fact.param) replace_all(text, "{param}", format_number(*fact.param));
  check_no_holes(text, key);
  return text;
}

}  // namespace

std::string render_fact(const RenderContext& ctx, const Fact& fact) {
  return render_fact_impl(ctx, fact, -1);
}

std::string render_masked_fact(const RenderContext& ctx, const Fact& fact,
                               Query::Mask mask) {
  switch (mask) {
    case Query::Mask::Subject:
      return render_fact_impl(ctx, fact, 0);
    case Query::Mask::Object:
      return render_fact_impl(ctx, fact, 1);
    case Query::Mask::Value:
      return render_fact_impl(ctx, fact, 2);
    case Query::Mask::Slot: {
      std::string text =
          ctx.table->lookup(ctx.locale, "slot." + ctx.scenario->id + ".masked");
      replace_all(text, "{subject}", term_display(ctx, fact.subject));
      check_no_holes(text, "slot." + ctx.scenario->id + ".masked");
      return text;
    }
  }
  throw MissingTemplate("unsupported mask");
}

std::string render_entity_list(const RenderContext& ctx,
                               const std::vector<std::string>& entity_ids) {
  const std::string& sep = ctx.table->lookup(ctx.locale, "list.sep");
  const std::string& last = ctx.table->lookup(ctx.locale, "list.last_sep");
  std::string out;
  for (size_t i = 0; i < entity_ids.size(); ++i) {
    if (i > 0) out += (i + 1 == entity_ids.size()) ? last : sep;
    out += term_display(ctx, Term::entity(entity_ids[i]));
  }
  return out;
}

std::string render_context_text(const RenderContext& ctx,
                                const std::vector<Fact>& statements,
                                const std::vector<std::string>& entity_ids) {
  auto intro_it = ctx.scenario->intro_templates.find(ctx.locale);
  if (intro_it == ctx.scenario->intro_templates.end())
    throw MissingTemplate("scenario '" + ctx.scenario->id +
                          "' has no intro for locale '" + ctx.locale + "'");
  std::string intro = intro_it->second;
  replace_all(intro, "{entities}", render_entity_list(ctx, entity_ids));
  check_no_holes(intro, "intro." + ctx.scenario->id);

  std::string out = intro;
  out += ctx.table->lookup(ctx.locale, "context.glue");
  out += ctx.table->lookup(ctx.locale, "context.known");
  const std::string& sep = ctx.table->lookup(ctx.locale, "context.sep");
  const std::string& end = ctx.table->lookup(ctx.locale, "context.end");
  for (size_t i = 0; i < statements.size(); ++i) {
    out += "\n";
    out += render_fact(ctx, statements[i]);
    out += (i + 1 == statements.size()) ? end : sep;
  }
  return out;
}

std::string render_pool_item(const RenderContext& ctx, Query::Mask mask,
                             const std::string& item,
                             const std::string& property) {
  switch (mask) {
    case Query::Mask::Subject:
    case Query::Mask::Object:
      return term_display(ctx, Term::entity(item));
    case Query::Mask::Slot: {
      const auto& slot = ctx.scenario->slot(item);
      auto it = slot.names.find(ctx.locale);
      if (it == slot.names.end())
        throw MissingTemplate("slot '" + item + "' has no display name for '" +
                              ctx.locale + "'");
      return it->second;
    }
    case Query::Mask::Value: {
      const auto* decl = ctx.kb->find_property(property);
      if (decl && decl->type == ValueType::Number)
        return format_number(std::stod(item));
      return value_display(ctx, property, Value(item));
    }
  }
  throw MissingTemplate("unsupported mask");
}

std::string render_prompt(const RenderContext& ctx,
                          const std::string& context_text,
                          const std::string& question_text,
                          const std::vector<std::pair<std::string, std::string>>& options) {
  std::string choice_text;
  for (size_t i = 0; i < options.size(); ++i) {
    if (i > 0) choice_text += "\n";
    choice_text += options[i].first + ". " + options[i].second;
  }
  std::string out = context_text;
  out += "\n\n";
  out += ctx.table->lookup(ctx.locale, "prompt.question_label");
  out += question_text;
  out += "\n\n";
  out += ctx.table->lookup(ctx.locale, "prompt.options_label");
  out += "\n";
  out += choice_text;
  out += "\n\n";
  out += ctx.table->lookup(ctx.locale, "prompt.instructions");
  out += ctx.table->lookup(ctx.locale, "prompt.answer_label");
  return out;
}

}  // namespace scoreforge
