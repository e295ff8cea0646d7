#include "scoreforge/cli.hpp"

#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "scoreforge/errors.hpp"
#include "scoreforge/evalharness.hpp"
#include "scoreforge/generator.hpp"
#include "scoreforge/reasoner.hpp"
#include "scoreforge/rules.hpp"
#include "scoreforge/solver.hpp"
#include "scoreforge/version.hpp"

namespace scoreforge {

namespace {

struct CommonOpts {
  std::string kb_path = "seed";
  std::string templates_path;  // defaults to <kb>/templates
  std::string config_path = "config/default.json";
  bool config_explicit = false;
};

nlohmann::json load_config(const CommonOpts& opts) {
  std::ifstream in(opts.config_path);
  if (!in) {
    if (opts.config_explicit)
      throw SchemaError("cannot open config " + opts.config_path);
    return nlohmann::json::object();
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("config parse error in " + opts.config_path + ": " + e.what());
  }
  return j;
}

ThresholdTable thresholds_from_config(const nlohmann::json& config) {
  ThresholdTable table;
  if (!config.contains("difficulty_thresholds"))
    throw MissingFeature(
        "config lacks difficulty_thresholds; pass --config or run "
        "calibrate-thresholds");
  for (auto it = config.at("difficulty_thresholds").begin();
       it != config.at("difficulty_thresholds").end(); ++it) {
    const auto& pair = it.value();
    table[it.key()] = {pair.at(0).get<double>(), pair.at(1).get<double>()};
  }
  return table;
}

EndpointConfig endpoint_from_config(const nlohmann::json& config) {
  EndpointConfig ep;
  if (!config.contains("endpoint")) return ep;
  const auto& j = config.at("endpoint");
  ep.url = j.value("url", ep.url);
  ep.model = j.value("model", ep.model);
  ep.temperature = j.value("temperature", ep.temperature);
  ep.api_key_env = j.value("api_key_env", ep.api_key_env);
  ep.max_retries = j.value("max_retries", ep.max_retries);
  ep.backoff_ms = j.value("backoff_ms", ep.backoff_ms);
  ep.max_in_flight = j.value("max_in_flight", ep.max_in_flight);
  ep.timeout_seconds = j.value("timeout_seconds", ep.timeout_seconds);
  return ep;
}

std::filesystem::path templates_dir(const CommonOpts& opts) {
  if (!opts.templates_path.empty()) return opts.templates_path;
  return std::filesystem::path(opts.kb_path) / "templates";
}

int cmd_validate(const CommonOpts& opts) {
  KnowledgeBase kb = load_kb(opts.kb_path);
  ValidationReport report = validate(kb);
  if (report.ok()) {
    std::cout << "kb ok: " << kb.scenarios.size() << " scenarios, "
              << kb.entities.size() << " entities, " << kb.relations.size()
              << " relations, " << kb.rules.size() << " rules\n";
    return 0;
  }
  for (const auto& f : report.findings)
    std::cout << "finding: " << f.code << ": " << f.subject << ": " << f.message
              << "\n";
  std::cout << report.findings.size() << " finding(s)\n";
  return 1;
}

struct GenerateOpts {
  std::string scenario;  // empty = round-robin over all
  int count = 10;
  std::string qtype = "mixed";
  std::string hops = "2..11";
  std::string locale = "both";
  uint64_t seed = 0;
  std::string out = "dataset.jsonl";
  int jobs = 0;
  bool no_prune = false;
};

std::pair<int, int> parse_hops(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) {
    int h = std::stoi(text);
    return {h, h};
  }
  return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

int cmd_generate(const CommonOpts& common, const GenerateOpts& opts) {
  KnowledgeBase kb = load_kb(common.kb_path);
  ValidationReport vr = validate(kb);
  if (!vr.ok())
    throw SchemaError("KB has " + std::to_string(vr.findings.size()) +
                      " validation finding(s); run validate-kb");
  nlohmann::json config = load_config(common);

  // Config file settings take precedence over flags where both appear.
  GenConfig cfg;
  cfg.seed = opts.seed;
  cfg.thresholds = thresholds_from_config(config);
  cfg.prune = config.contains("prune") ? config.at("prune").get<bool>()
                                       : !opts.no_prune;
  cfg.retry_budget = config.value("retry_budget", 50);
  auto [hmin, hmax] = parse_hops(opts.hops);
  if (config.contains("hop_range")) {
    hmin = config.at("hop_range").at(0).get<int>();
    hmax = config.at("hop_range").at(1).get<int>();
  }
  cfg.hop_min = hmin;
  cfg.hop_max = hmax;
  cfg.jobs = config.contains("jobs") ? config.at("jobs").get<int>() : opts.jobs;
  if (cfg.jobs <= 0) cfg.jobs = std::max(1u, std::thread::hardware_concurrency());

  std::string locale_choice = opts.locale;
  if (config.contains("locale")) locale_choice = config.at("locale").get<std::string>();
  std::vector<std::string> locales;
  if (locale_choice == "both")
    locales = kb.locales;
  else
    locales = {locale_choice};
  for (const auto& loc : locales)
    if (std::find(kb.locales.begin(), kb.locales.end(), loc) == kb.locales.end())
      throw UsageError("locale '" + loc + "' is not declared by the KB");

  std::vector<QuestionSpec> plan =
      build_plan(kb, opts.count, opts.scenario, opts.qtype, hmin, hmax);

  Generator gen(kb, cfg);
  auto corpus = gen.generate_corpus(plan);
  TemplateTable table = load_templates(templates_dir(common), kb.locales);
  std::vector<nlohmann::json> records;
  for (const auto& q : corpus)
    for (const auto& loc : locales)
      records.push_back(question_record(kb, table, q, loc, cfg.seed));
  size_t n = emit_dataset(records, opts.out);
  std::cout << "wrote " << n << " records to " << opts.out << "\n";
  return 0;
}

Query query_from_json(const nlohmann::json& j) {
  Query q;
  q.fact = Fact::from_json(j.at("fact"));
  std::string mask = j.value("mask", "subject");
  if (mask == "subject") q.mask = Query::Mask::Subject;
  else if (mask == "object") q.mask = Query::Mask::Object;
  else if (mask == "slot") q.mask = Query::Mask::Slot;
  else q.mask = Query::Mask::Value;
  return q;
}

int cmd_solve(const CommonOpts& common, const std::string& dataset_path,
              bool trace, int only_index) {
  KnowledgeBase kb = load_kb(common.kb_path);
  auto rows = load_jsonl(dataset_path);
  int idx = -1;
  for (const auto& row : rows) {
    ++idx;
    if (only_index >= 0 && idx != only_index) continue;
    const auto& puzzle = row.at("puzzle");
    const Scenario& scenario = kb.scenario_or_throw(row.at("scenario"));
    AssignmentSpace space;
    space.kb = &kb;
    space.scenario = &scenario;
    for (const auto& eid : puzzle.at("entities"))
      space.candidates.push_back(&kb.entity_or_throw(eid.get<std::string>()));
    for (const auto& fj : puzzle.at("statements"))
      space.statements.push_back(Fact::from_json(fj));

    auto models = consistent_assignments(space);
    std::cout << row.at("id").get<std::string>() << ": " << models.size()
              << " consistent assignment(s); verdict "
              << (models.size() == 1 ? "unique" : "not unique") << "\n";
    for (const auto& m : models) {
      std::cout << " ";
      for (const auto& slot : scenario.slots)
        std::cout << " " << slot.id << "=" << m.at(slot.id);
      std::cout << "\n";
    }
    if (trace) {
      Geometry geom = Geometry::build(scenario);
      std::vector<const Entity*> roster = space.candidates;
      ChainContext ctx{&kb, &scenario, &geom, &roster};
      std::map<std::string, std::string> assignment;
      for (auto it = puzzle.at("assignment").begin();
           it != puzzle.at("assignment").end(); ++it)
        assignment[it.key()] = it.value().get<std::string>();
      auto rules = expand_scenario_rules(kb, scenario, geom);
      auto inst = expand_instance_rules(kb, scenario, geom, roster);
      rules.insert(rules.end(), inst.begin(), inst.end());
      FactBase fb = init_facts(ctx, assignment);
      chain_to_fixpoint(fb, rules, ctx);
      for (size_t i = 0; i < fb.size(); ++i) {
        const Fact& f = fb.fact(i);
        nlohmann::json line = f.to_json();
        line["depth"] = f.depth;
        line["id"] = i;
        if (f.derivation) {
          line["rule"] = f.derivation->rule;
          line["premises"] = f.derivation->premises;
        }
        std::cout << line.dump() << "\n";
      }
    }
  }
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& dataset_path,
             const std::string& mode, const std::string& cassette_path,
             const std::string& out_path, EndpointConfig ep) {
  auto dataset = load_jsonl(dataset_path);
  Cassette cassette = Cassette::load(cassette_path);
  std::unique_ptr<Endpoint> endpoint;
  EvalMode m;
  if (mode == "live") {
    m = EvalMode::Live;
    endpoint = make_http_endpoint(ep);
    cassette.open_for_append(cassette_path);
  } else if (mode == "replay") {
    m = EvalMode::Replay;
  } else {
    throw UsageError("mode must be live or replay");
  }
  auto records = run_eval(dataset, endpoint.get(), m, cassette, ep);
  std::string text;
  for (const auto& r : records) text += r.to_json().dump() + "\n";
  write_text_atomic(out_path, text);
  std::cout << "wrote " << records.size() << " eval records to " << out_path << "\n";
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& dataset_path,
               const std::string& by, const std::string& format,
               const std::string& out_path) {
  auto dataset = load_jsonl(dataset_path);
  std::vector<EvalRecord> records;
  for (const auto& row : load_jsonl(records_path))
    records.push_back(EvalRecord::from_json(row));
  Report report = score(records, dataset);

  std::vector<std::string> dims;
  std::string cur;
  for (char c : by + ",") {
    if (c == ',') {
      if (!cur.empty()) dims.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  std::string text = format == "csv" ? report_to_csv(report, dims)
                                     : report_to_json(report).dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else {
    write_text_atomic(out_path, text);
    std::cout << "wrote report to " << out_path << "\n";
  }
  return 0;
}

int cmd_calibrate(const CommonOpts& common, int count, uint64_t seed,
                  const std::string& out_path) {
  KnowledgeBase kb = load_kb(common.kb_path);
  GenConfig cfg;
  cfg.seed = seed;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  // Calibration only reads scores; buckets are irrelevant here.
  for (const auto& d : {"space", "time", "social", "nature", "mix"})
    cfg.thresholds[d] = {0.0, 0.0};
  Generator gen(kb, cfg);

  auto plan = build_plan(kb, count, "", "mixed", cfg.hop_min, cfg.hop_max);
  auto corpus = gen.generate_corpus(plan);

  std::map<std::string, std::vector<double>> scores;
  for (const auto& q : corpus) scores[q.domain].push_back(q.score);

  // Cut each domain at the 1/6 and 3/6 quantiles for a 1:2:3 split.
  nlohmann::json thresholds;
  for (auto& [domain, list] : scores) {
    std::sort(list.begin(), list.end());
    auto at = [&](double frac) {
      size_t i = static_cast<size_t>(frac * list.size());
      if (i >= list.size()) i = list.size() - 1;
      return list[i];
    };
    thresholds[domain] = {at(1.0 / 6.0), at(0.5)};
    std::cout << domain << ": n=" << list.size() << " easy<=" << at(1.0 / 6.0)
              << " medium<=" << at(0.5) << "\n";
  }
  nlohmann::json config;
  {
    std::ifstream in(common.config_path);
    if (in) in >> config;
  }
  config["difficulty_thresholds"] = thresholds;
  write_text_atomic(out_path, config.dump(2) + "\n");
  std::cout << "wrote thresholds to " << out_path << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"score-forge: compiles a declarative commonsense knowledge base "
               "into verified multi-hop reasoning questions"};
  app.set_version_flag("--version",
                       std::string("score-forge ") + kScoreForgeVersion +
                           " (kb schema v" + std::to_string(kKbSchemaVersion) + ")");
  app.require_subcommand(1);

  CommonOpts common;
  app.add_option("--kb", common.kb_path, "KB directory or document");
  app.add_option("--templates", common.templates_path,
                 "template directory (default: <kb>/templates)");
  auto* config_opt =
      app.add_option("--config", common.config_path, "config file (JSON)");

  auto* validate_cmd = app.add_subcommand("validate-kb", "check a knowledge base");
  std::string validate_path;
  validate_cmd->add_option("path", validate_path, "KB directory or document");

  auto* gen_cmd = app.add_subcommand("generate", "generate a question corpus");
  GenerateOpts gen_opts;
  gen_cmd->add_option("--scenario", gen_opts.scenario, "scenario id (default all)");
  gen_cmd->add_option("--count", gen_opts.count, "number of questions");
  gen_cmd->add_option("--qtype", gen_opts.qtype,
                      "precise|vague|correct_statement|incorrect_statement|mixed");
  gen_cmd->add_option("--hops", gen_opts.hops, "range min..max, or a single target");
  gen_cmd->add_option("--locale", gen_opts.locale, "en|zh|both");
  gen_cmd->add_option("--seed", gen_opts.seed, "master seed");
  gen_cmd->add_option("--out", gen_opts.out, "output JSONL path");
  gen_cmd->add_option("--jobs", gen_opts.jobs, "worker threads (0 = auto)");
  gen_cmd->add_flag("--no-prune", gen_opts.no_prune,
                    "keep redundant statements (skip minimality pruning)");

  auto* solve_cmd = app.add_subcommand("solve", "re-verify dataset records");
  std::string solve_path;
  bool solve_trace = false;
  int solve_index = -1;
  solve_cmd->add_option("records", solve_path, "dataset JSONL path")->required();
  solve_cmd->add_flag("--trace", solve_trace, "dump the closed fact base");
  solve_cmd->add_option("--index", solve_index, "only this record index");

  auto* eval_cmd = app.add_subcommand("eval", "query a model over a dataset");
  std::string eval_dataset, eval_mode = "replay", eval_cassette = "cassette.jsonl";
  std::string eval_out = "eval_records.jsonl", eval_endpoint, eval_model;
  double eval_temperature = -1;
  int eval_inflight = 0;
  eval_cmd->add_option("--dataset", eval_dataset)->required();
  eval_cmd->add_option("--endpoint", eval_endpoint, "completion endpoint url");
  eval_cmd->add_option("--model", eval_model);
  eval_cmd->add_option("--mode", eval_mode, "live|replay");
  eval_cmd->add_option("--cassette", eval_cassette);
  eval_cmd->add_option("--out", eval_out);
  eval_cmd->add_option("--temperature", eval_temperature);
  eval_cmd->add_option("--max-in-flight", eval_inflight);

  auto* report_cmd = app.add_subcommand("report", "aggregate eval records");
  std::string rep_records, rep_dataset, rep_by = "domain,locale,level,scenario,qtype,hops";
  std::string rep_format = "csv", rep_out;
  report_cmd->add_option("--records", rep_records)->required();
  report_cmd->add_option("--dataset", rep_dataset)->required();
  report_cmd->add_option("--by", rep_by);
  report_cmd->add_option("--format", rep_format, "csv|json");
  report_cmd->add_option("--out", rep_out);

  auto* cal_cmd = app.add_subcommand(
      "calibrate-thresholds", "fit difficulty thresholds on a pilot corpus");
  int cal_count = 10000;
  uint64_t cal_seed = 0;
  std::string cal_out = "config/default.json";
  cal_cmd->add_option("--count", cal_count);
  cal_cmd->add_option("--seed", cal_seed);
  cal_cmd->add_option("--out", cal_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  common.config_explicit = config_opt->count() > 0;

  try {
    if (*validate_cmd) {
      if (!validate_path.empty()) common.kb_path = validate_path;
      return cmd_validate(common);
    }
    if (*gen_cmd) return cmd_generate(common, gen_opts);
    if (*solve_cmd) return cmd_solve(common, solve_path, solve_trace, solve_index);
    if (*eval_cmd) {
      nlohmann::json config = load_config(common);
      EndpointConfig ep = endpoint_from_config(config);
      if (!eval_endpoint.empty()) ep.url = eval_endpoint;
      if (!eval_model.empty()) ep.model = eval_model;
      if (eval_temperature >= 0) ep.temperature = eval_temperature;
      if (eval_inflight > 0) ep.max_in_flight = eval_inflight;
      return cmd_eval(common, eval_dataset, eval_mode, eval_cassette, eval_out, ep);
    }
    if (*report_cmd)
      return cmd_report(rep_records, rep_dataset, rep_by, rep_format, rep_out);
    if (*cal_cmd) return cmd_calibrate(common, cal_count, cal_seed, cal_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace scoreforge
