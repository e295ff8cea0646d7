#include "scoreforge/evalharness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include "httplib.h"
#include "scoreforge/errors.hpp"
#include "scoreforge/extract.hpp"

namespace scoreforge {

namespace {

std::string keyset_to_string(const std::set<char>& keys) {
  std::string s;
  for (char c : keys) s += c;
  return s;
}

std::set<char> keyset_from_string(const std::string& s) {
  std::set<char> out;
  for (char c : s) out.insert(c);
  return out;
}

// FNV-1a, hex. Enough to notice a prompt drifting from its cassette.
std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

nlohmann::json EvalRecord::to_json() const {
  nlohmann::json j;
  j["question_id"] = question_id;
  j["model"] = model;
  j["raw_response"] = raw_response;
  if (extracted)
    j["extracted"] = keyset_to_string(*extracted);
  else
    j["extracted"] = nullptr;
  if (correct) j["correct"] = *correct;
  j["latency_ms"] = latency_ms;
  if (prompt_tokens) j["prompt_tokens"] = *prompt_tokens;
  if (completion_tokens) j["completion_tokens"] = *completion_tokens;
  return j;
}

EvalRecord EvalRecord::from_json(const nlohmann::json& j) {
  EvalRecord r;
  r.question_id = j.at("question_id").get<std::string>();
  r.model = j.value("model", "");
  r.raw_response = j.value("raw_response", "");
  if (j.contains("extracted") && !j.at("extracted").is_null())
    r.extracted = keyset_from_string(j.at("extracted").get<std::string>());
  if (j.contains("correct")) r.correct = j.at("correct").get<bool>();
  r.latency_ms = j.value("latency_ms", 0.0);
  if (j.contains("prompt_tokens")) r.prompt_tokens = j.at("prompt_tokens").get<int>();
  if (j.contains("completion_tokens"))
    r.completion_tokens = j.at("completion_tokens").get<int>();
  return r;
}

namespace {

class HttpEndpoint : public Endpoint {
public:
  explicit HttpEndpoint(EndpointConfig config) : cfg_(std::move(config)) {
    if (cfg_.url.empty())
      throw EndpointError("live mode needs an endpoint url");
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key)
      throw EndpointError("credentials missing: set " + cfg_.api_key_env);
    api_key_ = key;

    // Split scheme://host[:port]/path.
    std::string rest = cfg_.url;
    auto scheme_end = rest.find("://");
    if (scheme_end == std::string::npos)
      throw EndpointError("endpoint url needs a scheme: " + cfg_.url);
    scheme_host_ = rest.substr(0, scheme_end + 3);
    rest = rest.substr(scheme_end + 3);
    auto slash = rest.find('/');
    host_ = rest.substr(0, slash == std::string::npos ? rest.size() : slash);
    path_ = slash == std::string::npos ? "/" : rest.substr(slash);
    scheme_host_ += host_;
  }

  std::string complete(const std::string& prompt) override {
    nlohmann::json body{{"model", cfg_.model},
                        {"temperature", cfg_.temperature},
                        {"messages", {{{"role", "user"}, {"content", prompt}}}}};
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(cfg_.timeout_seconds, 0);
    client.set_read_timeout(cfg_.timeout_seconds, 0);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    for (const auto& [k, v] : cfg_.headers) headers.emplace(k, v);
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
      throw EndpointError("request failed: " + httplib::to_string(res.error()));
    if (res->status / 100 != 2)
      throw EndpointError("endpoint returned status " + std::to_string(res->status));
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw EndpointError(std::string("malformed endpoint reply: ") + e.what());
    }
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw EndpointError("endpoint reply carries no message content");
    }
  }

private:
  EndpointConfig cfg_;
  std::string api_key_;
  std::string scheme_host_;
  std::string host_;
  std::string path_;
};

}  // namespace

std::unique_ptr<Endpoint> make_http_endpoint(const EndpointConfig& config) {
  return std::make_unique<HttpEndpoint>(config);
}

Cassette Cassette::load(const std::filesystem::path& path) {
  Cassette c;
  std::ifstream in(path);
  if (!in) return c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Entry e;
    e.question_id = j.at("question_id").get<std::string>();
    e.model = j.value("model", "");
    e.response = j.value("response", "");
    e.latency_ms = j.value("latency_ms", 0.0);
    e.prompt_hash = j.value("prompt_hash", "");
    c.index_[e.question_id + "\x1f" + e.model] = c.entries_.size();
    c.entries_.push_back(std::move(e));
  }
  return c;
}

void Cassette::open_for_append(const std::filesystem::path& path) {
  append_path_ = path;
}

const Cassette::Entry* Cassette::find(const std::string& question_id,
                                      const std::string& model) const {
  auto it = index_.find(question_id + "\x1f" + model);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void Cassette::append(Entry entry) {
  std::lock_guard<std::mutex> lock(*mutex_);
  if (!append_path_.empty()) {
    std::ofstream out(append_path_, std::ios::app);
    if (!out) throw SinkError("cannot append to cassette " + append_path_.string());
    nlohmann::json j{{"question_id", entry.question_id},
                     {"model", entry.model},
                     {"response", entry.response},
                     {"latency_ms", entry.latency_ms},
                     {"prompt_hash", entry.prompt_hash}};
    out << j.dump() << "\n";
  }
  index_[entry.question_id + "\x1f" + entry.model] = entries_.size();
  entries_.push_back(std::move(entry));
}

std::vector<EvalRecord> run_eval(const std::vector<nlohmann::json>& dataset,
                                 Endpoint* endpoint, EvalMode mode,
                                 Cassette& cassette, const EndpointConfig& config) {
  std::vector<EvalRecord> records(dataset.size());

  auto process = [&](size_t i) {
    const auto& row = dataset[i];
    EvalRecord rec;
    rec.question_id = row.at("id").get<std::string>();
    rec.model = config.model;
    std::string prompt = row.value("prompt", "");

    if (mode == EvalMode::Replay) {
      const auto* entry = cassette.find(rec.question_id, config.model);
      if (!entry)
        throw CassetteMiss("no cassette entry for question '" + rec.question_id +
                           "' and model '" + config.model + "'");
      rec.raw_response = entry->response;
      rec.latency_ms = entry->latency_ms;
    } else {
      auto t0 = std::chrono::steady_clock::now();
      std::string response;
      bool got = false;
      for (int attempt = 0; attempt <= config.max_retries && !got; ++attempt) {
        try {
          response = endpoint->complete(prompt);
          got = true;
        } catch (const EndpointError&) {
          if (attempt == config.max_retries) break;
          std::this_thread::sleep_for(
              std::chrono::milliseconds(config.backoff_ms << attempt));
        }
      }
      rec.latency_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
      rec.raw_response = response;  // empty on persistent failure
      cassette.append({rec.question_id, config.model, rec.raw_response,
                       rec.latency_ms, fnv1a_hex(prompt)});
    }
    rec.extracted = extract_answer(rec.raw_response);
    // Keys outside the question's option set are dropped; an extraction is a
    // key set over the actual options.
    if (rec.extracted && row.contains("options")) {
      std::set<char> valid;
      for (const auto& opt : row.at("options"))
        valid.insert(opt.at("key").get<std::string>().at(0));
      std::set<char> clamped;
      for (char c : *rec.extracted)
        if (valid.count(c)) clamped.insert(c);
      rec.extracted = std::move(clamped);
    }
    records[i] = std::move(rec);
  };

  if (mode == EvalMode::Replay || config.max_in_flight <= 1) {
    for (size_t i = 0; i < dataset.size(); ++i) process(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(dataset.size());
    auto worker = [&]() {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= dataset.size()) return;
        try {
          process(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < config.max_in_flight; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return records;
}

Report score(const std::vector<EvalRecord>& records,
             const std::vector<nlohmann::json>& dataset) {
  std::map<std::string, const nlohmann::json*> by_id;
  for (const auto& row : dataset) by_id[row.at("id").get<std::string>()] = &row;

  Report report;
  for (const auto& rec : records) {
    auto it = by_id.find(rec.question_id);
    if (it == by_id.end())
      throw UnknownQuestion("record references unknown question '" +
                            rec.question_id + "'");
    const auto& row = *it->second;
    std::set<char> key;
    for (const auto& k : row.at("answer"))
      key.insert(k.get<std::string>().at(0));

    bool correct = rec.extracted && *rec.extracted == key;
    bool unextracted = !rec.extracted.has_value();

    auto tally = [&](const std::string& dim, const std::string& bucket) {
      auto& cell = report.tables[dim][bucket];
      cell.total++;
      if (correct) cell.correct++;
      if (unextracted) cell.unextracted++;
    };
    report.overall.total++;
    if (correct) report.overall.correct++;
    if (unextracted) report.overall.unextracted++;

    tally("domain", row.value("domain", "?"));
    tally("locale", row.value("locale", "?"));
    tally("scenario", row.value("scenario", "?"));
    if (row.contains("difficulty"))
      tally("level", row.at("difficulty").value("bucket", "?"));
    if (row.contains("labels")) {
      tally("qtype", row.at("labels").value("question_type", "?"));
      tally("hops", std::to_string(row.at("labels").value("chain_length", 0)));
    }
    tally("model", rec.model.empty() ? "?" : rec.model);
  }
  return report;
}

nlohmann::json report_to_json(const Report& report) {
  auto cell_json = [](const ReportCell& c) {
    return nlohmann::json{{"total", c.total},
                          {"correct", c.correct},
                          {"accuracy", c.accuracy()},
                          {"unextracted", c.unextracted},
                          {"unextracted_rate", c.unextracted_rate()}};
  };
  nlohmann::json j;
  j["overall"] = cell_json(report.overall);
  nlohmann::json tables;
  for (const auto& [dim, rows] : report.tables) {
    nlohmann::json t;
    for (const auto& [k, cell] : rows) t[k] = cell_json(cell);
    tables[dim] = std::move(t);
  }
  j["tables"] = std::move(tables);
  return j;
}

std::string report_to_csv(const Report& report,
                          const std::vector<std::string>& dimensions) {
  std::string out = "dimension,key,total,correct,accuracy,unextracted,unextracted_rate\n";
  char buf[160];
  auto row = [&](const std::string& dim, const std::string& key,
                 const ReportCell& c) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%lld,%lld,%.6f,%lld,%.6f\n",
                  dim.c_str(), key.c_str(), c.total, c.correct, c.accuracy(),
                  c.unextracted, c.unextracted_rate());
    out += buf;
  };
  row("overall", "all", report.overall);
  for (const auto& dim : dimensions) {
    auto it = report.tables.find(dim);
    if (it == report.tables.end()) continue;
    for (const auto& [k, cell] : it->second) row(dim, k, cell);
  }
  return out;
}

std::vector<nlohmann::json> load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::vector<nlohmann::json> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      rows.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("parse error in " + path.string() + ": " + e.what());
    }
  }
  return rows;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SinkError("cannot open " + tmp.string());
    out << text;
    if (!out) throw SinkError("write failed on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw SinkError("rename to " + path.string() + " failed: " + ec.message());
  }
}

}  // namespace scoreforge
