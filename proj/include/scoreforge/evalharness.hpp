#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace scoreforge {

struct EvalRecord {
  std::string question_id;
  std::string model;
  std::string raw_response;
  std::optional<std::set<char>> extracted;  // empty optional = extraction failure
  std::optional<bool> correct;              // only set when extraction succeeded
  double latency_ms = 0;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;

  nlohmann::json to_json() const;
  static EvalRecord from_json(const nlohmann::json& j);
};

// Single request/response text interface over a model endpoint.
class Endpoint {
public:
  virtual ~Endpoint() = default;
  // Throws EndpointError on transport or protocol failure.
  virtual std::string complete(const std::string& prompt) = 0;
};

struct EndpointConfig {
  std::string url;  // full completion endpoint, e.g. http://host/v1/chat/completions
  std::string model;
  double temperature = 0.7;
  std::string api_key_env = "SCORE_FORGE_API_KEY";
  std::map<std::string, std::string> headers;
  int max_retries = 3;
  int backoff_ms = 500;
  int max_in_flight = 4;
  int timeout_seconds = 120;
};

// Chat-completions style HTTP endpoint; reads the bearer token from the
// environment variable named in the config. Throws EndpointError at
// construction when live credentials are required but missing.
std::unique_ptr<Endpoint> make_http_endpoint(const EndpointConfig& config);

// Append-only response store keyed by (question id, model). Live runs append
// under a mutex; replay runs are fully offline.
class Cassette {
public:
  struct Entry {
    std::string question_id;
    std::string model;
    std::string response;
    double latency_ms = 0;
    std::string prompt_hash;
  };

  static Cassette load(const std::filesystem::path& path);  // missing file = empty
  void open_for_append(const std::filesystem::path& path);

  const Entry* find(const std::string& question_id, const std::string& model) const;
  void append(Entry entry);

private:
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
  std::filesystem::path append_path_;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

enum class EvalMode { Live, Replay };

// One record per dataset row, in dataset order. Live failures (after
// retries) become records with an extraction failure; the run continues.
std::vector<EvalRecord> run_eval(const std::vector<nlohmann::json>& dataset,
                                 Endpoint* endpoint, EvalMode mode,
                                 Cassette& cassette, const EndpointConfig& config);

struct ReportCell {
  long long correct = 0;
  long long total = 0;
  long long unextracted = 0;
  double accuracy() const { return total ? double(correct) / double(total) : 0.0; }
  double unextracted_rate() const {
    return total ? double(unextracted) / double(total) : 0.0;
  }
};

struct Report {
  ReportCell overall;
  // dimension ("domain", "locale", "level", "scenario", "qtype", "hops",
  // "model") -> key -> cell
  std::map<std::string, std::map<std::string, ReportCell>> tables;
};

// Exact-match scoring: correct iff the extracted set equals the answer key.
// Unextracted responses count as incorrect and are reported separately.
// Throws UnknownQuestion for records referencing unknown ids.
Report score(const std::vector<EvalRecord>& records,
             const std::vector<nlohmann::json>& dataset);

nlohmann::json report_to_json(const Report& report);
std::string report_to_csv(const Report& report,
                          const std::vector<std::string>& dimensions);

std::vector<nlohmann::json> load_jsonl(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace scoreforge
