#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "scoreforge/errors.hpp"
#include "scoreforge/evalharness.hpp"
#include "scoreforge/rng.hpp"

using namespace scoreforge;

namespace {

nlohmann::json question(const std::string& id, const std::string& answer,
                        const std::string& domain = "nature",
                        const std::string& bucket = "easy") {
  nlohmann::json q;
  q["id"] = id;
  q["prompt"] = "prompt for " + id;
  auto keys = nlohmann::json::array();
  for (char c : answer) keys.push_back(std::string(1, c));
  q["answer"] = keys;
  q["domain"] = domain;
  q["locale"] = "en";
  q["scenario"] = "enclosures_row";
  q["difficulty"] = {{"bucket", bucket}};
  q["labels"] = {{"question_type", "precise"}, {"chain_length", 2}};
  return q;
}

EvalRecord record(const std::string& id, const char* extracted) {
  EvalRecord r;
  r.question_id = id;
  r.model = "stub";
  if (extracted) {
    std::set<char> keys;
    for (const char* p = extracted; *p; ++p) keys.insert(*p);
    r.extracted = keys;
  }
  return r;
}

// Scripted endpoint. A response of "!" means fail this call.
class StubEndpoint : public Endpoint {
public:
  explicit StubEndpoint(std::vector<std::string> script)
      : script_(std::move(script)) {}
  std::string complete(const std::string&) override {
    if (calls_ >= script_.size()) throw EndpointError("script exhausted");
    std::string s = script_[calls_++];
    if (s == "!") throw EndpointError("injected fault");
    return s;
  }
  size_t calls() const { return calls_; }

private:
  std::vector<std::string> script_;
  size_t calls_ = 0;
};

}  // namespace

TEST_CASE("exact match scoring with no partial credit") {
  std::vector<nlohmann::json> dataset{question("q1", "AC"), question("q2", "AC"),
                                      question("q3", "B")};
  std::vector<EvalRecord> records{record("q1", "AC"), record("q2", "A"),
                                  record("q3", nullptr)};
  Report report = score(records, dataset);
  CHECK(report.overall.total == 3);
  CHECK(report.overall.correct == 1);
  CHECK(report.overall.unextracted == 1);
  CHECK(report.overall.unextracted_rate() == doctest::Approx(1.0 / 3));
}

TEST_CASE("scoring is order independent") {
  std::vector<nlohmann::json> dataset{question("q1", "A"), question("q2", "B"),
                                      question("q3", "C", "space", "hard")};
  std::vector<EvalRecord> records{record("q1", "A"), record("q2", "C"),
                                  record("q3", "C")};
  Report a = score(records, dataset);
  std::vector<EvalRecord> shuffled{records[2], records[0], records[1]};
  Report b = score(shuffled, dataset);
  CHECK(report_to_json(a) == report_to_json(b));
}

TEST_CASE("unknown question ids are rejected") {
  std::vector<nlohmann::json> dataset{question("q1", "A")};
  std::vector<EvalRecord> records{record("nope", "A")};
  CHECK_THROWS_AS(score(records, dataset), UnknownQuestion);
}

TEST_CASE("per-dimension tables accumulate") {
  std::vector<nlohmann::json> dataset{
      question("q1", "A", "nature", "easy"), question("q2", "B", "space", "hard"),
      question("q3", "C", "nature", "easy")};
  std::vector<EvalRecord> records{record("q1", "A"), record("q2", "B"),
                                  record("q3", "D")};
  Report report = score(records, dataset);
  CHECK(report.tables.at("domain").at("nature").total == 2);
  CHECK(report.tables.at("domain").at("nature").correct == 1);
  CHECK(report.tables.at("domain").at("space").correct == 1);
  CHECK(report.tables.at("level").at("easy").total == 2);
  CHECK(report.tables.at("hops").at("2").total == 3);
}

TEST_CASE("replay over a cassette is deterministic and offline") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "sf_eval_test";
  fs::create_directories(dir);
  fs::path cas_path = dir / "cassette.jsonl";
  {
    std::ofstream out(cas_path, std::ios::trunc);
    out << R"({"question_id":"q1","model":"m","response":"thinking... [A]","latency_ms":5.0})" << "\n";
    out << R"({"question_id":"q2","model":"m","response":"答案：【B、C】","latency_ms":6.0})" << "\n";
  }
  std::vector<nlohmann::json> dataset{question("q1", "A"), question("q2", "BC")};
  EndpointConfig cfg;
  cfg.model = "m";

  Cassette cassette = Cassette::load(cas_path);
  auto records = run_eval(dataset, nullptr, EvalMode::Replay, cassette, cfg);
  REQUIRE(records.size() == 2);
  CHECK(records[0].extracted.value() == std::set<char>{'A'});
  CHECK(records[1].extracted.value() == std::set<char>{'B', 'C'});

  Report r1 = score(records, dataset);
  Cassette cassette2 = Cassette::load(cas_path);
  auto records2 = run_eval(dataset, nullptr, EvalMode::Replay, cassette2, cfg);
  Report r2 = score(records2, dataset);
  CHECK(report_to_json(r1).dump() == report_to_json(r2).dump());
  CHECK(report_to_csv(r1, {"domain", "hops"}) == report_to_csv(r2, {"domain", "hops"}));
}

TEST_CASE("replay misses raise CassetteMiss") {
  std::vector<nlohmann::json> dataset{question("q9", "A")};
  Cassette cassette;
  EndpointConfig cfg;
  cfg.model = "m";
  CHECK_THROWS_AS(run_eval(dataset, nullptr, EvalMode::Replay, cassette, cfg),
                  CassetteMiss);
}

TEST_CASE("live faults are retried then recorded as extraction failure") {
  std::vector<nlohmann::json> dataset{question("q1", "A"), question("q2", "B")};
  // q1 times out three times (exhausting retries), q2 answers on the second try.
  StubEndpoint endpoint({"!", "!", "!", "!", "[B]"});
  Cassette cassette;
  EndpointConfig cfg;
  cfg.model = "m";
  cfg.max_retries = 3;
  cfg.backoff_ms = 1;
  cfg.max_in_flight = 1;
  auto records = run_eval(dataset, &endpoint, EvalMode::Live, cassette, cfg);
  REQUIRE(records.size() == 2);
  CHECK_FALSE(records[0].extracted.has_value());
  CHECK(records[1].extracted.value() == std::set<char>{'B'});

  // The failed call still produced a cassette entry, so replays stay total.
  CHECK(cassette.find("q1", "m") != nullptr);
  CHECK(cassette.find("q2", "m") != nullptr);

  Report report = score(records, dataset);
  CHECK(report.overall.correct == 1);
  CHECK(report.overall.unextracted == 1);
}

TEST_CASE("live mode without credentials fails before any request") {
  EndpointConfig cfg;
  cfg.url = "http://localhost:1/v1/chat/completions";
  cfg.api_key_env = "SCORE_FORGE_TEST_KEY_UNSET";
  CHECK_THROWS_AS(make_http_endpoint(cfg), EndpointError);
}
