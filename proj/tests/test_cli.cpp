#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

const char* kBinary = SCOREFORGE_BINARY_DIR "/tools/score-forge";
const char* kSeedDir = SCOREFORGE_SOURCE_DIR "/seed";

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "sf_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string config_path() {
  static std::string path = [] {
    fs::path p = work_dir() / "config.json";
    std::ofstream out(p);
    out << R"({"difficulty_thresholds": {"space": [1.0, 2.0], "time": [1.5, 2.8],)"
        << R"( "social": [1.5, 2.2], "nature": [1.5, 2.5], "mix": [1.5, 3.0]}})";
    return p.string();
  }();
  return path;
}

int run(const std::string& args, std::string* output = nullptr) {
  fs::path out_file = work_dir() / "cmd_output.txt";
  std::string cmd = std::string(kBinary) + " " + args + " > " +
                    out_file.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validate-kb accepts the seed and rejects garbage") {
  std::string out;
  CHECK(run(std::string("validate-kb ") + kSeedDir, &out) == 0);
  CHECK(out.find("kb ok") != std::string::npos);

  fs::path broken = work_dir() / "broken";
  fs::create_directories(broken);
  std::ofstream(broken / "kb.json") << "{\"locales\": [\"en\"], \"scenarios\": ["
                                       "{\"id\": \"s\", \"domain\": \"space\","
                                       "\"slots\": [{\"id\": \"a\"}],"
                                       "\"relation_vocab\": [\"missing_rel\"]}]}";
  CHECK(run("validate-kb " + broken.string(), &out) == 1);
  CHECK(out.find("error: DanglingReference") != std::string::npos);
}

TEST_CASE("unknown subcommands exit 2") {
  std::string out;
  CHECK(run("frobnicate", &out) == 2);
}

TEST_CASE("generate is byte-stable and solve re-verifies it") {
  fs::path a = work_dir() / "a.jsonl";
  fs::path b = work_dir() / "b.jsonl";
  std::string base = std::string("--kb ") + kSeedDir + " --config " + config_path();
  std::string out;
  CHECK(run(base + " generate --count 8 --seed 99 --locale both --out " +
                a.string(),
            &out) == 0);
  CHECK(run(base + " generate --count 8 --seed 99 --locale both --out " +
                b.string(),
            &out) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).find("\"seed\":99") != std::string::npos);

  CHECK(run(base + " solve " + a.string(), &out) == 0);
  size_t unique_lines = 0, pos = 0;
  while ((pos = out.find("verdict unique", pos)) != std::string::npos) {
    unique_lines++;
    pos += 10;
  }
  CHECK(unique_lines == 16);  // 8 questions x 2 locales
}

TEST_CASE("eval replay plus report work end to end") {
  std::string base = std::string("--kb ") + kSeedDir + " --config " + config_path();
  std::string fixtures = std::string(SCOREFORGE_SOURCE_DIR "/tests/fixtures/eval");
  fs::path records = work_dir() / "records.jsonl";
  fs::path report = work_dir() / "report.csv";
  std::string out;
  CHECK(run(base + " eval --dataset " + fixtures + "/mini_dataset.jsonl" +
                " --mode replay --model fixture-model --cassette " + fixtures +
                "/cassette.jsonl --out " + records.string(),
            &out) == 0);
  CHECK(run(base + " report --records " + records.string() + " --dataset " +
                fixtures + "/mini_dataset.jsonl --format csv --out " +
                report.string(),
            &out) == 0);
  std::string csv = slurp(report);
  CHECK(csv.find("overall,all,6,4,") != std::string::npos);
  CHECK(csv.find("locale,en,3,") != std::string::npos);
}

TEST_CASE("eval live without credentials fails before any request") {
  std::string base = std::string("--kb ") + kSeedDir + " --config " + config_path();
  std::string fixtures = std::string(SCOREFORGE_SOURCE_DIR "/tests/fixtures/eval");
  std::string out;
  unsetenv("SCORE_FORGE_API_KEY");
  int code = run(base + " eval --dataset " + fixtures + "/mini_dataset.jsonl" +
                     " --mode live --model m --endpoint http://localhost:1/x" +
                     " --cassette " + (work_dir() / "cas.jsonl").string() +
                     " --out " + (work_dir() / "r.jsonl").string(),
                 &out);
  CHECK(code == 1);
  CHECK(out.find("error: EndpointError") != std::string::npos);
}

TEST_CASE("failed generation leaves no partial dataset behind") {
  std::string base = std::string("--kb ") + kSeedDir + " --config " + config_path();
  fs::path out_file = work_dir() / "nodir" / "x.jsonl";
  std::string out;
  int code = run(base + " generate --count 2 --seed 1 --out " + out_file.string(),
                 &out);
  CHECK(code == 1);
  CHECK_FALSE(fs::exists(out_file));
  CHECK_FALSE(fs::exists(out_file.string() + ".tmp"));
}
