#include "sparqa/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sciqa_fixture.hpp"
#include "sparqa/pipeline.hpp"
#include "sparqa/report.hpp"

namespace sparqa {
namespace {

using namespace std::chrono_literals;
using testing::FixtureEndpoint;
using testing::ReadFile;
using testing::WriteFile;
namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Sparqa(std::vector<std::string> args, const std::map<std::string, std::string>& env = {}) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err, env);
  return {code, out.str(), err.str()};
}

// Dataset files and an endpoint for the memorization fixture.
struct Workspace {
  explicit Workspace(const char* tag, bool perturb = false)
      : dir(testing::MakeTempDir(tag)), fixture(testing::MakeMemorizationFixture(perturb)) {
    SaveSplit(Corpus(Split::kTrain, fixture.train), dir / "train.json");
    SaveSplit(Corpus(Split::kTest, fixture.test), dir / "test.json");
    for (const auto& [q, payload] : fixture.endpoint) endpoint.Add(q, payload);
  }

  std::vector<std::string> Common() const {
    return {"--train", (dir / "train.json").string(), "--test", (dir / "test.json").string(),
            "--index", (dir / "train.idx").string(), "--endpoint", endpoint.url(),
            "--backend", "echo-nearest"};
  }
  std::vector<std::string> With(std::vector<std::string> tail) const {
    auto a = Common();
    a.insert(a.end(), tail.begin(), tail.end());
    return a;
  }
  void Index() const {
    const Result r = Sparqa(With({"index"}));
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir;
  testing::MemorizationFixture fixture;
  FixtureEndpoint endpoint;
};

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(Sparqa({"--help"}).code, 0);
  EXPECT_NE(Sparqa({}).code, 0);
  EXPECT_EQ(Sparqa({"frobnicate"}).code, 1);
  EXPECT_EQ(Sparqa({"ask"}).code, 1);
  EXPECT_EQ(Sparqa({"batch", "--split", "dev"}).code, 1);  // --out missing
}

TEST(Cli, IndexIsDeterministic) {
  Workspace ws("cli-index");
  const Result r = Sparqa(ws.With({"index"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "indexed 300 questions with hash-trigram-512-v1 -> " +
                       (ws.dir / "train.idx").string() + "\n");
  const Result again = Sparqa(ws.With({"--concurrency", "1", "index", "--out",
                                     (ws.dir / "again.idx").string()}));
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(ReadFile(ws.dir / "train.idx"), ReadFile(ws.dir / "again.idx"));
}

TEST(Cli, AskWithoutIndexExplainsWhatToRun) {
  Workspace ws("cli-noindex");
  const Result r = Sparqa(ws.With({"ask", "What?"}));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("sparqa index"), std::string::npos) << r.err;
}

TEST(Cli, AskDryRunDoesNotTouchEndpoint) {
  Workspace ws("cli-dry");
  ws.Index();
  const Result r = Sparqa(ws.With({"ask", "--dry-run", ws.fixture.test[0].question}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ws.endpoint.hits(), 0u);
  EXPECT_NE(r.out.find("== Examples\n1. "), std::string::npos);
  EXPECT_NE(r.out.find("  1.0000\n"), std::string::npos);
  EXPECT_NE(r.out.find("== Prompt\nTask: "), std::string::npos);
  EXPECT_NE(r.out.find("== SPARQL (verbatim)\n"), std::string::npos);
  EXPECT_NE(r.out.find("== Validation\nok\n"), std::string::npos);
  EXPECT_NE(r.out.find("(dry run: not executed)"), std::string::npos);
}

TEST(Cli, AskPrintsGoldRows) {
  Workspace ws("cli-ask");
  ws.Index();
  const QAPair& q = ws.fixture.test[4];
  const Result r = Sparqa(ws.With({"ask", q.question}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ws.endpoint.hits(), 1u);
  const AnswerSet& gold = *q.gold_answers;
  for (const Row& row : gold.rows()) {
    for (const Slot& s : row) EXPECT_NE(r.out.find(*s), std::string::npos) << *s;
  }
  const std::size_t n = gold.rows().size();
  EXPECT_NE(r.out.find("(" + std::to_string(n) + (n == 1 ? " row)" : " rows)")), std::string::npos)
      << r.out;
}

TEST(Cli, AskWithUnreachableModelFails) {
  Workspace ws("cli-unreach");
  ws.Index();
  const Result r = Sparqa(ws.With({"--backend", "http", "--llm-url", testing::UnreachableUrl("/g"),
                                "--llm-retries", "0", "ask", "Which model is best?"}));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("generation failed (transport)"), std::string::npos) << r.err;
  EXPECT_EQ(ws.endpoint.hits(), 0u);
}

TEST(Cli, BatchOf200IsResumableByteForByte) {
  Workspace ws("cli-batch");
  ws.Index();
  // 200 dev questions drawn from the training questions
  std::vector<QAPair> dev;
  for (std::size_t i = 0; i < 200; ++i) {
    QAPair p = ws.fixture.train[i];
    p.id = "dev-" + std::to_string(1000 + i);
    dev.push_back(p);
  }
  SaveSplit(Corpus(Split::kDev, dev), ws.dir / "dev.json");
  const std::string out = (ws.dir / "dev.jsonl").string();
  const Result r = Sparqa(ws.With({"--dev", (ws.dir / "dev.json").string(), "batch", "--split", "dev",
                                "--out", out}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "dev 3-shot: 200 questions, 0 kept, 200 run, 0 failed -> " + out + "\n");
  EXPECT_EQ(LoadResults(out).size(), 200u);
  const std::string full = ReadFile(out);

  WriteFile(out, full.substr(0, full.size() / 3));
  const Result resumed = Sparqa(ws.With({"--dev", (ws.dir / "dev.json").string(), "batch", "--split",
                                      "dev", "--out", out, "--resume"}));
  ASSERT_EQ(resumed.code, 0) << resumed.err;
  EXPECT_EQ(ReadFile(out), full);
}

TEST(Cli, ShotSweepWritesOneFilePerCount) {
  Workspace ws("cli-sweep");
  ws.Index();
  const fs::path out = ws.dir / "results.jsonl";
  const Result r = Sparqa(ws.With({"--shots", "1,3,5", "batch", "--split", "test", "--out", out.string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  for (std::size_t n : {1u, 3u, 5u}) {
    const fs::path p = ShotSuffixed(out, n);
    ASSERT_TRUE(fs::exists(p)) << p;
    const auto recs = LoadResults(p);
    ASSERT_EQ(recs.size(), 100u);
    EXPECT_EQ(recs[0].shot_count, n);
    EXPECT_EQ(recs[0].example_ids.size(), n);
  }
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(ShotSuffixed("a/b/results.jsonl", 3), fs::path("a/b/results-3shot.jsonl"));
}

TEST(Cli, EvaluateMemorizationAndPerturbed) {
  for (bool perturb : {false, true}) {
    Workspace ws(perturb ? "cli-eval-p" : "cli-eval", perturb);
    ws.Index();
    const std::string out = (ws.dir / "test.jsonl").string();
    ASSERT_EQ(Sparqa(ws.With({"batch", "--split", "test", "--out", out})).code, 0);
    const std::string report = (ws.dir / "report.json").string();
    const Result r = Sparqa({"evaluate", "--gold", (ws.dir / "test.json").string(), "--system", out,
                          "--split", "test", "--out", report});
    ASSERT_EQ(r.code, 0) << r.err;
    const EvalReport rep = ReportFromJson(nlohmann::json::parse(ReadFile(report)));
    EXPECT_EQ(rep.macro.count, 100u);
    if (!perturb) {
      EXPECT_EQ(rep.macro.f1, 1.0);
      EXPECT_NE(r.out.find("test   3-shot  100        1.000      1.000   1.000"), std::string::npos)
          << r.out;
    } else {
      EXPECT_NEAR(rep.macro.f1, 0.9, 1e-3);
      EXPECT_EQ(rep.CountCategory(ErrorCategory::kCorrect), 90u);
    }
  }
}

TEST(Cli, EvaluateExecuteMode) {
  Workspace ws("cli-exec");
  ws.Index();
  const std::string out = (ws.dir / "test.jsonl").string();
  ASSERT_EQ(Sparqa(ws.With({"batch", "--split", "test", "--out", out})).code, 0);
  const Result r = Sparqa({"--endpoint", ws.endpoint.url(), "evaluate", "--gold",
                        (ws.dir / "test.json").string(), "--system", out, "--split", "test",
                        "--gold-source", "execute"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("1.000      1.000   1.000"), std::string::npos) << r.out;
  EXPECT_EQ(Sparqa({"evaluate", "--gold", (ws.dir / "test.json").string(), "--system", out,
                 "--gold-source", "oracle"}).code,
            1);
  EXPECT_EQ(Sparqa({"evaluate", "--gold", (ws.dir / "test.json").string(), "--system",
                 (ws.dir / "nope.jsonl").string()}).code,
            1);
}

TEST(Cli, BatchWithFailuresExitsTwo) {
  Workspace ws("cli-fail");
  ws.Index();
  const Result r = Sparqa(ws.With({"--backend", "replay", "--replay",
                                (ws.dir / "empty.json").string(), "batch", "--split", "test",
                                "--out", (ws.dir / "r.jsonl").string()}));
  EXPECT_EQ(r.code, 1);  // replay file missing is a configuration error
  WriteFile(ws.dir / "empty.json", R"({"version":1,"completions":[]})");
  const Result f = Sparqa(ws.With({"--backend", "replay", "--replay", (ws.dir / "empty.json").string(),
                                "batch", "--split", "test", "--out", (ws.dir / "r.jsonl").string()}));
  EXPECT_EQ(f.code, 2);
  EXPECT_NE(f.out.find("100 failed"), std::string::npos) << f.out;
}

TEST(Cli, RecordThenReplayMatches) {
  Workspace ws("cli-replay");
  ws.Index();
  const std::string rec = (ws.dir / "rec.json").string();
  ASSERT_EQ(Sparqa(ws.With({"--record", rec, "batch", "--split", "test", "--out",
                         (ws.dir / "a.jsonl").string()})).code,
            0);
  ASSERT_EQ(Sparqa(ws.With({"--backend", "replay", "--replay", rec, "batch", "--split", "test",
                         "--out", (ws.dir / "b.jsonl").string()})).code,
            0);
  EXPECT_EQ(ReadFile(ws.dir / "a.jsonl"), ReadFile(ws.dir / "b.jsonl"));
}

TEST(Config, FileEnvFlagPrecedence) {
  Workspace ws("cli-config");
  ws.Index();
  const std::string dead = testing::UnreachableUrl("/sparql");
  WriteFile(ws.dir / "sparqa.json",
            nlohmann::json{{"version", 1},
                           {"paths", {{"train", "train.json"}, {"index", "train.idx"}}},
                           {"llm", {{"backend", "echo-nearest"}}},
                           {"endpoint", {{"url", dead}, {"max_retries", 0}}}}
                .dump());
  const std::string cfg = (ws.dir / "sparqa.json").string();
  const std::string q = ws.fixture.test[0].question;

  // config alone: dead endpoint
  Result r = Sparqa({"--config", cfg, "ask", q});
  EXPECT_EQ(r.code, 2) << r.err;
  // env overrides config
  const std::map<std::string, std::string> env{{"SPARQA_ENDPOINT_URL", ws.endpoint.url()}};
  r = Sparqa({"--config", cfg, "ask", q}, env);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ws.endpoint.hits(), 1u);
  // flag overrides env
  r = Sparqa({"--config", cfg, "--endpoint", dead, "ask", q}, env);
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(ws.endpoint.hits(), 1u);
}

TEST(Config, ApplyJsonRules) {
  RunConfig c;
  ApplyConfigJson(nlohmann::json::parse(R"({"version":1,"paths":{"train":"d/t.json"},
      "shot_count":5,"top_n":7,"llm":{"temperature":0.2,"timeout_ms":900}})"),
                  "/base", c);
  EXPECT_EQ(*c.train, fs::path("/base/d/t.json"));
  EXPECT_EQ(c.shot_count, 5u);
  EXPECT_EQ(c.top_n, 7u);
  EXPECT_DOUBLE_EQ(c.llm.temperature, 0.2);
  EXPECT_EQ(c.llm.timeout, 900ms);
  EXPECT_THROW(ApplyConfigJson(nlohmann::json::parse(R"({"version":1,"shots":3})"), "/", c),
               ConfigError);
  EXPECT_THROW(ApplyConfigJson(nlohmann::json::parse(R"({"version":2})"), "/", c), ConfigError);
  EXPECT_THROW(ApplyConfigJson(nlohmann::json::parse(R"({"version":1,"llm":{"tempo":1}})"), "/", c),
               ConfigError);

  ApplyEnvironment({{"SPARQA_LLM_URL", "http://x/g"}, {"SPARQA_LLM_API_KEY", "k"},
                    {"UNRELATED", "y"}},
                   c);
  EXPECT_EQ(c.llm.endpoint_url, "http://x/g");
  EXPECT_EQ(c.llm.api_key, "k");
}

TEST(Lint, ReportsAndExitCodes) {
  const fs::path dir = testing::MakeTempDir("cli-lint");
  WriteFile(dir / "good.rq", "SELECT ?x\nWHERE {\n  ?x a orkgc:Dataset.\n}\n");
  WriteFile(dir / "bad.rq", "SELECT ?x WHERE { ?x a ?y ;}");
  Result r = Sparqa({"lint", (dir / "good.rq").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, (dir / "good.rq").string() + ": ok\n1 checked, 0 with errors\n");

  r = Sparqa({"lint", (dir / "good.rq").string(), (dir / "bad.rq").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("error DANGLING_SEMICOLON"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("2 checked, 1 with errors"), std::string::npos);

  r = Sparqa({"lint", "--query", "SELECT ?x WHERE { ?x foo:bar ?y }"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("UNDECLARED_PREFIX"), std::string::npos);

  r = Sparqa({"lint", "--dataset", testing::TestData("validator_gold.json").string()});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("50 checked, 0 with errors"), std::string::npos);

  EXPECT_EQ(Sparqa({"lint"}).code, 1);
}

TEST(Report, PrintsTablesForSeveralRuns) {
  Workspace ws("cli-report");
  ws.Index();
  const std::string out = (ws.dir / "r.jsonl").string();
  ASSERT_EQ(Sparqa(ws.With({"--shots", "1,3", "batch", "--split", "test", "--out", out})).code, 0);
  std::vector<std::string> reports;
  for (std::size_t n : {1u, 3u}) {
    const std::string rep = (ws.dir / ("rep" + std::to_string(n) + ".json")).string();
    ASSERT_EQ(Sparqa({"evaluate", "--gold", (ws.dir / "test.json").string(), "--system",
                   ShotSuffixed(out, n).string(), "--split", "test", "--out", rep}).code,
              0);
    reports.push_back(rep);
  }
  const Result r = Sparqa({"report", reports[0], reports[1]});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("1-shot"), std::string::npos);
  EXPECT_NE(r.out.find("3-shot"), std::string::npos);
  EXPECT_NE(r.out.find("Error categories"), std::string::npos);
  WriteFile(ws.dir / "junk.json", "{");
  EXPECT_EQ(Sparqa({"report", (ws.dir / "junk.json").string()}).code, 1);
}

}  // namespace
}  // namespace sparqa
