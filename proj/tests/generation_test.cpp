#include "sparqa/generation.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "json.hpp"
#include "sparqa/text.hpp"

namespace sparqa {
namespace {

using namespace std::chrono_literals;
using testing::FixtureLlm;

FewShotPrompt SamplePrompt() {
  const std::vector<ExampleBlock> blocks{
      {"a", "Which model is best on Yelp?", "SELECT ?m WHERE { ?m a orkgc:Model }"},
      {"b", "List the metrics.", "SELECT ?x WHERE { ?x a orkgc:Metric }"}};
  return BuildPrompt(blocks, "Which model is best on Atari?");
}

LlmConfig FastConfig(const std::string& url) {
  LlmConfig c;
  c.endpoint_url = url;
  c.timeout = 2000ms;
  c.backoff_initial = 1ms;
  return c;
}

RawCompletion Raw(std::string text) { return RawCompletion{std::move(text), 0ms, "test"}; }

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(EchoNearest, AnswersWithFirstExample) {
  EchoNearestBackend echo;
  const RawCompletion r = Generate(LlmConfig{}, SamplePrompt(), echo);
  EXPECT_EQ(r.text, "SELECT ?m WHERE { ?m a orkgc:Model }");
  EXPECT_EQ(r.backend_id, "echo-nearest");
}

TEST(EchoNearest, NoExampleIsUnusable) {
  FewShotPrompt p;
  p.text = "Question: q\nSparql:\n";
  EchoNearestBackend echo;
  try {
    Generate(LlmConfig{}, p, echo);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationErrorKind::kUnusable);
    EXPECT_EQ(e.attempts(), 1);
  }
}

TEST(HttpBackend, SendsRequestAndReadsText) {
  FixtureLlm llm([](const std::string& prompt) {
    return prompt.find("Atari") != std::string::npos ? "SELECT ?x WHERE { ?x ?p ?o }" : "nope";
  });
  LlmConfig c = FastConfig(llm.url());
  c.api_key = "secret";
  HttpLlmBackend http;
  const RawCompletion r = Generate(c, SamplePrompt(), http);
  EXPECT_EQ(r.text, "SELECT ?x WHERE { ?x ?p ?o }");
  EXPECT_EQ(llm.hits(), 1u);
  const auto body = nlohmann::json::parse(llm.last_body());
  EXPECT_EQ(body.at("model"), "vicuna-13b");
  EXPECT_EQ(body.at("temperature"), 0.0);
  EXPECT_EQ(body.at("max_tokens"), 512);
  EXPECT_EQ(body.at("prompt"), SamplePrompt().text);
}

TEST(HttpBackend, RetriesTransientStatusExactlyMaxRetriesTimes) {
  FixtureLlm llm([](const std::string&) { return "ASK { ?s ?p ?o }"; });
  llm.FailNext(500, 1000);
  LlmConfig c = FastConfig(llm.url());
  c.max_retries = 2;
  HttpLlmBackend http;
  try {
    Generate(c, SamplePrompt(), http);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationErrorKind::kStatus);
    EXPECT_EQ(e.attempts(), 3);
  }
  EXPECT_EQ(llm.hits(), 3u);
}

TEST(HttpBackend, RecoversAfterTransientFailures) {
  FixtureLlm llm([](const std::string&) { return "ASK { ?s ?p ?o }"; });
  llm.FailNext(503, 2);
  LlmConfig c = FastConfig(llm.url());
  HttpLlmBackend http;
  EXPECT_EQ(Generate(c, SamplePrompt(), http).text, "ASK { ?s ?p ?o }");
  EXPECT_EQ(llm.hits(), 3u);
}

TEST(HttpBackend, ClientErrorIsNotRetried) {
  FixtureLlm llm([](const std::string&) { return "ASK {}"; });
  llm.FailNext(404, 10);
  HttpLlmBackend http;
  EXPECT_THROW(Generate(FastConfig(llm.url()), SamplePrompt(), http), GenerationError);
  EXPECT_EQ(llm.hits(), 1u);
}

TEST(HttpBackend, EmptyCompletion) {
  FixtureLlm llm([](const std::string&) { return "  \n "; });
  HttpLlmBackend http;
  try {
    Generate(FastConfig(llm.url()), SamplePrompt(), http);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationErrorKind::kEmptyCompletion);
  }
}

TEST(HttpBackend, Timeout) {
  FixtureLlm llm([](const std::string&) { return "ASK {}"; });
  llm.SetDelay(1500ms);
  LlmConfig c = FastConfig(llm.url());
  c.timeout = 200ms;
  c.max_retries = 0;
  HttpLlmBackend http;
  try {
    Generate(c, SamplePrompt(), http);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationErrorKind::kTimeout);
  }
}

TEST(HttpBackend, UnreachableServer) {
  LlmConfig c = FastConfig(testing::UnreachableUrl("/generate"));
  c.max_retries = 1;
  HttpLlmBackend http;
  try {
    Generate(c, SamplePrompt(), http);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationErrorKind::kTransport);
    EXPECT_EQ(e.attempts(), 2);
  }
  c.endpoint_url = "not a url";
  EXPECT_THROW(Generate(c, SamplePrompt(), http), GenerationError);
}

TEST(HttpBackend, OpenAiAndCustomProtocols) {
  testing::LocalServer server;
  std::string seen;
  server.server().Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = req.body;
    res.set_content(R"({"choices":[{"text":"ASK { ?a ?b ?c }"}]})", "application/json");
  });
  server.server().Post("/custom", [&](const httplib::Request& req, httplib::Response& res) {
    seen = req.body;
    res.set_content(R"({"out":{"completion":"ASK { ?z ?y ?x }"}})", "application/json");
  });
  server.Start();

  HttpLlmBackend openai(CompletionProtocol::OpenAiCompletions());
  EXPECT_EQ(Generate(FastConfig(server.Url("/v1/completions")), SamplePrompt(), openai).text,
            "ASK { ?a ?b ?c }");

  HttpLlmBackend custom(CompletionProtocol::FromJson(
      R"({"prompt_field":"input","response_pointer":"/out/completion"})"));
  EXPECT_EQ(Generate(FastConfig(server.Url("/custom")), SamplePrompt(), custom).text,
            "ASK { ?z ?y ?x }");
  EXPECT_TRUE(nlohmann::json::parse(seen).contains("input"));
}

TEST(Replay, RecordThenReplayGivesSameCompletion) {
  FixtureLlm llm([](const std::string& prompt) { return "SELECT ?q WHERE { ?q ?p \"" +
                                                        std::to_string(prompt.size()) + "\" }"; });
  auto inner = std::make_shared<HttpLlmBackend>();
  RecordingBackend recorder(inner);
  const FewShotPrompt p = SamplePrompt();
  const std::string live = Generate(FastConfig(llm.url()), p, recorder).text;
  const auto dir = testing::MakeTempDir("replay");
  recorder.Save(dir / "r.json");

  const ReplayBackend replay = ReplayBackend::Load(dir / "r.json");
  EXPECT_EQ(replay.size(), 1u);
  EXPECT_EQ(Generate(LlmConfig{}, p, replay).text, live);

  FewShotPrompt other = p;
  other.text += " ";
  try {
    Generate(LlmConfig{}, other, replay);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationErrorKind::kUnusable);
  }
}

TEST(Replay, FileFormat) {
  ReplayBackend r;
  r.Add("abc", "ASK {}");
  const auto dir = testing::MakeTempDir("replayfmt");
  testing::WriteFile(dir / "r.json",
                     R"({"version":1,"completions":[{"prompt_sha256":")" + Sha256Hex("abc") +
                         R"(","completion":"ASK {}"}]})");
  FewShotPrompt p;
  p.text = "abc";
  EXPECT_EQ(ReplayBackend::Load(dir / "r.json").Complete(p, {}), r.Complete(p, {}));
  testing::WriteFile(dir / "bad.json", R"({"version":2,"completions":[]})");
  EXPECT_ANY_THROW(ReplayBackend::Load(dir / "bad.json"));
}

TEST(Extract, VerbatimQuery) {
  const auto e = ExtractSparql(Raw("  SELECT ?x WHERE { ?x a ?y }\n"));
  EXPECT_EQ(e.sparql, "SELECT ?x WHERE { ?x a ?y }");
  EXPECT_EQ(e.method, ExtractionMethod::kVerbatim);
}

TEST(Extract, FencedWithTrailingProse) {
  const auto e = ExtractSparql(Raw(
      "```sparql\nSELECT ?x WHERE {\n  ?x a ?y .\n}\n```\nHope this helps"));
  EXPECT_EQ(e.sparql, "SELECT ?x WHERE {\n  ?x a ?y .\n}");
  EXPECT_EQ(e.method, ExtractionMethod::kFenceStripped);
}

TEST(Extract, SparqlLabel) {
  const auto e = ExtractSparql(Raw("Sparql: ASK { ?s ?p ?o }"));
  EXPECT_EQ(e.sparql, "ASK { ?s ?p ?o }");
  EXPECT_EQ(e.method, ExtractionMethod::kFenceStripped);
}

TEST(Extract, KeywordAnchoredInProse) {
  const auto e = ExtractSparql(Raw(
      "Here is the query you asked for: SELECT ?m WHERE { ?m a ?t . { ?t ?p \"}\" } } "
      "ORDER BY DESC(?m) LIMIT 1 and that is all."));
  EXPECT_EQ(e.sparql,
            "SELECT ?m WHERE { ?m a ?t . { ?t ?p \"}\" } } ORDER BY DESC(?m) LIMIT 1");
  EXPECT_EQ(e.method, ExtractionMethod::kKeywordAnchored);
}

TEST(Extract, PrefixLeadsTheQuery) {
  const auto e = ExtractSparql(Raw(
      "Answer:\nPREFIX orkgp: <http://orkg.org/orkg/predicate/>\nSELECT ?x WHERE { ?x orkgp:P1 ?y }"));
  EXPECT_EQ(e.sparql,
            "PREFIX orkgp: <http://orkg.org/orkg/predicate/>\nSELECT ?x WHERE { ?x orkgp:P1 ?y }");
}

TEST(Extract, RefusalIsUnparseable) {
  const std::string text =
      "I cannot generate a query because the examples do not cover this relation.";
  try {
    ExtractSparql(Raw(text));
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationErrorKind::kUnparseable);
    EXPECT_EQ(e.raw_text(), text);
  }
  EXPECT_THROW(ExtractSparql(Raw("   ")), GenerationError);
}

TEST(Extract, IdempotentOnItsOutput) {
  for (const char* text :
       {"SELECT ?x WHERE { ?x a ?y }", "```\nASK { ?s ?p ?o }\n```",
        "Sure! SELECT ?a WHERE { ?a ?b ?c } GROUP BY ?a HAVING(COUNT(?b) > 1) thanks",
        "sparql: select distinct ?x where { ?x ?y \"SELECT\" } limit 5"}) {
    const auto once = ExtractSparql(Raw(text));
    const auto twice = ExtractSparql(Raw(once.sparql));
    EXPECT_EQ(twice.sparql, once.sparql) << text;
    EXPECT_EQ(twice.method, ExtractionMethod::kVerbatim) << text;
  }
}

TEST(Names, StableStrings) {
  EXPECT_EQ(ToString(GenerationErrorKind::kUnparseable), "unparseable_completion");
  EXPECT_EQ(ToString(GenerationErrorKind::kTimeout), "timeout");
  EXPECT_EQ(ToString(ExtractionMethod::kKeywordAnchored), "keyword_anchored");
}

}  // namespace
}  // namespace sparqa
