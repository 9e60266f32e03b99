#include "sparqa/endpoint_client.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "json.hpp"
#include "sparqa/sparql_tools.hpp"

namespace sparqa {
namespace {

using namespace std::chrono_literals;
using testing::FixtureEndpoint;
using testing::ReadFile;
using testing::ResultsJson;

const char* kQuery = "SELECT ?dataset ?dataset_lbl WHERE { ?dataset rdfs:label ?dataset_lbl }";

EndpointConfig Config(const std::string& url) {
  EndpointConfig c;
  c.url = url;
  c.timeout = 2000ms;
  c.backoff_initial = 1ms;
  return c;
}

ExecErrorKind KindOf(const EndpointConfig& c, std::string_view query) {
  try {
    Execute(c, query);
  } catch (const EndpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no EndpointError";
  return ExecErrorKind::kTransport;
}

TEST(ParseResults, StoredResponseNormalizesToTwoRows) {
  const AnswerSet a =
      ParseResults(ReadFile(testing::TestData("endpoint_response.json")), QueryForm::kSelect);
  EXPECT_EQ(a.kind(), AnswerKind::kBindings);
  EXPECT_EQ(a.vars(), (std::vector<std::string>{"dataset", "dataset_lbl"}));
  const std::set<Row> want{
      {"http://orkg.org/orkg/resource/R124734", "Jacquard dataset@en"},
      {"http://orkg.org/orkg/resource/R124740", "7.5"}};
  EXPECT_EQ(a.rows(), want);
}

TEST(ParseResults, StrictModeKeepsLexicalForms) {
  const AnswerSet a = ParseResults(ReadFile(testing::TestData("endpoint_response.json")),
                                   QueryForm::kSelect, NormalizationMode::kStrict);
  EXPECT_EQ(a.rows().size(), 2u);
  EXPECT_TRUE(a.rows().count({"http://orkg.org/orkg/resource/R124740", "007.50"}));
}

TEST(ParseResults, AskBoolean) {
  EXPECT_EQ(ParseResults(R"({"head":{},"boolean":true})", QueryForm::kAsk), AnswerSet::Boolean(true));
  EXPECT_EQ(ParseResults(R"({"head":{},"boolean":false})", QueryForm::kAsk),
            AnswerSet::Boolean(false));
}

TEST(ParseResults, MissingBindingIsUnbound) {
  const std::string doc = ResultsJson({"a", "b"}, {{"x", std::nullopt}, {"y", "z"}});
  const AnswerSet s = ParseResults(doc, QueryForm::kSelect);
  EXPECT_TRUE(s.rows().count({"x", std::nullopt}));
  EXPECT_TRUE(s.rows().count({"y", "z"}));
}

TEST(ParseResults, RowOrderDoesNotMatter) {
  std::vector<std::vector<std::optional<std::string>>> rows;
  for (int i = 0; i < 30; ++i) rows.push_back({"v" + std::to_string(i), std::to_string(i % 7)});
  const AnswerSet base = ParseResults(ResultsJson({"a", "n"}, rows), QueryForm::kSelect);
  std::mt19937 rng(3);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(rows.begin(), rows.end(), rng);
    EXPECT_EQ(ParseResults(ResultsJson({"a", "n"}, rows), QueryForm::kSelect), base);
  }
}

TEST(ParseResults, RowLimitGuard) {
  std::vector<std::vector<std::optional<std::string>>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({std::to_string(i)});
  EXPECT_EQ(ParseResults(ResultsJson({"a"}, rows), QueryForm::kSelect, NormalizationMode::kLenient,
                         4).rows().size(),
            4u);
}

TEST(ParseResults, MalformedDocuments) {
  for (const char* bad :
       {"", "not json", "[]", R"({"head":{"vars":["a"]}})", R"({"head":{},"results":{}})",
        R"({"head":{"vars":["a"]},"results":{"bindings":[{"a":{"value":"x"}}]}})",
        R"({"head":{"vars":["a"]},"results":{"bindings":[{"a":{"type":"literal"}}]}})"}) {
    try {
      ParseResults(bad, QueryForm::kSelect);
      ADD_FAILURE() << bad;
    } catch (const EndpointError& e) {
      EXPECT_EQ(e.kind(), ExecErrorKind::kMalformedResults) << bad;
    }
  }
  EXPECT_THROW(ParseResults(R"({"head":{},"boolean":"yes"})", QueryForm::kAsk), EndpointError);
  EXPECT_THROW(ParseResults(ResultsJson({"a"}, {}), QueryForm::kAsk), EndpointError);
  EXPECT_THROW(ParseResults(ResultsJson({"s"}, {{"x"}}), QueryForm::kConstruct), EndpointError);
}

TEST(Execute, ReturnsCannedAnswer) {
  FixtureEndpoint ep;
  ep.Add(kQuery, ReadFile(testing::TestData("endpoint_response.json")));
  const AnswerSet a = Execute(Config(ep.url()), kQuery);
  EXPECT_EQ(a.rows().size(), 2u);
  EXPECT_EQ(ep.hits(), 1u);
  ASSERT_EQ(ep.received().size(), 1u);
  EXPECT_EQ(ep.received()[0], kQuery);
}

TEST(Execute, AskAndUnknownSelect) {
  FixtureEndpoint ep;
  ep.Add("ASK { ?s ?p ?o }", testing::BooleanJson(true));
  EXPECT_EQ(Execute(Config(ep.url()), "ASK { ?s ?p ?o }"), AnswerSet::Boolean(true));
  const AnswerSet none = Execute(Config(ep.url()), "SELECT ?x WHERE { ?x a orkgc:Nothing }");
  EXPECT_TRUE(none.empty());
  EXPECT_EQ(none.vars(), std::vector<std::string>{"x"});
}

TEST(Execute, BadRequestIsSyntaxRejectedAndNotRetried) {
  FixtureEndpoint ep;
  EndpointConfig c = Config(ep.url());
  c.max_retries = 3;
  EXPECT_EQ(KindOf(c, "SELECT ?x WHERE { ?x a ?y ;}"), ExecErrorKind::kSyntaxRejected);
  EXPECT_EQ(ep.hits(), 1u);
}

TEST(Execute, ServerErrorsRetriedThenSucceed) {
  FixtureEndpoint ep;
  ep.Add(kQuery, ResultsJson({"dataset", "dataset_lbl"}, {{"d", "l"}}));
  ep.FailNext(503, 1);
  EndpointConfig c = Config(ep.url());
  c.max_retries = 1;
  EXPECT_EQ(Execute(c, kQuery).rows().size(), 1u);
  EXPECT_EQ(ep.hits(), 2u);
}

TEST(Execute, ServerErrorsExhaustRetries) {
  FixtureEndpoint ep;
  ep.FailNext(500, 100);
  EndpointConfig c = Config(ep.url());
  c.max_retries = 2;
  EXPECT_EQ(KindOf(c, kQuery), ExecErrorKind::kTransport);
  EXPECT_EQ(ep.hits(), 3u);
}

TEST(Execute, Timeout) {
  FixtureEndpoint ep;
  ep.SetDelay(1500ms);
  EndpointConfig c = Config(ep.url());
  c.timeout = 200ms;
  c.max_retries = 0;
  EXPECT_EQ(KindOf(c, kQuery), ExecErrorKind::kTimeout);
}

TEST(Execute, TransportFailures) {
  EndpointConfig c = Config(testing::UnreachableUrl("/sparql"));
  c.max_retries = 0;
  EXPECT_EQ(KindOf(c, kQuery), ExecErrorKind::kTransport);
  c.url = "::nonsense";
  EXPECT_EQ(KindOf(c, kQuery), ExecErrorKind::kTransport);
}

TEST(Execute, MalformedPayload) {
  FixtureEndpoint ep;
  ep.Add(kQuery, "<html>oops</html>");
  EXPECT_EQ(KindOf(Config(ep.url()), kQuery), ExecErrorKind::kMalformedResults);
  EXPECT_EQ(ep.hits(), 1u);
}

TEST(ExecErrorKind, Names) {
  EXPECT_EQ(ToString(ExecErrorKind::kSyntaxRejected), "SYNTAX_REJECTED");
  EXPECT_EQ(ToString(ExecErrorKind::kTimeout), "TIMEOUT");
  EXPECT_EQ(ToString(ExecErrorKind::kTransport), "TRANSPORT");
  EXPECT_EQ(ToString(ExecErrorKind::kMalformedResults), "MALFORMED_RESULTS");
}

}  // namespace
}  // namespace sparqa
