#include "sparqa/endpoint_client.hpp"

#include <thread>

#include "http_util.hpp"
#include "json.hpp"

namespace sparqa {

using nlohmann::json;

std::string_view ToString(ExecErrorKind kind) {
  switch (kind) {
    case ExecErrorKind::kSyntaxRejected: return "SYNTAX_REJECTED";
    case ExecErrorKind::kTimeout: return "TIMEOUT";
    case ExecErrorKind::kTransport: return "TRANSPORT";
    case ExecErrorKind::kMalformedResults: return "MALFORMED_RESULTS";
  }
  return "TRANSPORT";
}

AnswerSet ParseResults(std::string_view payload, QueryForm form, NormalizationMode mode,
                       std::optional<std::size_t> row_limit) {
  auto malformed = [](const std::string& why) {
    return EndpointError(ExecErrorKind::kMalformedResults, "malformed results: " + why);
  };
  if (form == QueryForm::kConstruct || form == QueryForm::kDescribe) {
    throw malformed(std::string(ToString(form)) + " queries return graphs, not answer sets");
  }
  json doc;
  try {
    doc = json::parse(payload);
  } catch (const json::parse_error& e) {
    throw malformed(std::string("not JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw malformed("top level is not an object");

  if (form == QueryForm::kAsk) {
    auto it = doc.find("boolean");
    if (it == doc.end() || !it->is_boolean()) throw malformed("ASK result has no boolean member");
    return AnswerSet::Boolean(it->get<bool>());
  }

  if (doc.contains("boolean")) throw malformed("SELECT query got a boolean result");
  if (row_limit && doc.contains("results") && doc["results"].is_object()) {
    auto& bindings = doc["results"]["bindings"];
    if (bindings.is_array() && bindings.size() > *row_limit) {
      bindings.erase(bindings.begin() + static_cast<std::ptrdiff_t>(*row_limit), bindings.end());
    }
  }
  if (!doc.contains("head")) throw malformed("missing 'head'");
  try {
    return AnswerSetFromJson(doc, mode);
  } catch (const std::exception& e) {
    throw malformed(e.what());
  }
}

namespace {

AnswerSet ExecuteOnce(const EndpointConfig& config, const detail::UrlParts& url,
                      std::string_view query, QueryForm form) {
  auto client = detail::MakeClient(url, config.timeout);
  httplib::Headers headers{
      {"Accept", "application/sparql-results+json, application/json;q=0.9"}};
  httplib::Params params{{"query", std::string(query)}};
  auto res = client->Post(url.path, headers, params);
  if (!res) {
    const auto err = res.error();
    throw EndpointError(detail::IsTimeout(err) ? ExecErrorKind::kTimeout
                                               : ExecErrorKind::kTransport,
                        "endpoint " + config.url + ": " + httplib::to_string(err));
  }
  if (res->status == 400) {
    std::string detail = res->body.substr(0, 500);
    throw EndpointError(ExecErrorKind::kSyntaxRejected, "endpoint rejected the query: " + detail);
  }
  if (res->status < 200 || res->status >= 300) {
    throw EndpointError(ExecErrorKind::kTransport,
                        "endpoint returned HTTP " + std::to_string(res->status));
  }
  return ParseResults(res->body, form, config.normalization, config.result_limit_guard);
}

bool Retryable(const EndpointError& e) {
  return e.kind() == ExecErrorKind::kTimeout || e.kind() == ExecErrorKind::kTransport;
}

}  // namespace

AnswerSet Execute(const EndpointConfig& config, std::string_view query) {
  detail::UrlParts url;
  try {
    url = detail::SplitUrl(config.url);
  } catch (const std::invalid_argument& e) {
    throw EndpointError(ExecErrorKind::kTransport, e.what());
  }

  // The endpoint is the authority on syntax, so a query without a
  // recognizable form is still sent; its answer is then read as SELECT.
  QueryForm form = QueryForm::kSelect;
  try {
    form = GetQueryForm(query);
  } catch (const NoQueryFormError&) {
  }

  const int attempts = std::max(0, config.max_retries) + 1;
  auto delay = config.backoff_initial;
  for (int attempt = 1;; ++attempt) {
    try {
      return ExecuteOnce(config, url, query, form);
    } catch (const EndpointError& e) {
      if (!Retryable(e) || attempt >= attempts) throw;
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace sparqa
