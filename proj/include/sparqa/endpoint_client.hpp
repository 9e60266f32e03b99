#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sparqa/answer_set.hpp"
#include "sparqa/sparql_tools.hpp"

namespace sparqa {

// The ORKG SPARQL endpoint used for live runs.
inline constexpr std::string_view kDefaultEndpoint =
    "https://ltdemos.informatik.uni-hamburg.de/orkg/sparql";

struct EndpointConfig {
  std::string url = std::string(kDefaultEndpoint);
  std::chrono::milliseconds timeout{60000};
  int max_retries = 1;
  std::chrono::milliseconds backoff_initial{500};
  // Rows beyond this many are not read.
  std::optional<std::size_t> result_limit_guard;
  NormalizationMode normalization = NormalizationMode::kLenient;
};

// Every failed execution is exactly one of these.
enum class ExecErrorKind {
  kSyntaxRejected,    // the endpoint could not parse the query (HTTP 400)
  kTimeout,
  kTransport,         // connection failures and other unexpected statuses
  kMalformedResults,  // the response is not a usable results document
};

std::string_view ToString(ExecErrorKind kind);

class EndpointError : public std::runtime_error {
 public:
  EndpointError(ExecErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ExecErrorKind kind() const { return kind_; }

 private:
  ExecErrorKind kind_;
};

// Parses a SPARQL 1.1 JSON results document. SELECT yields a bindings
// answer (duplicate rows collapse, missing bindings become UNBOUND); ASK
// yields a boolean. CONSTRUCT and DESCRIBE return graphs, not answer sets,
// and are rejected. Throws EndpointError(kMalformedResults) naming where
// the payload is wrong.
AnswerSet ParseResults(std::string_view payload, QueryForm form,
                       NormalizationMode mode = NormalizationMode::kLenient,
                       std::optional<std::size_t> row_limit = std::nullopt);

// Runs `query` (expected to be Clean()ed) with a SPARQL protocol POST
// (form-encoded `query`, Accept: application/sparql-results+json).
// Timeouts, transport failures and 5xx responses are retried up to
// max_retries times. Throws EndpointError.
AnswerSet Execute(const EndpointConfig& config, std::string_view query);

}  // namespace sparqa
