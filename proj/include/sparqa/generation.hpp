#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sparqa/prompting.hpp"

namespace sparqa {

struct LlmConfig {
  std::string endpoint_url;          // completion server, e.g. http://host:8000/generate
  std::string model_name = "vicuna-13b";
  double temperature = 0.0;
  int max_tokens = 512;
  std::chrono::milliseconds timeout{120000};
  int max_retries = 2;
  std::chrono::milliseconds backoff_initial{500};  // doubles after each retry
  std::string api_key;                             // bearer token, optional
};

struct RawCompletion {
  std::string text;
  std::chrono::milliseconds latency{0};
  std::string backend_id;
};

enum class GenerationErrorKind {
  kTimeout,           // transport timed out on every attempt
  kTransport,         // connection failures on every attempt
  kStatus,            // non-success protocol status
  kEmptyCompletion,
  kUnusable,          // backend cannot answer this prompt (replay miss, no examples)
  kUnparseable,       // completion holds no SPARQL query
};

std::string_view ToString(GenerationErrorKind kind);

class GenerationError : public std::runtime_error {
 public:
  GenerationError(GenerationErrorKind kind, const std::string& what, int attempts = 1,
                  std::string raw_text = {})
      : std::runtime_error(what), kind_(kind), attempts_(attempts), raw_text_(std::move(raw_text)) {}

  GenerationErrorKind kind() const { return kind_; }
  int attempts() const { return attempts_; }
  // The completion that could not be parsed (kUnparseable only).
  const std::string& raw_text() const { return raw_text_; }

 private:
  GenerationErrorKind kind_;
  int attempts_;
  std::string raw_text_;
};

// Failure of a single backend call. `transient` failures are retried.
class BackendFailure : public std::runtime_error {
 public:
  BackendFailure(GenerationErrorKind kind, bool transient, const std::string& what)
      : std::runtime_error(what), kind_(kind), transient_(transient) {}
  GenerationErrorKind kind() const { return kind_; }
  bool transient() const { return transient_; }

 private:
  GenerationErrorKind kind_;
  bool transient_;
};

// A completion service. Complete() makes exactly one attempt and throws
// BackendFailure on error. Implementations are shareable across threads.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string Complete(const FewShotPrompt& prompt, const LlmConfig& config) const = 0;
};

// Field names for a prompt -> text JSON completion protocol.
struct CompletionProtocol {
  std::string model_field = "model";
  std::string prompt_field = "prompt";
  std::string temperature_field = "temperature";
  std::string max_tokens_field = "max_tokens";
  std::string response_pointer = "/text";  // JSON pointer to the completion text

  // OpenAI-style /v1/completions: response at /choices/0/text.
  static CompletionProtocol OpenAiCompletions();
  // Reads overrides from a JSON object with the member names above.
  static CompletionProtocol FromJson(std::string_view json_text);
};

// POSTs {model, prompt, temperature, max_tokens} to config.endpoint_url.
// 5xx/429 and transport errors are transient; other non-2xx statuses are
// not.
class HttpLlmBackend final : public LlmBackend {
 public:
  explicit HttpLlmBackend(CompletionProtocol protocol = {});
  std::string id() const override { return "http"; }
  std::string Complete(const FewShotPrompt& prompt, const LlmConfig& config) const override;

 private:
  CompletionProtocol protocol_;
};

// Deterministic stand-in for the model: answers with the SPARQL of the
// prompt's first (most similar) example block.
class EchoNearestBackend final : public LlmBackend {
 public:
  std::string id() const override { return "echo-nearest"; }
  std::string Complete(const FewShotPrompt& prompt, const LlmConfig& config) const override;
};

// Completions keyed by the SHA-256 of the prompt text. Files look like
//   {"version": 1, "completions": [{"prompt_sha256": "...", "completion": "..."}]}
class ReplayBackend final : public LlmBackend {
 public:
  ReplayBackend() = default;
  static ReplayBackend Load(const std::filesystem::path& path);

  void Add(std::string_view prompt_text, std::string completion);
  std::size_t size() const { return by_hash_.size(); }

  std::string id() const override { return "replay"; }
  // A prompt with no stored completion is a non-transient kUnusable failure.
  std::string Complete(const FewShotPrompt& prompt, const LlmConfig& config) const override;

 private:
  std::map<std::string, std::string> by_hash_;
};

// Forwards to another backend and remembers every successful completion
// so a run can be saved as a replay file.
class RecordingBackend final : public LlmBackend {
 public:
  explicit RecordingBackend(std::shared_ptr<const LlmBackend> inner);
  std::string id() const override { return "record:" + inner_->id(); }
  std::string Complete(const FewShotPrompt& prompt, const LlmConfig& config) const override;
  void Save(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<const LlmBackend> inner_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::string> by_hash_;
};

// Sends the prompt, retrying transient failures up to config.max_retries
// times with exponential backoff (backoff_initial, 2x, 4x, ...). Throws
// GenerationError after the last attempt, on a non-transient failure, or
// when the completion is blank.
RawCompletion Generate(const LlmConfig& config, const FewShotPrompt& prompt,
                       const LlmBackend& backend);

enum class ExtractionMethod { kVerbatim, kFenceStripped, kKeywordAnchored };

std::string_view ToString(ExtractionMethod method);

struct ExtractedQuery {
  std::string sparql;
  ExtractionMethod method;
  RawCompletion raw;
};

// Pulls one query out of a completion. Code fences and a leading "Sparql:"
// label are stripped (kFenceStripped). If surrounding prose remains, the
// query is anchored at the first SPARQL lead keyword (PREFIX, BASE, SELECT,
// ASK, CONSTRUCT, DESCRIBE) and runs through the last '}' that closes the
// outermost group plus any trailing GROUP BY / ORDER BY / HAVING / LIMIT /
// OFFSET modifiers (kKeywordAnchored). Idempotent on its own output.
// Throws GenerationError(kUnparseable) carrying the raw text.
ExtractedQuery ExtractSparql(const RawCompletion& raw);

}  // namespace sparqa
