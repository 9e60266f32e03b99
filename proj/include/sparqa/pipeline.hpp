#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sparqa/answer_set.hpp"
#include "sparqa/corpus.hpp"
#include "sparqa/endpoint_client.hpp"
#include "sparqa/generation.hpp"
#include "sparqa/prompting.hpp"
#include "sparqa/retrieval.hpp"
#include "sparqa/sparql_tools.hpp"

namespace sparqa {

// A failed pipeline stage, as recorded in results files.
struct StageError {
  std::string stage;   // retrieval | prompting | generation | extraction | execution
  std::string kind;    // e.g. "timeout", "unparseable_completion", "SYNTAX_REJECTED"
  std::string reason;

  friend bool operator==(const StageError&, const StageError&) = default;
};

// Everything one question produced on its way through the pipeline.
struct QuestionRecord {
  std::string id;
  std::string question;
  std::size_t shot_count = 0;
  std::vector<std::string> example_ids;
  std::vector<double> example_scores;
  std::string prompt;
  std::string prompt_sha256;
  std::string completion;                  // raw model output
  std::optional<std::string> extraction_method;
  std::string sparql;                      // cleaned query that was (or would be) executed
  std::vector<std::string> prefixes_added;
  std::vector<std::string> unknown_prefixes;
  std::optional<ValidationReport> validation;
  bool executed = false;
  std::optional<AnswerSet> answer;
  std::optional<StageError> error;

  bool failed() const { return error.has_value(); }
};

nlohmann::ordered_json ToJson(const QuestionRecord& record);
// Throws std::invalid_argument on a malformed record.
QuestionRecord RecordFromJson(const nlohmann::json& j);

nlohmann::ordered_json ToJson(const ValidationReport& report);
ValidationReport ValidationFromJson(const nlohmann::json& j);

struct PipelineOptions {
  std::size_t shot_count = 3;  // examples placed in the prompt
  std::size_t top_n = 5;       // neighbors retrieved; shot_count <= top_n
  bool ensure_prefixes = false;
  bool dry_run = false;        // stop before the endpoint
  PrefixTable prefixes = PrefixTable::Default();
  CleanOptions clean;
};

// Retrieval -> prompt -> generation -> extraction -> cleaning -> lint ->
// execution for one question at a time. Holds references only; everything
// it points to must outlive it. Run() is safe to call concurrently.
class Pipeline {
 public:
  // Throws std::invalid_argument if the index does not belong to `train`,
  // or if shot_count/top_n are out of range.
  Pipeline(const Corpus& train, const EmbeddingIndex& index, const Embedder& embedder,
           const LlmBackend& backend, LlmConfig llm, EndpointConfig endpoint,
           const PromptTemplate& tmpl, PipelineOptions options);

  // Never throws for stage failures; they land in QuestionRecord::error.
  QuestionRecord Run(std::string_view id, std::string_view question) const;

  const PipelineOptions& options() const { return options_; }

 private:
  const Corpus& train_;
  const EmbeddingIndex& index_;
  const Embedder& embedder_;
  const LlmBackend& backend_;
  LlmConfig llm_;
  EndpointConfig endpoint_;
  const PromptTemplate& template_;
  PipelineOptions options_;
};

struct BatchOptions {
  std::size_t concurrency = 4;
  bool resume = false;  // keep records already in the output file
};

struct BatchSummary {
  std::size_t total = 0;
  std::size_t skipped = 0;  // already present (resume)
  std::size_t ran = 0;
  std::size_t failed = 0;   // records with a stage error, across the whole file
};

// Runs every question of `split` and writes one JSON record per line to
// `out`, sorted by id once the batch completes. Records are appended as
// they finish, so an interrupted run can be continued with resume=true.
BatchSummary RunBatch(const Pipeline& pipeline, const Corpus& split,
                      const std::filesystem::path& out, const BatchOptions& options,
                      const std::function<void(const QuestionRecord&)>& on_record = {});

// Reads a results file, tolerating a truncated final line.
std::vector<QuestionRecord> LoadResults(const std::filesystem::path& path);

}  // namespace sparqa
