#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sparqa/corpus.hpp"
#include "sparqa/endpoint_client.hpp"
#include "sparqa/evaluation.hpp"
#include "sparqa/pipeline.hpp"

namespace sparqa {

enum class GoldSource { kFile, kExecute };

std::string_view ToString(GoldSource source);
// Throws std::invalid_argument for anything but "file" or "execute".
GoldSource GoldSourceFromString(std::string_view name);

struct ScoredQuestion {
  QuestionScore score;
  ErrorCategory category = ErrorCategory::kCorrect;
};

struct GoldFailure {
  std::string question_id;
  std::string reason;
};

struct EvalReport {
  std::string split;
  std::optional<std::size_t> shot_count;  // unset when records disagree
  GoldSource gold_source = GoldSource::kFile;
  std::vector<ScoredQuestion> per_question;  // sorted by id
  MacroMetrics macro;
  NullReport nulls;
  // Questions left out of the averages.
  std::vector<std::string> unlabeled;          // no gold answers in the file
  std::vector<GoldFailure> gold_failures;      // gold query failed to execute
  std::vector<std::string> missing_system;     // scored, but had no record
  std::vector<std::string> extra_system;       // records for unknown ids, ignored

  std::size_t CountCategory(ErrorCategory category) const;
};

struct EvaluateOptions {
  GoldSource gold_source = GoldSource::kFile;
  EndpointConfig endpoint;  // used when gold_source is kExecute
  PrefixTable prefixes = PrefixTable::Default();
};

// Scores every question of `gold` against its record. A question without a
// record is scored as a system failure. Throws EvaluationError when no
// question can be scored.
EvalReport EvaluateRun(const Corpus& gold, const std::vector<QuestionRecord>& records,
                       const EvaluateOptions& options = {});

nlohmann::ordered_json ToJson(const EvalReport& report);
// Throws std::invalid_argument.
EvalReport ReportFromJson(const nlohmann::json& j);

// Plain-text tables: macro scores per run, then null answers per run, then
// error categories per run.
std::string RenderTables(const std::vector<EvalReport>& reports);

}  // namespace sparqa
