#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sparqa/answer_set.hpp"
#include "sparqa/corpus.hpp"
#include "sparqa/endpoint_client.hpp"
#include "sparqa/sparql_tools.hpp"

namespace sparqa {

// A system answer that could not be obtained. Execution failures count as
// empty answers for scoring.
struct SystemFailure {
  std::string stage;   // "generation", "execution", ...
  std::string reason;
  bool syntax_rejected = false;
};

using SystemOutcome = std::variant<AnswerSet, SystemFailure>;

struct QuestionScore {
  std::string question_id;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool gold_null = false;
  bool system_null = false;
  bool syntax_rejected = false;
  bool kind_mismatch = false;  // bindings scored against boolean or vice versa

  friend bool operator==(const QuestionScore&, const QuestionScore&) = default;
};

// Harmonic mean of p and r; 0 when both are 0.
double HarmonicMean(double p, double r);

// Answer-set precision/recall/F1 for one question.
//
// Rows are matched as tuples. When gold and system name the same set of
// variables, system columns are reordered to the gold header; otherwise
// columns are matched by position. Both answers empty scores 1/1/1;
// exactly one empty scores 0/0/0. Booleans score 1/1/1 on equal truth and
// 0/0/0 otherwise. A SystemFailure is scored as an empty answer.
QuestionScore ScoreQuestion(std::string_view question_id, const AnswerSet& gold,
                            const SystemOutcome& system);

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MacroMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t count = 0;
};

// Unweighted means over all scores, null answers included. Throws
// EvaluationError for an empty list.
MacroMetrics ComputeMacro(const std::vector<QuestionScore>& scores);

struct NullReport {
  std::size_t null_gold = 0;
  std::size_t null_system = 0;
  std::size_t null_both = 0;
  std::size_t null_system_syntax = 0;  // system nulls caused by a syntax error

  friend bool operator==(const NullReport&, const NullReport&) = default;
};

NullReport NullAccounting(const std::vector<QuestionScore>& scores);

enum class ErrorCategory { kCorrect, kSyntactic, kKeywordMismatch, kMisunderstandingOrOther };

std::string_view ToString(ErrorCategory category);

// Sorts a scored question into one bucket:
//   f1 == 1                                   -> correct
//   endpoint syntax rejection or hard lint    -> syntactic
//   string literals differ only in whitespace -> keyword_mismatch
//   anything else                             -> misunderstanding_or_other
ErrorCategory Categorize(const QAPair& question, std::string_view system_sparql,
                         const ValidationReport& validation, const QuestionScore& score);

// True when the multisets of string literals in the two queries differ,
// but agree once whitespace inside each literal is trimmed and collapsed.
bool LiteralsDifferOnlyInWhitespace(std::string_view gold_sparql,
                                    std::string_view system_sparql);

}  // namespace sparqa
