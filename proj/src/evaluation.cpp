#include "sparqa/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace sparqa {

double HarmonicMean(double p, double r) {
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

namespace {

// System rows expressed in the gold column order.
std::set<Row> AlignRows(const AnswerSet& gold, const AnswerSet& system) {
  const auto& gv = gold.vars();
  const auto& sv = system.vars();
  const bool same_names =
      !gv.empty() && gv.size() == sv.size() &&
      std::is_permutation(gv.begin(), gv.end(), sv.begin());
  if (!same_names || gv == sv) return system.rows();

  std::vector<std::size_t> column(gv.size());
  for (std::size_t g = 0; g < gv.size(); ++g) {
    column[g] = static_cast<std::size_t>(std::find(sv.begin(), sv.end(), gv[g]) - sv.begin());
  }
  std::set<Row> out;
  for (const Row& row : system.rows()) {
    Row aligned(gv.size());
    for (std::size_t g = 0; g < gv.size(); ++g) aligned[g] = row[column[g]];
    out.insert(std::move(aligned));
  }
  return out;
}

}  // namespace

QuestionScore ScoreQuestion(std::string_view question_id, const AnswerSet& gold,
                            const SystemOutcome& system) {
  QuestionScore s;
  s.question_id = std::string(question_id);
  s.gold_null = gold.empty();

  static const AnswerSet kEmpty = AnswerSet::Bindings({});
  const AnswerSet* answer = &kEmpty;
  if (const auto* failure = std::get_if<SystemFailure>(&system)) {
    s.system_null = true;
    s.syntax_rejected = failure->syntax_rejected;
  } else {
    answer = &std::get<AnswerSet>(system);
    s.system_null = answer->empty();
  }

  auto set_all = [&s](double v) { s.precision = s.recall = s.f1 = v; };

  if (gold.kind() == AnswerKind::kBoolean || answer->kind() == AnswerKind::kBoolean) {
    if (gold.kind() != answer->kind()) {
      s.kind_mismatch = true;
      set_all(0);
    } else {
      set_all(gold.truth() == answer->truth() ? 1 : 0);
    }
    return s;
  }

  if (s.gold_null || s.system_null) {
    set_all(s.gold_null && s.system_null ? 1 : 0);
    return s;
  }

  const std::set<Row> system_rows = AlignRows(gold, *answer);
  std::size_t overlap = 0;
  for (const Row& row : system_rows) overlap += gold.rows().count(row);
  s.precision = static_cast<double>(overlap) / static_cast<double>(system_rows.size());
  s.recall = static_cast<double>(overlap) / static_cast<double>(gold.rows().size());
  s.f1 = HarmonicMean(s.precision, s.recall);
  return s;
}

MacroMetrics ComputeMacro(const std::vector<QuestionScore>& scores) {
  if (scores.empty()) throw EvaluationError("no scored questions to average");
  MacroMetrics m;
  m.count = scores.size();
  for (const QuestionScore& s : scores) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(scores.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

NullReport NullAccounting(const std::vector<QuestionScore>& scores) {
  NullReport r;
  for (const QuestionScore& s : scores) {
    r.null_gold += s.gold_null;
    r.null_system += s.system_null;
    r.null_both += s.gold_null && s.system_null;
    r.null_system_syntax += s.system_null && s.syntax_rejected;
  }
  return r;
}

std::string_view ToString(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kCorrect: return "correct";
    case ErrorCategory::kSyntactic: return "syntactic";
    case ErrorCategory::kKeywordMismatch: return "keyword_mismatch";
    case ErrorCategory::kMisunderstandingOrOther: return "misunderstanding_or_other";
  }
  return "misunderstanding_or_other";
}

namespace {

// Literal tokens of `sparql`, or nullopt if it does not tokenize.
std::optional<std::multiset<std::string>> Literals(std::string_view sparql) {
  try {
    std::multiset<std::string> out;
    for (const Token& t : Tokenize(sparql)) {
      if (t.kind == TokenKind::kLiteral) out.insert(t.text);
    }
    return out;
  } catch (const TokenizeError&) {
    return std::nullopt;
  }
}

// Trims and collapses whitespace between the quotes of a literal token;
// the quotes and any @lang suffix are kept.
std::string FoldWhitespace(const std::string& literal) {
  const char q = literal.front();
  const std::size_t qlen = literal.rfind(std::string(3, q), 0) == 0 && literal.size() >= 6 ? 3 : 1;
  const std::size_t close = literal.rfind(q);
  if (close == std::string::npos || close + 1 < qlen * 2) return literal;
  const std::size_t body_end = close + 1 - qlen;
  if (body_end < qlen) return literal;
  std::string body;
  bool space = false;
  for (std::size_t i = qlen; i < body_end; ++i) {
    const char c = literal[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !body.empty();
      continue;
    }
    if (space) body += ' ';
    space = false;
    body += c;
  }
  return literal.substr(0, qlen) + body + literal.substr(body_end);
}

}  // namespace

bool LiteralsDifferOnlyInWhitespace(std::string_view gold_sparql,
                                    std::string_view system_sparql) {
  const auto gold = Literals(gold_sparql);
  const auto system = Literals(system_sparql);
  if (!gold || !system || *gold == *system) return false;
  std::multiset<std::string> gold_folded, system_folded;
  for (const auto& l : *gold) gold_folded.insert(FoldWhitespace(l));
  for (const auto& l : *system) system_folded.insert(FoldWhitespace(l));
  return gold_folded == system_folded;
}

ErrorCategory Categorize(const QAPair& question, std::string_view system_sparql,
                         const ValidationReport& validation, const QuestionScore& score) {
  if (score.f1 == 1.0) return ErrorCategory::kCorrect;
  if (score.syntax_rejected || !validation.ok()) return ErrorCategory::kSyntactic;
  if (LiteralsDifferOnlyInWhitespace(question.sparql, system_sparql)) {
    return ErrorCategory::kKeywordMismatch;
  }
  return ErrorCategory::kMisunderstandingOrOther;
}

}  // namespace sparqa
