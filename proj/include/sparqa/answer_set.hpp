#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sparqa {

// A result slot. std::nullopt is the UNBOUND marker for a variable that has
// no binding in a solution row.
using Slot = std::optional<std::string>;
using Row = std::vector<Slot>;

enum class AnswerKind { kBindings, kBoolean };

// Normalized outcome of a query execution.
//
// Bindings answers keep the variable header in result order and a set of
// rows (duplicates collapse on insert). Every slot is already normalized
// with NormalizeTerm, so two AnswerSets can be compared with operator==.
class AnswerSet {
 public:
  static AnswerSet Boolean(bool truth);
  static AnswerSet Bindings(std::vector<std::string> vars);

  // Throws std::invalid_argument if the row arity differs from vars().size().
  void AddRow(Row row);

  AnswerKind kind() const { return kind_; }
  bool truth() const { return truth_; }
  const std::vector<std::string>& vars() const { return vars_; }
  const std::set<Row>& rows() const { return rows_; }

  // A "null answer": bindings with no rows. Boolean answers are never null.
  bool empty() const { return kind_ == AnswerKind::kBindings && rows_.empty(); }

  friend bool operator==(const AnswerSet&, const AnswerSet&) = default;

 private:
  AnswerKind kind_ = AnswerKind::kBindings;
  bool truth_ = false;
  std::vector<std::string> vars_;
  std::set<Row> rows_;
};

// How RDF terms become comparable strings.
//  kLenient: IRIs by full IRI; literals by lexical form; language tags
//            lower-cased and kept as "@tag"; numeric literals (xsd numeric
//            datatypes, or untyped literals that read as a number) rewritten
//            to a canonical decimal form, so "5"^^xsd:integer == "5.0".
//  kStrict:  raw lexical value, nothing else.
enum class NormalizationMode { kLenient, kStrict };

struct Term {
  enum class Type { kIri, kLiteral, kBlank };
  Type type = Type::kLiteral;
  std::string value;
  std::string lang;
  std::string datatype;
};

std::string NormalizeTerm(const Term& term,
                          NormalizationMode mode = NormalizationMode::kLenient);

// Canonical decimal spelling of a numeric lexical form: no leading '+', no
// superfluous leading or trailing zeros, "-0" folded to "0". Returns nullopt
// if `lexical` is not a SPARQL integer/decimal/double literal.
std::optional<std::string> CanonicalNumber(std::string_view lexical);

// Compact on-disk form used by dataset and results files:
//   {"boolean": true}  or  {"vars": [...], "rows": [[...], ...]}
// with JSON null for UNBOUND. Rows are written in set order.
nlohmann::json ToJson(const AnswerSet& answers);

// Accepts the compact form above, a W3C SPARQL JSON results document
// (normalized with `mode`), or a bare array of values / value arrays (no
// header; columns are positional). Throws std::invalid_argument.
AnswerSet AnswerSetFromJson(const nlohmann::json& j,
                            NormalizationMode mode = NormalizationMode::kLenient);

}  // namespace sparqa
