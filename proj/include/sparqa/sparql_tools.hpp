#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sparqa {

// ---------------------------------------------------------------------------
// Cleaning

// Which two-character escape sequences `clean` resolves outside literals.
struct CleanOptions {
  bool unescape_newline = true;  // "\n" -> space
  bool unescape_tab = true;      // "\t" -> space
  bool unescape_quote = true;    // "\"" -> '"'
};

// Flattens a query onto one line: real newlines, tabs and carriage returns
// become spaces, the escape sequences selected in `options` are resolved,
// space runs collapse to one and the ends are trimmed. `#` comments are
// dropped. Quoted literals and <IRI> references are copied byte for byte.
// Idempotent.
std::string Clean(std::string_view text, const CleanOptions& options = {});

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind {
  kKeyword,       // bare word: SELECT, WHERE, a, FILTER, str, true, ...
  kVariable,      // ?x, $x
  kIri,           // <...>
  kPrefixedName,  // orkgp:P31, rdfs:label, :local, orkgc:
  kLiteral,       // "..." '...' """...""" '''...''' with an optional @lang
  kPunct,         // { } ( ) [ ] . , ; = != < <= > >= && || ! + - * / ^^ ^ | ...
  kNumber,        // 12, 1.5, 1e3
};

std::string_view ToString(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset;  // byte offset of the first character

  friend bool operator==(const Token&, const Token&) = default;
};

class TokenizeError : public std::runtime_error {
 public:
  TokenizeError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Splits `text` into tokens. Whitespace and `#` comments are skipped; every
// other byte belongs to exactly one token. Throws TokenizeError for an
// unterminated string literal.
std::vector<Token> Tokenize(std::string_view text);

// Token texts joined by single spaces.
std::string Detokenize(const std::vector<Token>& tokens);

// True for a bare word equal (ignoring ASCII case) to `keyword`.
bool IsKeyword(const Token& token, std::string_view keyword);

// ---------------------------------------------------------------------------
// Prefixes

// Ordered prefix -> namespace IRI table.
class PrefixTable {
 public:
  // orkgc, orkgp, orkgsh, orkgr, rdf, rdfs, xsd.
  static PrefixTable Default();
  // Lines of `prefix<TAB>iri`; blank lines and lines starting with '#' are
  // ignored. Throws std::runtime_error on malformed lines.
  static PrefixTable Load(const std::filesystem::path& path);
  static PrefixTable Parse(std::string_view text);

  void Add(std::string prefix, std::string iri);
  const std::string* Find(std::string_view prefix) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Prefixes declared with PREFIX in the query, in declaration order.
std::vector<std::string> DeclaredPrefixes(const std::vector<Token>& tokens);
// Prefixes referenced by prefixed names, in first-use order, without repeats.
std::vector<std::string> UsedPrefixes(const std::vector<Token>& tokens);

struct EnsurePrefixesResult {
  std::string text;
  std::vector<std::string> added;    // declarations prepended, in use order
  std::vector<std::string> unknown;  // used, undeclared and not in the table
  bool ok() const { return unknown.empty(); }
};

// Prepends a `PREFIX p: <iri>` declaration for every prefix the query uses
// without declaring it. If any such prefix is missing from `table`, nothing
// is added and the text comes back unchanged with `unknown` filled in.
// Throws TokenizeError if `text` cannot be tokenized.
EnsurePrefixesResult EnsurePrefixes(std::string_view text, const PrefixTable& table);

// ---------------------------------------------------------------------------
// Validation

enum class IssueCode {
  kUnbalancedBrace,
  kUnbalancedParen,
  kUnbalancedBracket,
  kDanglingSemicolon,
  kMissingDot,
  kUndeclaredPrefix,
  kEmptyQuery,
  kNoQueryForm,
  kUnterminatedLiteral,
};

std::string_view ToString(IssueCode code);

struct Issue {
  IssueCode code;
  std::string message;
  std::size_t offset;
};

// Structural lint result. `issues` are hard findings; `warnings` hold the
// heuristic MISSING_DOT findings, which do not affect ok().
struct ValidationReport {
  std::vector<Issue> issues;
  std::vector<Issue> warnings;

  bool ok() const { return issues.empty(); }
  bool Has(IssueCode code) const;
};

// Checks bracket balance, dangling semicolons, adjacent triples without a
// separator (warning only), undeclared prefixes (against the query's own
// PREFIX declarations and `known`), and the presence of a query form.
ValidationReport Validate(std::string_view text,
                          const PrefixTable& known = PrefixTable::Default());

// ---------------------------------------------------------------------------
// Query form

enum class QueryForm { kSelect, kAsk, kConstruct, kDescribe };

std::string_view ToString(QueryForm form);

class NoQueryFormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The first SELECT/ASK/CONSTRUCT/DESCRIBE keyword outside comments and
// literals. Throws NoQueryFormError (also for untokenizable input).
QueryForm GetQueryForm(std::string_view text);

}  // namespace sparqa
