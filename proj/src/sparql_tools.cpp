#include "sparqa/sparql_tools.hpp"

#include "sparqa/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace sparqa {

// ---------------------------------------------------------------------------
// Clean

namespace {

bool IsLayout(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; }

bool IsIriByte(char c) {
  if (static_cast<unsigned char>(c) <= 0x20) return false;
  switch (c) {
    case '<': case '>': case '"': case '{': case '}':
    case '|': case '^': case '`': case '\\':
      return false;
    default:
      return true;
  }
}

// One left-to-right pass. Literal boundaries are decided on the input, so a
// query that mixes escaped and raw quotes can segment differently on the
// next pass; Clean() iterates to a fixed point to stay idempotent.
std::string CleanOnce(std::string_view in, const CleanOptions& opt) {
  enum class State { kOut, kLiteral, kEscapedLiteral };
  State state = State::kOut;
  char quote = '"';
  bool long_quote = false;
  bool pending_space = false;

  std::string out;
  out.reserve(in.size());
  auto emit = [&](std::string_view s) {
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += s;
  };

  std::size_t i = 0;
  const std::size_t n = in.size();
  while (i < n) {
    const char c = in[i];
    switch (state) {
      case State::kOut: {
        if (IsLayout(c)) {
          pending_space = true;
          ++i;
          break;
        }
        if (c == '\\' && i + 1 < n) {
          const char d = in[i + 1];
          if ((d == 'n' && opt.unescape_newline) || (d == 't' && opt.unescape_tab)) {
            pending_space = true;
            i += 2;
            break;
          }
          if (d == '"' && opt.unescape_quote) {
            // An escaped quote outside any literal opens a literal that the
            // matching escaped quote closes: FILTER(?x = \"BoolQ\").
            emit("\"");
            state = State::kEscapedLiteral;
            i += 2;
            break;
          }
        }
        if (c == '<') {
          // An IRI reference is copied whole; its '#' is not a comment.
          std::size_t j = i + 1;
          while (j < n && IsIriByte(in[j])) ++j;
          if (j < n && in[j] == '>') {
            emit(in.substr(i, j + 1 - i));
            i = j + 1;
            break;
          }
        }
        if (c == '#') {
          // Comments would swallow the rest of a flattened query.
          while (i < n && in[i] != '\n' &&
                 !(opt.unescape_newline && in[i] == '\\' && i + 1 < n && in[i + 1] == 'n')) {
            ++i;
          }
          pending_space = true;
          break;
        }
        if (c == '"' || c == '\'') {
          quote = c;
          long_quote = i + 2 < n && in[i + 1] == c && in[i + 2] == c;
          emit(in.substr(i, long_quote ? 3 : 1));
          i += long_quote ? 3 : 1;
          state = State::kLiteral;
          break;
        }
        emit(in.substr(i, 1));
        ++i;
        break;
      }
      case State::kLiteral: {
        if (c == '\\' && i + 1 < n) {
          out.append(in.substr(i, 2));
          i += 2;
          break;
        }
        if (c == quote) {
          if (!long_quote) {
            out += c;
            ++i;
            state = State::kOut;
            break;
          }
          if (i + 2 < n && in[i + 1] == quote && in[i + 2] == quote) {
            out.append(in.substr(i, 3));
            i += 3;
            state = State::kOut;
            break;
          }
        }
        out += c;
        ++i;
        break;
      }
      case State::kEscapedLiteral: {
        if (c == '\\' && i + 1 < n && in[i + 1] == '"') {
          out += '"';
          i += 2;
          state = State::kOut;
          break;
        }
        out += c;
        ++i;
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::string Clean(std::string_view text, const CleanOptions& options) {
  // Every pass that changes the string either shortens it or replaces a
  // layout control character with a space, so this terminates.
  std::string current = CleanOnce(text, options);
  for (;;) {
    std::string next = CleanOnce(current, options);
    if (next == current) return current;
    current = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Tokenize

std::string_view ToString(TokenKind kind) {
  switch (kind) {
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kVariable: return "variable";
    case TokenKind::kIri: return "iri";
    case TokenKind::kPrefixedName: return "prefixed_name";
    case TokenKind::kLiteral: return "literal";
    case TokenKind::kPunct: return "punct";
    case TokenKind::kNumber: return "number";
  }
  return "punct";
}

namespace {

bool IsAlpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool IsHigh(char c) { return static_cast<unsigned char>(c) >= 0x80; }
bool IsWordChar(char c) { return IsAlpha(c) || IsDigit(c) || c == '_'; }
bool IsNameChar(char c) {
  return IsWordChar(c) || c == '-' || c == '.' || IsHigh(c);
}
bool IsLocalChar(char c) { return IsNameChar(c) || c == ':' || c == '%'; }

bool IsIriChar(char c) {
  if (static_cast<unsigned char>(c) <= 0x20) return false;
  switch (c) {
    case '<': case '>': case '"': case '{': case '}':
    case '|': case '^': case '`': case '\\':
      return false;
    default:
      return true;
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> Run() {
    std::vector<Token> tokens;
    while (true) {
      SkipLayout();
      if (pos_ >= text_.size()) break;
      tokens.push_back(Next());
    }
    return tokens;
  }

 private:
  char Peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void SkipLayout() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token Make(TokenKind kind, std::size_t begin) {
    return Token{kind, std::string(text_.substr(begin, pos_ - begin)), begin};
  }

  Token Next() {
    const std::size_t begin = pos_;
    const char c = Peek();

    if ((c == '?' || c == '$') && (IsWordChar(Peek(1)) || IsHigh(Peek(1)))) {
      ++pos_;
      while (pos_ < text_.size() && (IsWordChar(Peek()) || IsHigh(Peek()))) ++pos_;
      return Make(TokenKind::kVariable, begin);
    }

    if (c == '<') {
      std::size_t j = pos_ + 1;
      while (j < text_.size() && IsIriChar(text_[j])) ++j;
      if (j < text_.size() && text_[j] == '>') {
        pos_ = j + 1;
        return Make(TokenKind::kIri, begin);
      }
    }

    if (c == '"' || c == '\'') return Literal(begin, c);

    if (IsDigit(c)) return Number(begin);

    if (IsAlpha(c) || c == '_' || c == ':' || IsHigh(c)) return Name(begin);

    static constexpr std::string_view kTwoChar[] = {"^^", "&&", "||", "!=", "<=", ">="};
    for (std::string_view op : kTwoChar) {
      if (text_.substr(pos_, 2) == op) {
        pos_ += 2;
        return Make(TokenKind::kPunct, begin);
      }
    }
    ++pos_;
    return Make(TokenKind::kPunct, begin);
  }

  Token Literal(std::size_t begin, char quote) {
    const bool long_form = Peek(1) == quote && Peek(2) == quote;
    pos_ += long_form ? 3 : 1;
    bool closed = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == quote) {
        if (!long_form) {
          ++pos_;
          closed = true;
          break;
        }
        if (Peek(1) == quote && Peek(2) == quote) {
          pos_ += 3;
          closed = true;
          break;
        }
      }
      ++pos_;
    }
    if (!closed) {
      throw TokenizeError("unterminated string literal at offset " + std::to_string(begin),
                          begin);
    }
    // Language tag belongs to the literal.
    if (Peek() == '@' && IsAlpha(Peek(1))) {
      ++pos_;
      while (IsAlpha(Peek())) ++pos_;
      while (Peek() == '-' && (IsAlpha(Peek(1)) || IsDigit(Peek(1)))) {
        ++pos_;
        while (IsAlpha(Peek()) || IsDigit(Peek())) ++pos_;
      }
    }
    return Make(TokenKind::kLiteral, begin);
  }

  Token Number(std::size_t begin) {
    while (IsDigit(Peek())) ++pos_;
    if (Peek() == '.' && IsDigit(Peek(1))) {
      ++pos_;
      while (IsDigit(Peek())) ++pos_;
    }
    if (Peek() == 'e' || Peek() == 'E') {
      std::size_t k = 1;
      if (Peek(k) == '+' || Peek(k) == '-') ++k;
      if (IsDigit(Peek(k))) {
        pos_ += k;
        while (IsDigit(Peek())) ++pos_;
      }
    }
    return Make(TokenKind::kNumber, begin);
  }

  Token Name(std::size_t begin) {
    std::size_t j = pos_;
    while (j < text_.size() && IsNameChar(text_[j])) ++j;
    if (j < text_.size() && text_[j] == ':' && (j == pos_ || text_[j - 1] != '.')) {
      pos_ = j + 1;
      std::size_t end = pos_;
      while (end < text_.size() && (IsLocalChar(text_[end]) || text_[end] == '\\')) {
        end += text_[end] == '\\' ? 2 : 1;
      }
      end = std::min(end, text_.size());
      // A local name cannot end with '.'; that dot terminates the triple.
      while (end > pos_ && text_[end - 1] == '.') --end;
      pos_ = end;
      return Make(TokenKind::kPrefixedName, begin);
    }
    while (IsWordChar(Peek()) || IsHigh(Peek())) ++pos_;
    return Make(TokenKind::kKeyword, begin);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Token> Tokenize(std::string_view text) { return Lexer(text).Run(); }

std::string Detokenize(const std::vector<Token>& tokens) {
  std::string out;
  for (const Token& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

bool IsKeyword(const Token& token, std::string_view keyword) {
  if (token.kind != TokenKind::kKeyword || token.text.size() != keyword.size()) return false;
  for (std::size_t i = 0; i < keyword.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(token.text[i])) !=
        std::toupper(static_cast<unsigned char>(keyword[i])))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Prefixes

PrefixTable PrefixTable::Default() {
  PrefixTable t;
  t.Add("orkgc", "http://orkg.org/orkg/class/");
  t.Add("orkgp", "http://orkg.org/orkg/predicate/");
  t.Add("orkgsh", "http://orkg.org/orkg/shapes/");
  t.Add("orkgr", "http://orkg.org/orkg/resource/");
  t.Add("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#");
  t.Add("rdfs", "http://www.w3.org/2000/01/rdf-schema#");
  t.Add("xsd", "http://www.w3.org/2001/XMLSchema#");
  return t;
}

PrefixTable PrefixTable::Parse(std::string_view text) {
  PrefixTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw std::runtime_error("prefix table line " + std::to_string(lineno) +
                               ": expected prefix<TAB>iri");
    }
    std::string prefix = line.substr(0, tab);
    if (prefix.back() == ':') prefix.pop_back();
    t.Add(std::move(prefix), line.substr(tab + 1));
  }
  return t;
}

PrefixTable PrefixTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read prefix table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

void PrefixTable::Add(std::string prefix, std::string iri) {
  for (auto& [p, i] : entries_) {
    if (p == prefix) {
      i = std::move(iri);
      return;
    }
  }
  entries_.emplace_back(std::move(prefix), std::move(iri));
}

const std::string* PrefixTable::Find(std::string_view prefix) const {
  for (const auto& [p, i] : entries_)
    if (p == prefix) return &i;
  return nullptr;
}

namespace {

std::string PrefixOf(const Token& t) { return t.text.substr(0, t.text.find(':')); }

bool IsBlankNodeLabel(const Token& t) {
  return t.kind == TokenKind::kPrefixedName && t.text.rfind("_:", 0) == 0;
}

}  // namespace

std::vector<std::string> DeclaredPrefixes(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (IsKeyword(tokens[i], "PREFIX") &&
        tokens[i + 1].kind == TokenKind::kPrefixedName &&
        tokens[i + 1].text.back() == ':') {
      out.push_back(PrefixOf(tokens[i + 1]));
    }
  }
  return out;
}

std::vector<std::string> UsedPrefixes(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.kind != TokenKind::kPrefixedName || IsBlankNodeLabel(t)) continue;
    if (i > 0 && IsKeyword(tokens[i - 1], "PREFIX")) continue;
    std::string p = PrefixOf(t);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  return out;
}

EnsurePrefixesResult EnsurePrefixes(std::string_view text, const PrefixTable& table) {
  const std::vector<Token> tokens = Tokenize(text);
  const std::vector<std::string> declared = DeclaredPrefixes(tokens);
  EnsurePrefixesResult result;
  std::vector<std::string> missing;
  for (std::string& p : UsedPrefixes(tokens)) {
    if (std::find(declared.begin(), declared.end(), p) != declared.end()) continue;
    if (table.Find(p) == nullptr) result.unknown.push_back(p);
    missing.push_back(std::move(p));
  }
  if (!result.unknown.empty() || missing.empty()) {
    result.text = std::string(text);
    return result;
  }
  std::string header;
  for (const std::string& p : missing) {
    header += "PREFIX " + p + ": <" + *table.Find(p) + "> ";
  }
  result.added = std::move(missing);
  result.text = header + std::string(text);
  return result;
}

// ---------------------------------------------------------------------------
// Validate

std::string_view ToString(IssueCode code) {
  switch (code) {
    case IssueCode::kUnbalancedBrace: return "UNBALANCED_BRACE";
    case IssueCode::kUnbalancedParen: return "UNBALANCED_PAREN";
    case IssueCode::kUnbalancedBracket: return "UNBALANCED_BRACKET";
    case IssueCode::kDanglingSemicolon: return "DANGLING_SEMICOLON";
    case IssueCode::kMissingDot: return "MISSING_DOT";
    case IssueCode::kUndeclaredPrefix: return "UNDECLARED_PREFIX";
    case IssueCode::kEmptyQuery: return "EMPTY_QUERY";
    case IssueCode::kNoQueryForm: return "NO_QUERY_FORM";
    case IssueCode::kUnterminatedLiteral: return "UNTERMINATED_LITERAL";
  }
  return "UNKNOWN";
}

bool ValidationReport::Has(IssueCode code) const {
  auto match = [code](const Issue& i) { return i.code == code; };
  return std::any_of(issues.begin(), issues.end(), match) ||
         std::any_of(warnings.begin(), warnings.end(), match);
}

namespace {

bool IsPunct(const Token& t, std::string_view p) {
  return t.kind == TokenKind::kPunct && t.text == p;
}

IssueCode CodeFor(char bracket) {
  switch (bracket) {
    case '{': case '}': return IssueCode::kUnbalancedBrace;
    case '(': case ')': return IssueCode::kUnbalancedParen;
    default: return IssueCode::kUnbalancedBracket;
  }
}

char Opener(char closer) {
  return closer == '}' ? '{' : closer == ')' ? '(' : '[';
}

void CheckBrackets(const std::vector<Token>& tokens, ValidationReport& report) {
  struct Open {
    char c;
    std::size_t offset;
  };
  std::vector<Open> stack;
  for (const Token& t : tokens) {
    if (t.kind != TokenKind::kPunct || t.text.size() != 1) continue;
    const char c = t.text[0];
    if (c == '{' || c == '(' || c == '[') {
      stack.push_back({c, t.offset});
    } else if (c == '}' || c == ')' || c == ']') {
      const char want = Opener(c);
      auto match = std::find_if(stack.rbegin(), stack.rend(),
                                [want](const Open& o) { return o.c == want; });
      if (match == stack.rend()) {
        report.issues.push_back({CodeFor(c), std::string("unmatched '") + c + "'", t.offset});
        continue;
      }
      // Openers above the match were never closed.
      const std::size_t keep = static_cast<std::size_t>(stack.rend() - match) - 1;
      for (std::size_t k = stack.size(); k-- > keep + 1;) {
        report.issues.push_back({CodeFor(stack[k].c),
                                 std::string("'") + stack[k].c + "' is never closed",
                                 stack[k].offset});
      }
      stack.resize(keep);
    }
  }
  for (const Open& o : stack) {
    report.issues.push_back(
        {CodeFor(o.c), std::string("'") + o.c + "' is never closed", o.offset});
  }
}

void CheckSemicolons(const std::vector<Token>& tokens, ValidationReport& report) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!IsPunct(tokens[i], ";")) continue;
    if (i + 1 == tokens.size()) {
      report.issues.push_back(
          {IssueCode::kDanglingSemicolon, "';' ends the query", tokens[i].offset});
      continue;
    }
    const Token& next = tokens[i + 1];
    if (IsPunct(next, "}") || IsPunct(next, ".") || IsPunct(next, ";") ||
        IsPunct(next, ",")) {
      report.issues.push_back({IssueCode::kDanglingSemicolon,
                               "';' directly before '" + next.text + "'",
                               tokens[i].offset});
    }
  }
}

void CheckPrefixes(const std::vector<Token>& tokens, const PrefixTable& known,
                   ValidationReport& report) {
  const std::vector<std::string> declared = DeclaredPrefixes(tokens);
  std::unordered_set<std::string> reported;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.kind != TokenKind::kPrefixedName || IsBlankNodeLabel(t)) continue;
    if (i > 0 && IsKeyword(tokens[i - 1], "PREFIX")) continue;
    const std::string p = PrefixOf(t);
    if (std::find(declared.begin(), declared.end(), p) != declared.end()) continue;
    if (known.Find(p) != nullptr) continue;
    if (reported.insert(p).second) {
      report.issues.push_back(
          {IssueCode::kUndeclaredPrefix, "prefix '" + p + ":' is not declared", t.offset});
    }
  }
}

bool IsQueryFormKeyword(const Token& t) {
  return IsKeyword(t, "SELECT") || IsKeyword(t, "ASK") || IsKeyword(t, "CONSTRUCT") ||
         IsKeyword(t, "DESCRIBE");
}

bool IsTerm(const Token& t) {
  switch (t.kind) {
    case TokenKind::kVariable:
    case TokenKind::kIri:
    case TokenKind::kPrefixedName:
    case TokenKind::kLiteral:
    case TokenKind::kNumber:
      return true;
    case TokenKind::kKeyword:
      return t.text == "a" || IsKeyword(t, "true") || IsKeyword(t, "false") ||
             IsKeyword(t, "UNDEF");
    default:
      return false;
  }
}

// Flags a fourth term in a row inside a group graph pattern: subject,
// predicate and object have been seen and nothing separated them from the
// next subject. Property paths, expressions in parentheses, VALUES data and
// solution modifiers are skipped.
void CheckMissingDots(const std::vector<Token>& tokens, ValidationReport& report) {
  enum class Block { kGroup, kData, kBlankNode };
  struct Frame {
    Block block;
    int run = 0;
    bool suspended = false;
    int paren_depth = 0;
  };
  std::vector<Frame> frames;
  bool next_block_is_data = false;
  bool after_path_op = false;
  bool skip_datatype = false;

  auto count_term = [&](Frame& f, std::size_t offset) {
    if (f.suspended || f.block == Block::kData) return;
    if (after_path_op) {
      after_path_op = false;
      return;
    }
    if (++f.run == 4) {
      report.warnings.push_back(
          {IssueCode::kMissingDot, "triple pattern not terminated by '.' or ';'", offset});
      f.run = 1;
    }
  };

  for (const Token& t : tokens) {
    if (IsKeyword(t, "VALUES")) next_block_is_data = true;

    if (IsPunct(t, "{")) {
      if (!frames.empty()) {
        frames.back().run = 0;
        frames.back().suspended = false;
      }
      frames.push_back({next_block_is_data ? Block::kData : Block::kGroup});
      next_block_is_data = false;
      after_path_op = false;
      continue;
    }
    if (IsPunct(t, "}")) {
      if (!frames.empty() && frames.back().block != Block::kBlankNode) frames.pop_back();
      if (!frames.empty()) {
        frames.back().run = 0;
        frames.back().suspended = false;
      }
      continue;
    }
    if (frames.empty()) continue;
    Frame& f = frames.back();

    if (IsPunct(t, "(")) {
      ++f.paren_depth;
      continue;
    }
    if (IsPunct(t, ")")) {
      if (f.paren_depth > 0 && --f.paren_depth == 0) {
        f.run = 0;
        f.suspended = false;
      }
      continue;
    }
    if (f.paren_depth > 0 || f.block == Block::kData) continue;

    if (IsPunct(t, "[")) {
      frames.push_back({Block::kBlankNode});
      continue;
    }
    if (IsPunct(t, "]")) {
      if (f.block == Block::kBlankNode) {
        frames.pop_back();
        if (!frames.empty()) count_term(frames.back(), t.offset);
      }
      continue;
    }
    if (IsPunct(t, "^^")) {
      skip_datatype = true;
      continue;
    }
    if (IsPunct(t, ".")) {
      f.run = 0;
      f.suspended = false;
      continue;
    }
    if (IsPunct(t, ";")) {
      f.run = 1;
      f.suspended = false;
      continue;
    }
    if (IsPunct(t, ",")) {
      f.run = 2;
      continue;
    }
    if (IsPunct(t, "/") || IsPunct(t, "|") || IsPunct(t, "^")) {
      after_path_op = true;
      continue;
    }
    if (IsTerm(t)) {
      if (skip_datatype) {
        skip_datatype = false;
        continue;
      }
      count_term(f, t.offset);
      continue;
    }
    if (t.kind == TokenKind::kKeyword) {
      f.suspended = true;
      f.run = 0;
    }
  }
}

}  // namespace

ValidationReport Validate(std::string_view text, const PrefixTable& known) {
  ValidationReport report;
  if (Trim(text).empty()) {
    report.issues.push_back({IssueCode::kEmptyQuery, "query is empty", 0});
    return report;
  }

  std::vector<Token> tokens;
  try {
    tokens = Tokenize(text);
  } catch (const TokenizeError& e) {
    report.issues.push_back({IssueCode::kUnterminatedLiteral, e.what(), e.offset()});
    // Lint what precedes the broken literal.
    tokens = Tokenize(text.substr(0, e.offset()));
  }
  if (tokens.empty() && report.issues.empty()) {
    report.issues.push_back({IssueCode::kEmptyQuery, "query holds only comments", 0});
    return report;
  }

  CheckBrackets(tokens, report);
  CheckSemicolons(tokens, report);
  CheckPrefixes(tokens, known, report);
  if (std::none_of(tokens.begin(), tokens.end(), IsQueryFormKeyword)) {
    report.issues.push_back(
        {IssueCode::kNoQueryForm, "no SELECT, ASK, CONSTRUCT or DESCRIBE", 0});
  }
  CheckMissingDots(tokens, report);

  std::stable_sort(report.issues.begin(), report.issues.end(),
                   [](const Issue& a, const Issue& b) { return a.offset < b.offset; });
  return report;
}

// ---------------------------------------------------------------------------
// Query form

std::string_view ToString(QueryForm form) {
  switch (form) {
    case QueryForm::kSelect: return "select";
    case QueryForm::kAsk: return "ask";
    case QueryForm::kConstruct: return "construct";
    case QueryForm::kDescribe: return "describe";
  }
  return "select";
}

QueryForm GetQueryForm(std::string_view text) {
  std::vector<Token> tokens;
  try {
    tokens = Tokenize(text);
  } catch (const TokenizeError& e) {
    throw NoQueryFormError(std::string("NO_QUERY_FORM: ") + e.what());
  }
  for (const Token& t : tokens) {
    if (IsKeyword(t, "SELECT")) return QueryForm::kSelect;
    if (IsKeyword(t, "ASK")) return QueryForm::kAsk;
    if (IsKeyword(t, "CONSTRUCT")) return QueryForm::kConstruct;
    if (IsKeyword(t, "DESCRIBE")) return QueryForm::kDescribe;
  }
  throw NoQueryFormError("NO_QUERY_FORM: query has no SELECT, ASK, CONSTRUCT or DESCRIBE");
}

}  // namespace sparqa
