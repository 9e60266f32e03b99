#include "sparqa/answer_set.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace sparqa {

namespace {

using nlohmann::json;

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

bool IsNumericDatatype(std::string_view datatype) {
  if (datatype.substr(0, kXsd.size()) != kXsd) return false;
  static constexpr std::string_view kTypes[] = {
      "integer",         "decimal",          "double",
      "float",           "int",              "long",
      "short",           "byte",             "nonNegativeInteger",
      "positiveInteger", "nonPositiveInteger", "negativeInteger",
      "unsignedLong",    "unsignedInt",      "unsignedShort",
      "unsignedByte"};
  std::string_view local = datatype.substr(kXsd.size());
  return std::find(std::begin(kTypes), std::end(kTypes), local) !=
         std::end(kTypes);
}

bool AllDigits(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

AnswerSet AnswerSet::Boolean(bool truth) {
  AnswerSet a;
  a.kind_ = AnswerKind::kBoolean;
  a.truth_ = truth;
  return a;
}

AnswerSet AnswerSet::Bindings(std::vector<std::string> vars) {
  AnswerSet a;
  a.kind_ = AnswerKind::kBindings;
  a.vars_ = std::move(vars);
  return a;
}

void AnswerSet::AddRow(Row row) {
  if (kind_ != AnswerKind::kBindings) {
    throw std::invalid_argument("boolean answer set cannot hold rows");
  }
  if (row.size() != vars_.size()) {
    throw std::invalid_argument("row arity " + std::to_string(row.size()) +
                                " does not match " +
                                std::to_string(vars_.size()) + " variables");
  }
  rows_.insert(std::move(row));
}

std::optional<std::string> CanonicalNumber(std::string_view lexical) {
  std::string_view s = lexical;
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;

  const auto exp_pos = s.find_first_of("eE");
  if (exp_pos != std::string_view::npos) {
    // DOUBLE: mantissa digits with optional '.', then a signed exponent.
    std::string_view mantissa = s.substr(0, exp_pos);
    std::string_view exponent = s.substr(exp_pos + 1);
    if (!exponent.empty() && (exponent.front() == '+' || exponent.front() == '-'))
      exponent.remove_prefix(1);
    const auto dot = mantissa.find('.');
    std::string_view int_part = mantissa.substr(0, dot);
    std::string_view frac_part =
        dot == std::string_view::npos ? std::string_view{} : mantissa.substr(dot + 1);
    if (exponent.empty() || !AllDigits(exponent) || !AllDigits(int_part) ||
        !AllDigits(frac_part) || (int_part.empty() && frac_part.empty())) {
      return std::nullopt;
    }
    double value = 0;
    const std::string text(lexical);
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || !std::isfinite(value)) return std::nullopt;
    if (value == 0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
  }

  // INTEGER or DECIMAL: handled as text so no precision is lost.
  const auto dot = s.find('.');
  std::string_view int_part = s.substr(0, dot);
  std::string_view frac_part =
      dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (!AllDigits(int_part) || !AllDigits(frac_part)) return std::nullopt;
  if (int_part.empty() && frac_part.empty()) return std::nullopt;
  if (dot != std::string_view::npos && frac_part.empty()) return std::nullopt;

  while (!int_part.empty() && int_part.front() == '0') int_part.remove_prefix(1);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);
  if (int_part.empty() && frac_part.empty()) return "0";

  std::string out;
  if (negative) out += '-';
  out += int_part.empty() ? "0" : std::string(int_part);
  if (!frac_part.empty()) {
    out += '.';
    out += frac_part;
  }
  return out;
}

std::string NormalizeTerm(const Term& term, NormalizationMode mode) {
  if (mode == NormalizationMode::kStrict || term.type != Term::Type::kLiteral) {
    return term.value;
  }
  if (!term.lang.empty()) return term.value + "@" + Lower(term.lang);
  if (term.datatype.empty() || IsNumericDatatype(term.datatype)) {
    if (auto canonical = CanonicalNumber(term.value)) return *canonical;
  }
  return term.value;
}

json ToJson(const AnswerSet& answers) {
  if (answers.kind() == AnswerKind::kBoolean) {
    return json{{"boolean", answers.truth()}};
  }
  json rows = json::array();
  for (const Row& row : answers.rows()) {
    json r = json::array();
    for (const Slot& slot : row) r.push_back(slot ? json(*slot) : json(nullptr));
    rows.push_back(std::move(r));
  }
  return json{{"vars", answers.vars()}, {"rows", std::move(rows)}};
}

namespace {

Term TermFromW3c(const json& cell, const std::string& where) {
  if (!cell.is_object() || !cell.contains("type") || !cell.contains("value") ||
      !cell["type"].is_string() || !cell["value"].is_string()) {
    throw std::invalid_argument(where + ": RDF term needs string 'type' and 'value'");
  }
  Term t;
  const std::string type = cell["type"].get<std::string>();
  if (type == "uri") {
    t.type = Term::Type::kIri;
  } else if (type == "literal" || type == "typed-literal") {
    t.type = Term::Type::kLiteral;
  } else if (type == "bnode") {
    t.type = Term::Type::kBlank;
  } else {
    throw std::invalid_argument(where + ": unknown term type '" + type + "'");
  }
  t.value = cell["value"].get<std::string>();
  if (auto it = cell.find("xml:lang"); it != cell.end() && it->is_string())
    t.lang = it->get<std::string>();
  if (auto it = cell.find("datatype"); it != cell.end() && it->is_string())
    t.datatype = it->get<std::string>();
  return t;
}

Slot SlotFromPlain(const json& v, NormalizationMode mode) {
  if (v.is_null()) return std::nullopt;
  Term t;
  if (v.is_string()) {
    t.value = v.get<std::string>();
  } else if (v.is_number() || v.is_boolean()) {
    t.value = v.dump();
  } else {
    throw std::invalid_argument("answer value must be a string, number or null");
  }
  return NormalizeTerm(t, mode);
}

}  // namespace

AnswerSet AnswerSetFromJson(const json& j, NormalizationMode mode) {
  if (j.is_object() && j.contains("boolean")) {
    if (!j["boolean"].is_boolean())
      throw std::invalid_argument("'boolean' must be true or false");
    return AnswerSet::Boolean(j["boolean"].get<bool>());
  }

  // W3C SPARQL 1.1 Query Results JSON.
  if (j.is_object() && j.contains("head")) {
    const json& head = j["head"];
    if (!head.is_object() || !head.contains("vars") || !head["vars"].is_array())
      throw std::invalid_argument("head.vars missing");
    std::vector<std::string> vars;
    for (const json& v : head["vars"]) {
      if (!v.is_string()) throw std::invalid_argument("head.vars must hold strings");
      vars.push_back(v.get<std::string>());
    }
    AnswerSet out = AnswerSet::Bindings(vars);
    if (!j.contains("results") || !j["results"].is_object() ||
        !j["results"].contains("bindings") || !j["results"]["bindings"].is_array())
      throw std::invalid_argument("results.bindings missing");
    const json& bindings = j["results"]["bindings"];
    for (std::size_t i = 0; i < bindings.size(); ++i) {
      const json& b = bindings[i];
      const std::string where = "results.bindings[" + std::to_string(i) + "]";
      if (!b.is_object()) throw std::invalid_argument(where + " is not an object");
      Row row(vars.size());
      for (std::size_t c = 0; c < vars.size(); ++c) {
        auto it = b.find(vars[c]);
        if (it == b.end()) continue;  // UNBOUND
        row[c] = NormalizeTerm(TermFromW3c(*it, where + "." + vars[c]), mode);
      }
      out.AddRow(std::move(row));
    }
    return out;
  }

  // Compact form.
  if (j.is_object() && j.contains("rows")) {
    std::vector<std::string> vars;
    if (j.contains("vars")) {
      if (!j["vars"].is_array()) throw std::invalid_argument("'vars' must be an array");
      for (const json& v : j["vars"]) vars.push_back(v.get<std::string>());
    }
    const json& rows = j["rows"];
    if (!rows.is_array()) throw std::invalid_argument("'rows' must be an array");
    if (vars.empty() && !rows.empty()) {
      // Headerless: positional columns named by index.
      const std::size_t arity = rows.front().is_array() ? rows.front().size() : 1;
      for (std::size_t c = 0; c < arity; ++c) vars.push_back(std::to_string(c));
    }
    AnswerSet out = AnswerSet::Bindings(vars);
    for (const json& r : rows) {
      Row row;
      if (r.is_array()) {
        for (const json& v : r) row.push_back(SlotFromPlain(v, mode));
      } else {
        row.push_back(SlotFromPlain(r, mode));
      }
      out.AddRow(std::move(row));
    }
    return out;
  }

  // Bare list of values.
  if (j.is_array()) {
    return AnswerSetFromJson(json{{"rows", j}}, mode);
  }
  throw std::invalid_argument("unrecognized answer set encoding");
}

}  // namespace sparqa
