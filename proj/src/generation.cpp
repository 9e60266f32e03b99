#include "sparqa/generation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

#include "http_util.hpp"
#include "json.hpp"
#include "sparqa/text.hpp"

namespace sparqa {

using nlohmann::json;

std::string_view ToString(GenerationErrorKind kind) {
  switch (kind) {
    case GenerationErrorKind::kTimeout: return "timeout";
    case GenerationErrorKind::kTransport: return "transport";
    case GenerationErrorKind::kStatus: return "status";
    case GenerationErrorKind::kEmptyCompletion: return "empty_completion";
    case GenerationErrorKind::kUnusable: return "unusable";
    case GenerationErrorKind::kUnparseable: return "unparseable_completion";
  }
  return "transport";
}

std::string_view ToString(ExtractionMethod method) {
  switch (method) {
    case ExtractionMethod::kVerbatim: return "verbatim";
    case ExtractionMethod::kFenceStripped: return "fence_stripped";
    case ExtractionMethod::kKeywordAnchored: return "keyword_anchored";
  }
  return "verbatim";
}

// ---------------------------------------------------------------------------
// Backends

CompletionProtocol CompletionProtocol::OpenAiCompletions() {
  CompletionProtocol p;
  p.response_pointer = "/choices/0/text";
  return p;
}

CompletionProtocol CompletionProtocol::FromJson(std::string_view json_text) {
  const json j = json::parse(json_text);
  CompletionProtocol p;
  p.model_field = j.value("model_field", p.model_field);
  p.prompt_field = j.value("prompt_field", p.prompt_field);
  p.temperature_field = j.value("temperature_field", p.temperature_field);
  p.max_tokens_field = j.value("max_tokens_field", p.max_tokens_field);
  p.response_pointer = j.value("response_pointer", p.response_pointer);
  return p;
}

HttpLlmBackend::HttpLlmBackend(CompletionProtocol protocol) : protocol_(std::move(protocol)) {}

std::string HttpLlmBackend::Complete(const FewShotPrompt& prompt,
                                     const LlmConfig& config) const {
  detail::UrlParts url;
  try {
    url = detail::SplitUrl(config.endpoint_url);
  } catch (const std::invalid_argument& e) {
    throw BackendFailure(GenerationErrorKind::kTransport, false, e.what());
  }
  auto client = detail::MakeClient(url, config.timeout);
  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

  json body;
  body[protocol_.model_field] = config.model_name;
  body[protocol_.prompt_field] = prompt.text;
  body[protocol_.temperature_field] = config.temperature;
  body[protocol_.max_tokens_field] = config.max_tokens;

  auto res = client->Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    const bool timeout = detail::IsTimeout(res.error());
    throw BackendFailure(
        timeout ? GenerationErrorKind::kTimeout : GenerationErrorKind::kTransport, true,
        "completion server " + config.endpoint_url + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    const bool transient = res->status >= 500 || res->status == 429;
    throw BackendFailure(GenerationErrorKind::kStatus, transient,
                         "completion server returned HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body)
        .at(json::json_pointer(protocol_.response_pointer))
        .get<std::string>();
  } catch (const std::exception& e) {
    throw BackendFailure(GenerationErrorKind::kStatus, false,
                         std::string("malformed completion response: ") + e.what());
  }
}

std::string EchoNearestBackend::Complete(const FewShotPrompt& prompt,
                                         const LlmConfig& /*config*/) const {
  constexpr std::string_view kLabel = "Sparql: ";
  std::string_view text = prompt.text;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto eol = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (line.substr(0, kLabel.size()) == kLabel) return std::string(line.substr(kLabel.size()));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  throw BackendFailure(GenerationErrorKind::kUnusable, false,
                       "echo-nearest: prompt has no example block");
}

ReplayBackend ReplayBackend::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read replay file " + path.string());
  ReplayBackend backend;
  const json j = json::parse(in);
  if (j.value("version", 0) != 1) {
    throw std::runtime_error("replay file " + path.string() + ": unsupported version");
  }
  for (const json& rec : j.at("completions")) {
    backend.by_hash_[rec.at("prompt_sha256").get<std::string>()] =
        rec.at("completion").get<std::string>();
  }
  return backend;
}

void ReplayBackend::Add(std::string_view prompt_text, std::string completion) {
  by_hash_[Sha256Hex(prompt_text)] = std::move(completion);
}

std::string ReplayBackend::Complete(const FewShotPrompt& prompt,
                                    const LlmConfig& /*config*/) const {
  const std::string hash = Sha256Hex(prompt.text);
  auto it = by_hash_.find(hash);
  if (it == by_hash_.end()) {
    throw BackendFailure(GenerationErrorKind::kUnusable, false,
                         "replay: no recorded completion for prompt " + hash);
  }
  return it->second;
}

RecordingBackend::RecordingBackend(std::shared_ptr<const LlmBackend> inner)
    : inner_(std::move(inner)) {}

std::string RecordingBackend::Complete(const FewShotPrompt& prompt,
                                       const LlmConfig& config) const {
  std::string text = inner_->Complete(prompt, config);
  std::lock_guard lock(mu_);
  by_hash_[Sha256Hex(prompt.text)] = text;
  return text;
}

void RecordingBackend::Save(const std::filesystem::path& path) const {
  json completions = json::array();
  {
    std::lock_guard lock(mu_);
    for (const auto& [hash, text] : by_hash_) {
      completions.push_back({{"prompt_sha256", hash}, {"completion", text}});
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write replay file " + path.string());
  out << json{{"version", 1}, {"completions", std::move(completions)}}.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

RawCompletion Generate(const LlmConfig& config, const FewShotPrompt& prompt,
                       const LlmBackend& backend) {
  const int attempts_allowed = std::max(0, config.max_retries) + 1;
  auto delay = config.backoff_initial;
  for (int attempt = 1;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    try {
      std::string text = backend.Complete(prompt, config);
      const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      if (Trim(text).empty()) {
        throw GenerationError(GenerationErrorKind::kEmptyCompletion,
                              backend.id() + " returned an empty completion", attempt);
      }
      return RawCompletion{std::move(text), latency, backend.id()};
    } catch (const BackendFailure& f) {
      if (!f.transient() || attempt >= attempts_allowed) {
        throw GenerationError(f.kind(),
                              std::string(f.what()) + " (after " + std::to_string(attempt) +
                                  (attempt == 1 ? " attempt)" : " attempts)"),
                              attempt);
      }
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

bool IEquals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

bool IsWord(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::size_t SkipSpace(std::string_view s, std::size_t i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return i;
}

std::string_view WordAt(std::string_view s, std::size_t i) {
  std::size_t j = i;
  while (j < s.size() && IsWord(s[j])) ++j;
  return s.substr(i, j - i);
}

// Whether the keyword at `pos` reads like the start of a query rather than
// an English word ("select the model...").
bool PlausibleLead(std::string_view s, std::size_t pos, std::string_view word) {
  const std::size_t next = SkipSpace(s, pos + word.size());
  if (next >= s.size()) return false;
  const char c = s[next];
  const std::string_view following = WordAt(s, next);
  auto prefixed_name_follows = [&] {
    std::size_t j = next;
    while (j < s.size() && (IsWord(s[j]) || s[j] == '-')) ++j;
    return j < s.size() && s[j] == ':';
  };
  if (IEquals(word, "SELECT")) {
    return c == '?' || c == '$' || c == '*' || c == '(' || IEquals(following, "DISTINCT") ||
           IEquals(following, "REDUCED");
  }
  if (IEquals(word, "ASK") || IEquals(word, "CONSTRUCT")) {
    return c == '{' || IEquals(following, "WHERE") || IEquals(following, "FROM");
  }
  if (IEquals(word, "DESCRIBE")) {
    return c == '?' || c == '$' || c == '<' || c == '*' || prefixed_name_follows();
  }
  if (IEquals(word, "PREFIX")) return c == ':' || prefixed_name_follows();
  if (IEquals(word, "BASE")) return c == '<';
  return false;
}

std::size_t FindLead(std::string_view s) {
  static constexpr std::string_view kLeads[] = {"PREFIX", "BASE",      "SELECT",
                                                "ASK",    "CONSTRUCT", "DESCRIBE"};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!IsWord(s[i]) || (i > 0 && (IsWord(s[i - 1]) || s[i - 1] == '?' ||
                                    s[i - 1] == '$' || s[i - 1] == ':'))) {
      continue;
    }
    const std::string_view word = WordAt(s, i);
    for (std::string_view lead : kLeads) {
      if (IEquals(word, lead) && PlausibleLead(s, i, word)) return i;
    }
  }
  return std::string_view::npos;
}

// Offset just past `s[i]`'s literal, or npos if it never closes.
std::size_t SkipLiteral(std::string_view s, std::size_t i) {
  const char q = s[i];
  for (std::size_t j = i + 1; j < s.size(); ++j) {
    if (s[j] == '\\') {
      ++j;
    } else if (s[j] == q) {
      return j + 1;
    }
  }
  return std::string_view::npos;
}

// Extends `end` over GROUP BY / ORDER BY / HAVING / LIMIT / OFFSET clauses.
std::size_t SkipModifiers(std::string_view s, std::size_t end) {
  static constexpr std::string_view kWords[] = {"GROUP", "ORDER", "BY",  "HAVING",
                                                "LIMIT", "OFFSET", "ASC", "DESC"};
  std::size_t i = end;
  while (true) {
    const std::size_t j = SkipSpace(s, i);
    if (j >= s.size()) return end;
    const char c = s[j];
    std::size_t k = j;
    if (c == '?' || c == '$') {
      k = j + 1;
      while (k < s.size() && IsWord(s[k])) ++k;
      if (k == j + 1) return end;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
    } else if (c == '(') {
      int depth = 0;
      for (; k < s.size(); ++k) {
        if (s[k] == '"' || s[k] == '\'') {
          const std::size_t after = SkipLiteral(s, k);
          if (after == std::string_view::npos) return end;
          k = after - 1;
        } else if (s[k] == '(') {
          ++depth;
        } else if (s[k] == ')' && --depth == 0) {
          ++k;
          break;
        }
      }
      if (depth != 0) return end;
    } else {
      const std::string_view word = WordAt(s, j);
      if (word.empty() || std::none_of(std::begin(kWords), std::end(kWords),
                                       [&](std::string_view w) { return IEquals(w, word); })) {
        return end;
      }
      k = j + word.size();
    }
    end = i = k;
  }
}

// End of the query that starts at `start`.
std::size_t QueryEnd(std::string_view s, std::size_t start) {
  int depth = 0;
  std::size_t last_close = std::string_view::npos;
  for (std::size_t i = start; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"' || c == '\'') {
      const std::size_t after = SkipLiteral(s, i);
      if (after == std::string_view::npos) break;
      i = after - 1;
    } else if (c == '<') {
      // IRIs may contain '#', never braces; skip so '<' comparisons are harmless.
      const auto close = s.find_first_of("> \n{}", i + 1);
      if (close != std::string_view::npos && s[close] == '>') i = close;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && depth > 0 && --depth == 0) {
      last_close = i + 1;
    }
  }
  if (last_close == std::string_view::npos) {
    const auto blank = s.find("\n\n", start);
    return blank == std::string_view::npos ? s.size() : blank;
  }
  return SkipModifiers(s, last_close);
}

}  // namespace

ExtractedQuery ExtractSparql(const RawCompletion& raw) {
  auto unparseable = [&raw](const std::string& why) {
    return GenerationError(GenerationErrorKind::kUnparseable, "unparseable completion: " + why,
                           1, raw.text);
  };
  std::string_view candidate = Trim(raw.text);
  if (candidate.empty()) throw unparseable("completion is empty");

  bool stripped = false;
  if (const auto fence = candidate.find("```"); fence != std::string_view::npos) {
    std::size_t body = fence + 3;
    // Optional info string such as ```sparql.
    const auto eol = candidate.find('\n', body);
    if (eol != std::string_view::npos &&
        std::all_of(candidate.begin() + static_cast<std::ptrdiff_t>(body),
                    candidate.begin() + static_cast<std::ptrdiff_t>(eol),
                    [](char c) { return IsWord(c) || c == '-' || c == ' ' || c == '\r'; })) {
      body = eol + 1;
    }
    const auto close = candidate.find("```", body);
    candidate = Trim(candidate.substr(
        body, close == std::string_view::npos ? std::string_view::npos : close - body));
    stripped = true;
  }
  constexpr std::string_view kLabel = "sparql:";
  if (candidate.size() >= kLabel.size() && IEquals(candidate.substr(0, kLabel.size()), kLabel)) {
    candidate = Trim(candidate.substr(kLabel.size()));
    stripped = true;
  }

  const std::size_t start = FindLead(candidate);
  if (start == std::string_view::npos) throw unparseable("no SPARQL query form found");
  const std::size_t end = QueryEnd(candidate, start);
  const std::string_view query = Trim(candidate.substr(start, end - start));

  ExtractedQuery out;
  out.sparql = std::string(query);
  out.raw = raw;
  if (start == 0 && query.size() == candidate.size()) {
    out.method = stripped ? ExtractionMethod::kFenceStripped : ExtractionMethod::kVerbatim;
  } else {
    out.method = ExtractionMethod::kKeywordAnchored;
  }
  return out;
}

}  // namespace sparqa
