#include "sparqa/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "sparqa/text.hpp"

namespace sparqa {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Record serialization

ordered_json ToJson(const ValidationReport& report) {
  auto issues = [](const std::vector<Issue>& list) {
    ordered_json out = ordered_json::array();
    for (const Issue& i : list) {
      out.push_back(ordered_json{{"code", ToString(i.code)},
                                 {"offset", i.offset},
                                 {"message", i.message}});
    }
    return out;
  };
  return ordered_json{{"ok", report.ok()},
                      {"issues", issues(report.issues)},
                      {"warnings", issues(report.warnings)}};
}

namespace {

IssueCode IssueCodeFromString(std::string_view s) {
  for (IssueCode c : {IssueCode::kUnbalancedBrace, IssueCode::kUnbalancedParen,
                      IssueCode::kUnbalancedBracket, IssueCode::kDanglingSemicolon,
                      IssueCode::kMissingDot, IssueCode::kUndeclaredPrefix,
                      IssueCode::kEmptyQuery, IssueCode::kNoQueryForm,
                      IssueCode::kUnterminatedLiteral}) {
    if (ToString(c) == s) return c;
  }
  throw std::invalid_argument("unknown issue code '" + std::string(s) + "'");
}

std::vector<Issue> IssuesFromJson(const json& j) {
  std::vector<Issue> out;
  for (const json& i : j) {
    out.push_back({IssueCodeFromString(i.at("code").get<std::string>()),
                   i.value("message", std::string()), i.value("offset", std::size_t{0})});
  }
  return out;
}

}  // namespace

ValidationReport ValidationFromJson(const json& j) {
  ValidationReport r;
  r.issues = IssuesFromJson(j.at("issues"));
  if (j.contains("warnings")) r.warnings = IssuesFromJson(j.at("warnings"));
  return r;
}

ordered_json ToJson(const QuestionRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["question"] = r.question;
  j["shot_count"] = r.shot_count;
  j["example_ids"] = r.example_ids;
  j["example_scores"] = r.example_scores;
  j["prompt_sha256"] = r.prompt_sha256;
  j["prompt"] = r.prompt;
  j["completion"] = r.completion;
  j["extraction_method"] =
      r.extraction_method ? ordered_json(*r.extraction_method) : ordered_json(nullptr);
  j["sparql"] = r.sparql;
  j["prefixes_added"] = r.prefixes_added;
  j["unknown_prefixes"] = r.unknown_prefixes;
  j["validation"] = r.validation ? ToJson(*r.validation) : ordered_json(nullptr);
  j["executed"] = r.executed;
  j["answer"] = r.answer ? ordered_json::parse(ToJson(*r.answer).dump()) : ordered_json(nullptr);
  if (r.error) {
    j["error"] = ordered_json{
        {"stage", r.error->stage}, {"kind", r.error->kind}, {"reason", r.error->reason}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

QuestionRecord RecordFromJson(const json& j) {
  try {
    QuestionRecord r;
    r.id = j.at("id").get<std::string>();
    r.question = j.value("question", std::string());
    r.shot_count = j.value("shot_count", std::size_t{0});
    if (j.contains("example_ids")) r.example_ids = j["example_ids"].get<std::vector<std::string>>();
    if (j.contains("example_scores"))
      r.example_scores = j["example_scores"].get<std::vector<double>>();
    r.prompt_sha256 = j.value("prompt_sha256", std::string());
    r.prompt = j.value("prompt", std::string());
    r.completion = j.value("completion", std::string());
    if (j.contains("extraction_method") && j["extraction_method"].is_string())
      r.extraction_method = j["extraction_method"].get<std::string>();
    r.sparql = j.value("sparql", std::string());
    if (j.contains("prefixes_added"))
      r.prefixes_added = j["prefixes_added"].get<std::vector<std::string>>();
    if (j.contains("unknown_prefixes"))
      r.unknown_prefixes = j["unknown_prefixes"].get<std::vector<std::string>>();
    if (j.contains("validation") && j["validation"].is_object())
      r.validation = ValidationFromJson(j["validation"]);
    r.executed = j.value("executed", false);
    if (j.contains("answer") && !j["answer"].is_null()) r.answer = AnswerSetFromJson(j["answer"]);
    if (j.contains("error") && j["error"].is_object()) {
      const json& e = j["error"];
      r.error = StageError{e.value("stage", std::string()), e.value("kind", std::string()),
                           e.value("reason", std::string())};
    }
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed result record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(const Corpus& train, const EmbeddingIndex& index, const Embedder& embedder,
                   const LlmBackend& backend, LlmConfig llm, EndpointConfig endpoint,
                   const PromptTemplate& tmpl, PipelineOptions options)
    : train_(train),
      index_(index),
      embedder_(embedder),
      backend_(backend),
      llm_(std::move(llm)),
      endpoint_(std::move(endpoint)),
      template_(tmpl),
      options_(std::move(options)) {
  if (index_.size() != train_.size()) {
    throw std::invalid_argument("index has " + std::to_string(index_.size()) +
                                " entries but the training split has " +
                                std::to_string(train_.size()) + " pairs; rebuild the index");
  }
  for (std::size_t i = 0; i < train_.size(); ++i) {
    if (index_.entries()[i].pair_id != train_[i].id) {
      throw std::invalid_argument("index entry " + std::to_string(i) + " is '" +
                                  index_.entries()[i].pair_id + "' but the training pair is '" +
                                  train_[i].id + "'; rebuild the index");
    }
  }
  if (index_.provider_id() != embedder_.provider_id()) {
    throw std::invalid_argument("index was built by '" + index_.provider_id() +
                                "' but the configured embedder is '" +
                                embedder_.provider_id() + "'");
  }
  if (options_.shot_count == 0 || options_.shot_count > options_.top_n ||
      options_.top_n > train_.size()) {
    throw std::invalid_argument("need 1 <= shot_count (" + std::to_string(options_.shot_count) +
                                ") <= top_n (" + std::to_string(options_.top_n) +
                                ") <= |train| (" + std::to_string(train_.size()) + ")");
  }
}

QuestionRecord Pipeline::Run(std::string_view id, std::string_view question) const {
  QuestionRecord rec;
  rec.id = std::string(id);
  rec.question = CollapseWhitespace(question);
  rec.shot_count = options_.shot_count;
  auto fail = [&rec](std::string stage, std::string kind, std::string reason) {
    rec.error = StageError{std::move(stage), std::move(kind), std::move(reason)};
    return rec;
  };

  std::vector<Neighbor> neighbors;
  try {
    neighbors = TopN(index_, embedder_, question, options_.top_n);
  } catch (const std::exception& e) {
    return fail("retrieval", "error", e.what());
  }

  std::vector<ExampleBlock> blocks;
  for (std::size_t i = 0; i < options_.shot_count; ++i) {
    const QAPair& pair = train_[neighbors[i].position];
    blocks.push_back({pair.id, CollapseWhitespace(pair.question),
                      Clean(pair.sparql, options_.clean)});
    rec.example_ids.push_back(pair.id);
    rec.example_scores.push_back(neighbors[i].score);
  }

  FewShotPrompt prompt;
  try {
    prompt = BuildPrompt(blocks, rec.question, template_);
  } catch (const std::exception& e) {
    return fail("prompting", "error", e.what());
  }
  rec.prompt = prompt.text;
  rec.prompt_sha256 = Sha256Hex(prompt.text);

  RawCompletion raw;
  try {
    raw = Generate(llm_, prompt, backend_);
  } catch (const GenerationError& e) {
    return fail("generation", std::string(ToString(e.kind())), e.what());
  }
  rec.completion = raw.text;

  ExtractedQuery extracted;
  try {
    extracted = ExtractSparql(raw);
  } catch (const GenerationError& e) {
    return fail("extraction", std::string(ToString(e.kind())), e.what());
  }
  rec.extraction_method = std::string(ToString(extracted.method));
  rec.sparql = Clean(extracted.sparql, options_.clean);

  if (options_.ensure_prefixes) {
    try {
      EnsurePrefixesResult ensured = EnsurePrefixes(rec.sparql, options_.prefixes);
      rec.sparql = std::move(ensured.text);
      rec.prefixes_added = std::move(ensured.added);
      rec.unknown_prefixes = std::move(ensured.unknown);
    } catch (const TokenizeError&) {
      // Left for the validator to report.
    }
  }
  rec.validation = Validate(rec.sparql, options_.prefixes);

  if (options_.dry_run) return rec;

  try {
    rec.answer = Execute(endpoint_, rec.sparql);
    rec.executed = true;
  } catch (const EndpointError& e) {
    rec.executed = true;
    return fail("execution", std::string(ToString(e.kind())), e.what());
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Batch

std::vector<QuestionRecord> LoadResults(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read results file " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!Trim(line).empty()) lines.push_back(std::move(line));
  }
  std::vector<QuestionRecord> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      // An interrupted writer can leave a partial last line.
      if (i + 1 == lines.size()) break;
      throw std::runtime_error(path.string() + ": line " + std::to_string(i + 1) +
                               " is not valid JSON");
    }
    records.push_back(RecordFromJson(j));
  }
  return records;
}

namespace {

void WriteSorted(const std::filesystem::path& out, std::vector<QuestionRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const QuestionRecord& a, const QuestionRecord& b) { return a.id < b.id; });
  std::filesystem::path tmp = out;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    for (const QuestionRecord& r : records) f << ToJson(r).dump() << '\n';
    if (!f.flush()) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, out);
}

}  // namespace

BatchSummary RunBatch(const Pipeline& pipeline, const Corpus& split,
                      const std::filesystem::path& out, const BatchOptions& options,
                      const std::function<void(const QuestionRecord&)>& on_record) {
  BatchSummary summary;
  summary.total = split.size();

  std::map<std::string, QuestionRecord> done;
  if (options.resume && std::filesystem::exists(out)) {
    for (QuestionRecord& r : LoadResults(out)) {
      if (split.Find(r.id)) done.insert_or_assign(r.id, std::move(r));
    }
  }
  summary.skipped = done.size();

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (!done.count(split[i].id)) pending.push_back(i);
  }

  // Rewrite the file with only the kept records (drops a torn last line).
  {
    std::vector<QuestionRecord> kept;
    for (auto& [id, r] : done) kept.push_back(r);
    WriteSorted(out, std::move(kept));
  }

  std::ofstream append(out, std::ios::binary | std::ios::app);
  if (!append) throw std::runtime_error("cannot append to " + out.string());
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const QAPair& pair = split[pending[k]];
      QuestionRecord rec = pipeline.Run(pair.id, pair.question);
      std::lock_guard lock(mu);
      append << ToJson(rec).dump() << '\n';
      append.flush();
      if (on_record) on_record(rec);
      done.insert_or_assign(rec.id, std::move(rec));
    }
  };

  const std::size_t threads =
      std::clamp<std::size_t>(options.concurrency, 1, std::max<std::size_t>(1, pending.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  append.close();

  summary.ran = pending.size();
  std::vector<QuestionRecord> all;
  for (auto& [id, r] : done) {
    summary.failed += r.failed();
    all.push_back(std::move(r));
  }
  WriteSorted(out, std::move(all));
  return summary;
}

}  // namespace sparqa
