#include "sparqa/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "sparqa/evaluation.hpp"
#include "sparqa/prompting.hpp"
#include "sparqa/report.hpp"
#include "sparqa/sparql_tools.hpp"

extern char** environ;

namespace sparqa {

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kStageFailed = 2;

void RejectUnknownKeys(const json& obj, std::string_view where,
                       std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + std::string(where) + "." + key + "'");
    }
  }
}

std::chrono::milliseconds Millis(const json& j) {
  return std::chrono::milliseconds(j.get<long long>());
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void ApplyConfigJson(const json& j, const std::filesystem::path& base, RunConfig& c) {
  try {
    RejectUnknownKeys(j, "config",
                      {"version", "paths", "field_map", "shot_count", "top_n", "concurrency",
                       "ensure_prefixes", "embedder", "llm", "endpoint"});
    if (!j.contains("version") || j["version"] != 1) {
      throw ConfigError("config must declare \"version\": 1");
    }
    auto path = [&base](const json& v) { return base / v.get<std::string>(); };

    if (j.contains("paths")) {
      const json& p = j["paths"];
      RejectUnknownKeys(p, "paths", {"train", "dev", "test", "index", "template", "prefixes"});
      if (p.contains("train")) c.train = path(p["train"]);
      if (p.contains("dev")) c.dev = path(p["dev"]);
      if (p.contains("test")) c.test = path(p["test"]);
      if (p.contains("index")) c.index = path(p["index"]);
      if (p.contains("template")) c.prompt_template = path(p["template"]);
      if (p.contains("prefixes")) c.prefixes = path(p["prefixes"]);
    }
    if (j.contains("field_map")) c.field_map = j["field_map"].get<std::string>();
    if (j.contains("shot_count")) c.shot_count = j["shot_count"].get<std::size_t>();
    if (j.contains("top_n")) c.top_n = j["top_n"].get<std::size_t>();
    if (j.contains("concurrency")) c.concurrency = j["concurrency"].get<std::size_t>();
    if (j.contains("ensure_prefixes")) c.ensure_prefixes = j["ensure_prefixes"].get<bool>();

    if (j.contains("embedder")) {
      const json& e = j["embedder"];
      RejectUnknownKeys(e, "embedder",
                        {"provider", "url", "model", "dim", "request_field", "response_pointer",
                         "timeout_ms", "api_key"});
      RemoteEmbedderConfig& r = c.remote_embedder;
      if (e.contains("provider")) c.embedder = e["provider"].get<std::string>();
      if (e.contains("url")) r.url = e["url"].get<std::string>();
      if (e.contains("model")) r.model = e["model"].get<std::string>();
      if (e.contains("dim")) r.dim = e["dim"].get<std::size_t>();
      if (e.contains("request_field")) r.request_field = e["request_field"].get<std::string>();
      if (e.contains("response_pointer"))
        r.response_pointer = e["response_pointer"].get<std::string>();
      if (e.contains("timeout_ms")) r.timeout = Millis(e["timeout_ms"]);
      if (e.contains("api_key")) r.api_key = e["api_key"].get<std::string>();
    }

    if (j.contains("llm")) {
      const json& l = j["llm"];
      RejectUnknownKeys(l, "llm",
                        {"backend", "protocol", "url", "model", "temperature", "max_tokens",
                         "timeout_ms", "max_retries", "backoff_ms", "api_key", "replay_file",
                         "record_file"});
      if (l.contains("backend")) c.backend = l["backend"].get<std::string>();
      if (l.contains("protocol")) c.protocol = l["protocol"].get<std::string>();
      if (l.contains("url")) c.llm.endpoint_url = l["url"].get<std::string>();
      if (l.contains("model")) c.llm.model_name = l["model"].get<std::string>();
      if (l.contains("temperature")) c.llm.temperature = l["temperature"].get<double>();
      if (l.contains("max_tokens")) c.llm.max_tokens = l["max_tokens"].get<int>();
      if (l.contains("timeout_ms")) c.llm.timeout = Millis(l["timeout_ms"]);
      if (l.contains("max_retries")) c.llm.max_retries = l["max_retries"].get<int>();
      if (l.contains("backoff_ms")) c.llm.backoff_initial = Millis(l["backoff_ms"]);
      if (l.contains("api_key")) c.llm.api_key = l["api_key"].get<std::string>();
      if (l.contains("replay_file")) c.replay_file = path(l["replay_file"]);
      if (l.contains("record_file")) c.record_file = path(l["record_file"]);
    }

    if (j.contains("endpoint")) {
      const json& e = j["endpoint"];
      RejectUnknownKeys(e, "endpoint",
                        {"url", "timeout_ms", "max_retries", "backoff_ms", "result_limit_guard",
                         "normalization"});
      if (e.contains("url")) c.endpoint.url = e["url"].get<std::string>();
      if (e.contains("timeout_ms")) c.endpoint.timeout = Millis(e["timeout_ms"]);
      if (e.contains("max_retries")) c.endpoint.max_retries = e["max_retries"].get<int>();
      if (e.contains("backoff_ms")) c.endpoint.backoff_initial = Millis(e["backoff_ms"]);
      if (e.contains("result_limit_guard"))
        c.endpoint.result_limit_guard = e["result_limit_guard"].get<std::size_t>();
      if (e.contains("normalization")) {
        const std::string mode = e["normalization"].get<std::string>();
        if (mode != "lenient" && mode != "strict") {
          throw ConfigError("endpoint.normalization must be lenient or strict");
        }
        c.endpoint.normalization =
            mode == "strict" ? NormalizationMode::kStrict : NormalizationMode::kLenient;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

void ApplyEnvironment(const std::map<std::string, std::string>& env, RunConfig& c) {
  auto get = [&env](const char* name) -> const std::string* {
    auto it = env.find(name);
    return it == env.end() || it->second.empty() ? nullptr : &it->second;
  };
  if (auto* v = get("SPARQA_LLM_URL")) c.llm.endpoint_url = *v;
  if (auto* v = get("SPARQA_LLM_API_KEY")) c.llm.api_key = *v;
  if (auto* v = get("SPARQA_ENDPOINT_URL")) c.endpoint.url = *v;
  if (auto* v = get("SPARQA_EMBEDDER_URL")) c.remote_embedder.url = *v;
  if (auto* v = get("SPARQA_EMBEDDER_API_KEY")) c.remote_embedder.api_key = *v;
}

std::map<std::string, std::string> ProcessEnvironment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    if (kv.substr(0, 7) != "SPARQA_") continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

std::filesystem::path ShotSuffixed(const std::filesystem::path& path, std::size_t shots) {
  std::filesystem::path out = path.parent_path();
  out /= path.stem().string() + "-" + std::to_string(shots) + "shot" + path.extension().string();
  return out;
}

namespace {

// Flag values; an option only overrides the config when it was given.
struct Flags {
  std::string config;
  std::string train, dev, test, index, prompt_template, prefixes, field_map;
  std::string shots;
  std::size_t top_n = 0;
  std::size_t concurrency = 0;
  bool ensure_prefixes = false;
  std::string embedder, embedder_url, embedder_model;
  std::size_t embedder_dim = 0;
  std::string backend, protocol, llm_url, model, replay, record;
  double temperature = 0;
  int max_tokens = 0;
  long long llm_timeout_ms = 0;
  int llm_retries = 0;
  std::string endpoint;
  long long endpoint_timeout_ms = 0;
  bool strict = false;
};

std::vector<std::size_t> ParseShots(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view t = Trim(item);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || value == 0) {
      throw ConfigError("--shots expects positive integers separated by commas, got '" + text +
                        "'");
    }
    if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(value);
  }
  if (out.empty()) throw ConfigError("--shots is empty");
  return out;
}

struct Context {
  RunConfig config;
  std::vector<std::size_t> shots;  // from --shots; defaults to {config.shot_count}
};

Context Resolve(const CLI::App& app, const Flags& f, const std::map<std::string, std::string>& env) {
  Context ctx;
  RunConfig& c = ctx.config;
  if (!f.config.empty()) {
    const std::filesystem::path path(f.config);
    json j;
    try {
      j = json::parse(ReadFile(path));
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    ApplyConfigJson(j, path.parent_path(), c);
  }
  ApplyEnvironment(env, c);

  auto given = [&app](const char* name) { return app.get_option(name)->count() > 0; };
  if (given("--train")) c.train = f.train;
  if (given("--dev")) c.dev = f.dev;
  if (given("--test")) c.test = f.test;
  if (given("--index")) c.index = f.index;
  if (given("--template")) c.prompt_template = f.prompt_template;
  if (given("--prefixes")) c.prefixes = f.prefixes;
  if (given("--field-map")) c.field_map = f.field_map;
  if (given("--top-n")) c.top_n = f.top_n;
  if (given("--concurrency")) c.concurrency = f.concurrency;
  if (given("--ensure-prefixes")) c.ensure_prefixes = f.ensure_prefixes;
  if (given("--embedder")) c.embedder = f.embedder;
  if (given("--embedder-url")) c.remote_embedder.url = f.embedder_url;
  if (given("--embedder-model")) c.remote_embedder.model = f.embedder_model;
  if (given("--embedder-dim")) c.remote_embedder.dim = f.embedder_dim;
  if (given("--backend")) c.backend = f.backend;
  if (given("--protocol")) c.protocol = f.protocol;
  if (given("--llm-url")) c.llm.endpoint_url = f.llm_url;
  if (given("--model")) c.llm.model_name = f.model;
  if (given("--temperature")) c.llm.temperature = f.temperature;
  if (given("--max-tokens")) c.llm.max_tokens = f.max_tokens;
  if (given("--llm-timeout-ms")) c.llm.timeout = std::chrono::milliseconds(f.llm_timeout_ms);
  if (given("--llm-retries")) c.llm.max_retries = f.llm_retries;
  if (given("--replay")) c.replay_file = f.replay;
  if (given("--record")) c.record_file = f.record;
  if (given("--endpoint")) c.endpoint.url = f.endpoint;
  if (given("--endpoint-timeout-ms"))
    c.endpoint.timeout = std::chrono::milliseconds(f.endpoint_timeout_ms);
  if (given("--strict-normalization") && f.strict) {
    c.endpoint.normalization = NormalizationMode::kStrict;
  }

  if (given("--shots")) {
    ctx.shots = ParseShots(f.shots);
  } else {
    ctx.shots = {c.shot_count};
  }
  c.shot_count = ctx.shots.front();
  if (c.concurrency == 0) throw ConfigError("concurrency must be positive");
  return ctx;
}

const std::filesystem::path& Require(const std::optional<std::filesystem::path>& p,
                                     const char* what) {
  if (!p) throw ConfigError(std::string("no ") + what + " configured");
  return *p;
}

std::unique_ptr<Embedder> MakeEmbedder(const RunConfig& c) {
  if (c.embedder == "hash") return std::make_unique<HashingEmbedder>();
  if (c.embedder == "remote") {
    if (c.remote_embedder.url.empty() || c.remote_embedder.model.empty() ||
        c.remote_embedder.dim == 0) {
      throw ConfigError("the remote embedder needs a url, a model and a dim");
    }
    return std::make_unique<RemoteEmbedder>(c.remote_embedder);
  }
  throw ConfigError("unknown embedder '" + c.embedder + "' (hash or remote)");
}

std::shared_ptr<const LlmBackend> MakeBackend(const RunConfig& c,
                                              std::shared_ptr<RecordingBackend>& recorder) {
  std::shared_ptr<const LlmBackend> backend;
  if (c.backend == "http") {
    if (c.llm.endpoint_url.empty()) {
      throw ConfigError("no completion server configured (--llm-url or SPARQA_LLM_URL)");
    }
    CompletionProtocol protocol;
    if (c.protocol == "openai") {
      protocol = CompletionProtocol::OpenAiCompletions();
    } else if (c.protocol != "default") {
      protocol = CompletionProtocol::FromJson(ReadFile(c.protocol));
    }
    backend = std::make_shared<HttpLlmBackend>(protocol);
  } else if (c.backend == "echo-nearest") {
    backend = std::make_shared<EchoNearestBackend>();
  } else if (c.backend == "replay") {
    backend = std::make_shared<ReplayBackend>(
        ReplayBackend::Load(Require(c.replay_file, "replay file (--replay)")));
  } else {
    throw ConfigError("unknown backend '" + c.backend + "' (http, echo-nearest or replay)");
  }
  if (c.record_file) {
    recorder = std::make_shared<RecordingBackend>(backend);
    backend = recorder;
  }
  return backend;
}

// Everything a pipeline needs, owned in one place.
struct Loaded {
  std::optional<Corpus> train;
  std::optional<EmbeddingIndex> index;
  std::unique_ptr<Embedder> embedder;
  std::shared_ptr<const LlmBackend> backend;
  std::shared_ptr<RecordingBackend> recorder;
  std::optional<PromptTemplate> prompt_template;
  PipelineOptions options;
};

Loaded Load(const RunConfig& c) {
  Loaded l;
  const FieldMap fields = FieldMap::Parse(c.field_map);
  l.train = LoadSplit(Require(c.train, "training split (--train)"), Split::kTrain, fields);
  l.embedder = MakeEmbedder(c);
  const auto& index_path = Require(c.index, "index file (--index)");
  if (!std::filesystem::exists(index_path)) {
    throw ConfigError("index " + index_path.string() + " does not exist; run `sparqa index`");
  }
  l.index = EmbeddingIndex::Load(index_path);
  l.backend = MakeBackend(c, l.recorder);
  l.prompt_template =
      c.prompt_template ? PromptTemplate::Load(*c.prompt_template) : PromptTemplate::Default();
  l.options.top_n = c.top_n;
  l.options.shot_count = c.shot_count;
  l.options.ensure_prefixes = c.ensure_prefixes;
  if (c.prefixes) l.options.prefixes = PrefixTable::Load(*c.prefixes);
  return l;
}

void SaveRecording(const Loaded& l, const RunConfig& c, std::ostream& err) {
  if (l.recorder && c.record_file) {
    l.recorder->Save(*c.record_file);
    err << "recorded completions to " << c.record_file->string() << '\n';
  }
}

std::string SlotText(const Slot& s) { return s ? *s : "UNBOUND"; }

void PrintIssues(std::ostream& out, std::string_view label, const ValidationReport& v) {
  for (const Issue& i : v.issues) {
    out << label << "error " << ToString(i.code) << " at " << i.offset << ": " << i.message
        << '\n';
  }
  for (const Issue& i : v.warnings) {
    out << label << "warning " << ToString(i.code) << " at " << i.offset << ": " << i.message
        << '\n';
  }
}

void PrintAnswer(std::ostream& out, const AnswerSet& a) {
  if (a.kind() == AnswerKind::kBoolean) {
    out << (a.truth() ? "true" : "false") << '\n';
    return;
  }
  for (std::size_t i = 0; i < a.vars().size(); ++i) out << (i ? "\t" : "") << '?' << a.vars()[i];
  out << '\n';
  for (const Row& row : a.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << SlotText(row[i]);
    out << '\n';
  }
  out << '(' << a.rows().size() << (a.rows().size() == 1 ? " row" : " rows") << ")\n";
}

int CmdIndex(const RunConfig& c, const std::string& out_flag, std::ostream& out) {
  const FieldMap fields = FieldMap::Parse(c.field_map);
  const Corpus train = LoadSplit(Require(c.train, "training split (--train)"), Split::kTrain, fields);
  const std::filesystem::path dest =
      out_flag.empty() ? Require(c.index, "index file (--index or --out)") : std::filesystem::path(out_flag);
  const auto embedder = MakeEmbedder(c);
  const EmbeddingIndex index = BuildIndex(train, *embedder, c.concurrency);
  index.Save(dest);
  out << "indexed " << index.size() << " questions with " << index.provider_id() << " -> "
      << dest.string() << '\n';
  return kOk;
}

int CmdAsk(const RunConfig& c, const std::string& question, bool dry_run, std::ostream& out,
           std::ostream& err) {
  Loaded l = Load(c);
  l.options.dry_run = dry_run;
  Pipeline pipeline(*l.train, *l.index, *l.embedder, *l.backend, c.llm, c.endpoint,
                    *l.prompt_template, l.options);
  const QuestionRecord rec = pipeline.Run("ask", question);
  SaveRecording(l, c, err);

  if (!rec.prompt.empty()) {
    out << "== Examples\n";
    for (std::size_t i = 0; i < rec.example_ids.size(); ++i) {
      out << i + 1 << ". " << rec.example_ids[i] << "  " << std::fixed << std::setprecision(4)
          << rec.example_scores[i] << '\n';
    }
    out << std::defaultfloat << "== Prompt\n" << rec.prompt;
    if (rec.prompt.back() != '\n') out << '\n';
  }
  if (rec.extraction_method) {
    out << "== SPARQL (" << *rec.extraction_method << ")\n" << rec.sparql << '\n';
  }
  if (!rec.prefixes_added.empty()) {
    out << "prefixes added:";
    for (const auto& p : rec.prefixes_added) out << ' ' << p;
    out << '\n';
  }
  if (rec.validation) {
    out << "== Validation\n";
    if (rec.validation->ok() && rec.validation->warnings.empty()) out << "ok\n";
    PrintIssues(out, "", *rec.validation);
  }
  if (rec.error) {
    err << rec.error->stage << " failed (" << rec.error->kind << "): " << rec.error->reason
        << '\n';
    return kStageFailed;
  }
  if (dry_run) {
    out << "== Answer\n(dry run: not executed)\n";
    return kOk;
  }
  out << "== Answer\n";
  PrintAnswer(out, *rec.answer);
  return kOk;
}

int CmdBatch(const Context& ctx, const std::string& split_name, const std::string& input,
             const std::string& out_path, bool resume, std::ostream& out, std::ostream& err) {
  const RunConfig& base = ctx.config;
  const Split split = SplitFromString(split_name);
  if (split == Split::kTrain) throw ConfigError("batch runs on dev or test, not train");
  std::filesystem::path input_path;
  if (!input.empty()) {
    input_path = input;
  } else {
    input_path = Require(split == Split::kDev ? base.dev : base.test,
                         split == Split::kDev ? "dev split (--dev or --input)"
                                              : "test split (--test or --input)");
  }
  const Corpus questions = LoadSplit(input_path, split, FieldMap::Parse(base.field_map));

  Loaded l = Load(base);
  bool any_failed = false;
  for (std::size_t shots : ctx.shots) {
    PipelineOptions options = l.options;
    options.shot_count = shots;
    options.top_n = std::max(base.top_n, shots);
    Pipeline pipeline(*l.train, *l.index, *l.embedder, *l.backend, base.llm, base.endpoint,
                      *l.prompt_template, options);
    const std::filesystem::path dest =
        ctx.shots.size() > 1 ? ShotSuffixed(out_path, shots) : std::filesystem::path(out_path);
    const BatchSummary s = RunBatch(pipeline, questions, dest, {base.concurrency, resume});
    out << split_name << ' ' << shots << "-shot: " << s.total << " questions, " << s.skipped
        << " kept, " << s.ran << " run, " << s.failed << " failed -> " << dest.string() << '\n';
    any_failed |= s.failed > 0;
  }
  SaveRecording(l, base, err);
  return any_failed ? kStageFailed : kOk;
}

int CmdEvaluate(const RunConfig& c, const std::string& gold_path, const std::string& system_path,
                const std::string& gold_source, const std::string& split_name,
                const std::string& report_path, std::ostream& out, std::ostream& err) {
  const Corpus gold =
      LoadSplit(gold_path, SplitFromString(split_name), FieldMap::Parse(c.field_map));
  if (!std::filesystem::exists(system_path)) {
    throw ConfigError("system results " + system_path + " do not exist");
  }
  const std::vector<QuestionRecord> records = LoadResults(system_path);
  EvaluateOptions options;
  options.gold_source = GoldSourceFromString(gold_source);
  options.endpoint = c.endpoint;
  if (c.prefixes) options.prefixes = PrefixTable::Load(*c.prefixes);

  const EvalReport report = EvaluateRun(gold, records, options);
  if (!report_path.empty()) {
    std::ofstream f(report_path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + report_path);
    f << ToJson(report).dump(2) << '\n';
  }
  out << RenderTables({report});
  if (!report.unlabeled.empty()) {
    err << report.unlabeled.size() << " questions without gold answers were not scored\n";
  }
  if (!report.gold_failures.empty()) {
    err << report.gold_failures.size() << " gold queries failed to execute and were not scored\n";
  }
  if (!report.missing_system.empty()) {
    err << report.missing_system.size() << " questions had no system record (scored as null)\n";
  }
  return kOk;
}

int CmdLint(const RunConfig& c, const std::vector<std::string>& files,
            const std::vector<std::string>& queries, const std::string& dataset,
            std::ostream& out) {
  const PrefixTable prefixes = c.prefixes ? PrefixTable::Load(*c.prefixes) : PrefixTable::Default();
  std::vector<std::pair<std::string, std::string>> inputs;
  for (const auto& f : files) inputs.emplace_back(f, ReadFile(f));
  for (std::size_t i = 0; i < queries.size(); ++i) {
    inputs.emplace_back("query " + std::to_string(i + 1), queries[i]);
  }
  if (!dataset.empty()) {
    const Corpus corpus = LoadSplit(dataset, Split::kDev, FieldMap::Parse(c.field_map));
    for (const QAPair& p : corpus.pairs()) inputs.emplace_back(p.id, p.sparql);
  }
  if (inputs.empty()) throw ConfigError("nothing to lint: give files, --query or --dataset");

  std::size_t bad = 0;
  for (const auto& [name, text] : inputs) {
    std::string query = Clean(text);
    if (c.ensure_prefixes) {
      try {
        query = EnsurePrefixes(query, prefixes).text;
      } catch (const TokenizeError&) {
      }
    }
    const ValidationReport v = Validate(query, prefixes);
    if (v.ok() && v.warnings.empty()) {
      out << name << ": ok\n";
    } else {
      PrintIssues(out, name + ": ", v);
    }
    bad += !v.ok();
  }
  out << inputs.size() << " checked, " << bad << " with errors\n";
  return bad ? 1 : kOk;
}

int CmdReport(const std::vector<std::string>& files, std::ostream& out) {
  std::vector<EvalReport> reports;
  for (const auto& f : files) {
    try {
      reports.push_back(ReportFromJson(json::parse(ReadFile(f))));
    } catch (const json::parse_error& e) {
      throw ConfigError(f + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(f + ": " + e.what());
    }
  }
  out << RenderTables(reports);
  return kOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
           const std::map<std::string, std::string>& env) {
  CLI::App app{"Few-shot question answering over the ORKG", "sparqa"};
  app.require_subcommand(1);
  app.fallthrough();
  // A repeated global option keeps its last value, so wrappers can append overrides.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Flags f;
  app.add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--train", f.train, "training split");
  app.add_option("--dev", f.dev, "dev split");
  app.add_option("--test", f.test, "test split");
  app.add_option("--index", f.index, "embedding index file");
  app.add_option("--template", f.prompt_template, "prompt template file");
  app.add_option("--prefixes", f.prefixes, "prefix table (prefix<TAB>iri)");
  app.add_option("--field-map", f.field_map, "dataset field names, e.g. query=sparql_query");
  app.add_option("--shots", f.shots, "examples per prompt; batch accepts a list like 1,3,5");
  app.add_option("--top-n", f.top_n, "neighbors retrieved");
  app.add_option("--concurrency", f.concurrency, "parallel questions / embedding workers");
  app.add_flag("--ensure-prefixes", f.ensure_prefixes, "declare missing known prefixes");
  app.add_option("--embedder", f.embedder, "hash or remote");
  app.add_option("--embedder-url", f.embedder_url);
  app.add_option("--embedder-model", f.embedder_model);
  app.add_option("--embedder-dim", f.embedder_dim);
  app.add_option("--backend", f.backend, "http, echo-nearest or replay");
  app.add_option("--protocol", f.protocol, "default, openai or a protocol JSON file");
  app.add_option("--llm-url", f.llm_url, "completion server URL");
  app.add_option("--model", f.model, "model name sent to the completion server");
  app.add_option("--temperature", f.temperature);
  app.add_option("--max-tokens", f.max_tokens);
  app.add_option("--llm-timeout-ms", f.llm_timeout_ms);
  app.add_option("--llm-retries", f.llm_retries);
  app.add_option("--replay", f.replay, "replay file for --backend replay");
  app.add_option("--record", f.record, "save completions to this replay file");
  app.add_option("--endpoint", f.endpoint, "SPARQL endpoint URL");
  app.add_option("--endpoint-timeout-ms", f.endpoint_timeout_ms);
  app.add_flag("--strict-normalization", f.strict, "compare raw lexical forms");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::Throw);

  auto* index = app.add_subcommand("index", "embed the training questions");
  std::string index_out;
  index->add_option("--out", index_out, "index file (default: --index)");

  auto* ask = app.add_subcommand("ask", "answer one question");
  std::string question;
  bool dry_run = false;
  ask->add_option("question", question)->required();
  ask->add_flag("--dry-run", dry_run, "stop before the endpoint");

  auto* batch = app.add_subcommand("batch", "run every question of a split");
  std::string batch_split = "dev", batch_input, batch_out;
  bool resume = false;
  batch->add_option("--split", batch_split, "dev or test");
  batch->add_option("--input", batch_input, "questions file (default: the split's path)");
  batch->add_option("--out", batch_out, "results file (JSON lines)")->required();
  batch->add_flag("--resume", resume, "keep records already in the results file");

  auto* evaluate = app.add_subcommand("evaluate", "score a results file");
  std::string gold, system, gold_source = "file", eval_split = "dev", report_out;
  evaluate->add_option("--gold", gold, "gold dataset file")->required();
  evaluate->add_option("--system", system, "results file")->required();
  evaluate->add_option("--gold-source", gold_source, "file or execute");
  evaluate->add_option("--split", eval_split, "split label for the report");
  evaluate->add_option("--out", report_out, "write the JSON report here");

  auto* lint = app.add_subcommand("lint", "check SPARQL queries");
  std::vector<std::string> lint_files, lint_queries;
  std::string lint_dataset;
  lint->add_option("files", lint_files, "files holding one query each");
  lint->add_option("--query", lint_queries, "query text");
  lint->add_option("--dataset", lint_dataset, "check every gold query of a dataset file");

  auto* report = app.add_subcommand("report", "print tables from JSON reports");
  std::vector<std::string> report_files;
  report->add_option("reports", report_files)->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // CLI11 has its own exit codes; only help (0) is kept.
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    const Context ctx = Resolve(app, f, env);
    if (*index) return CmdIndex(ctx.config, index_out, out);
    if (*ask) {
      if (ctx.shots.size() != 1) throw ConfigError("ask takes a single --shots value");
      return CmdAsk(ctx.config, question, dry_run, out, err);
    }
    if (*batch) return CmdBatch(ctx, batch_split, batch_input, batch_out, resume, out, err);
    if (*evaluate) {
      return CmdEvaluate(ctx.config, gold, system, gold_source, eval_split, report_out, out, err);
    }
    if (*lint) return CmdLint(ctx.config, lint_files, lint_queries, lint_dataset, out);
    if (*report) return CmdReport(report_files, out);
  } catch (const std::exception& e) {
    err << "sparqa: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace sparqa
