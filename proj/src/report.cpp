#include "sparqa/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace sparqa {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view ToString(GoldSource source) {
  return source == GoldSource::kExecute ? "execute" : "file";
}

GoldSource GoldSourceFromString(std::string_view name) {
  if (name == "file") return GoldSource::kFile;
  if (name == "execute") return GoldSource::kExecute;
  throw std::invalid_argument("gold source must be 'file' or 'execute', got '" +
                              std::string(name) + "'");
}

std::size_t EvalReport::CountCategory(ErrorCategory category) const {
  return static_cast<std::size_t>(
      std::count_if(per_question.begin(), per_question.end(),
                    [category](const ScoredQuestion& q) { return q.category == category; }));
}

namespace {

constexpr ErrorCategory kCategories[] = {
    ErrorCategory::kCorrect, ErrorCategory::kSyntactic, ErrorCategory::kKeywordMismatch,
    ErrorCategory::kMisunderstandingOrOther};

ErrorCategory CategoryFromString(std::string_view s) {
  for (ErrorCategory c : kCategories) {
    if (ToString(c) == s) return c;
  }
  throw std::invalid_argument("unknown error category '" + std::string(s) + "'");
}

SystemOutcome OutcomeOf(const QuestionRecord* rec) {
  if (!rec) return SystemFailure{"missing", "no system record", false};
  if (rec->error) {
    return SystemFailure{rec->error->stage, rec->error->reason,
                         rec->error->kind == ToString(ExecErrorKind::kSyntaxRejected)};
  }
  if (!rec->answer) return SystemFailure{"execution", "not executed", false};
  return *rec->answer;
}

}  // namespace

EvalReport EvaluateRun(const Corpus& gold, const std::vector<QuestionRecord>& records,
                       const EvaluateOptions& options) {
  EvalReport report;
  report.split = std::string(ToString(gold.split()));
  report.gold_source = options.gold_source;

  std::map<std::string, const QuestionRecord*> by_id;
  std::set<std::size_t> shots;
  for (const QuestionRecord& r : records) {
    if (!gold.Find(r.id)) {
      report.extra_system.push_back(r.id);
      continue;
    }
    by_id[r.id] = &r;
    shots.insert(r.shot_count);
  }
  if (shots.size() == 1) report.shot_count = *shots.begin();
  std::sort(report.extra_system.begin(), report.extra_system.end());

  std::vector<const QAPair*> pairs;
  for (const QAPair& p : gold.pairs()) pairs.push_back(&p);
  std::sort(pairs.begin(), pairs.end(),
            [](const QAPair* a, const QAPair* b) { return a->id < b->id; });

  std::vector<QuestionScore> scores;
  for (const QAPair* pair : pairs) {
    std::optional<AnswerSet> gold_answers;
    if (options.gold_source == GoldSource::kFile) {
      gold_answers = pair->gold_answers;
      if (!gold_answers) {
        report.unlabeled.push_back(pair->id);
        continue;
      }
    } else {
      try {
        gold_answers = Execute(options.endpoint, Clean(pair->sparql));
      } catch (const EndpointError& e) {
        report.gold_failures.push_back({pair->id, e.what()});
        continue;
      }
    }

    auto it = by_id.find(pair->id);
    const QuestionRecord* rec = it == by_id.end() ? nullptr : it->second;
    if (!rec) report.missing_system.push_back(pair->id);

    ScoredQuestion q;
    q.score = ScoreQuestion(pair->id, *gold_answers, OutcomeOf(rec));
    const ValidationReport validation =
        rec && rec->validation ? *rec->validation : ValidationReport{};
    q.category = Categorize(*pair, rec ? rec->sparql : std::string(), validation, q.score);
    scores.push_back(q.score);
    report.per_question.push_back(std::move(q));
  }

  if (scores.empty()) {
    throw EvaluationError("none of the " + std::to_string(gold.size()) +
                          " gold questions could be scored (" +
                          std::to_string(report.unlabeled.size()) + " unlabeled, " +
                          std::to_string(report.gold_failures.size()) + " gold failures)");
  }
  report.macro = ComputeMacro(scores);
  report.nulls = NullAccounting(scores);
  return report;
}

ordered_json ToJson(const EvalReport& r) {
  ordered_json j;
  j["version"] = 1;
  j["split"] = r.split;
  j["shot_count"] = r.shot_count ? ordered_json(*r.shot_count) : ordered_json(nullptr);
  j["gold_source"] = ToString(r.gold_source);
  j["macro"] = {{"precision", r.macro.precision},
                {"recall", r.macro.recall},
                {"f1", r.macro.f1},
                {"count", r.macro.count}};
  j["nulls"] = {{"null_gold", r.nulls.null_gold},
                {"null_system", r.nulls.null_system},
                {"null_both", r.nulls.null_both},
                {"null_system_syntax", r.nulls.null_system_syntax}};
  ordered_json cats = ordered_json::object();
  for (ErrorCategory c : kCategories) cats[std::string(ToString(c))] = r.CountCategory(c);
  j["categories"] = cats;
  j["unlabeled"] = r.unlabeled;
  ordered_json failures = ordered_json::array();
  for (const GoldFailure& f : r.gold_failures) {
    failures.push_back({{"id", f.question_id}, {"reason", f.reason}});
  }
  j["gold_failures"] = failures;
  j["missing_system"] = r.missing_system;
  j["extra_system"] = r.extra_system;
  ordered_json per = ordered_json::array();
  for (const ScoredQuestion& q : r.per_question) {
    per.push_back({{"id", q.score.question_id},
                   {"precision", q.score.precision},
                   {"recall", q.score.recall},
                   {"f1", q.score.f1},
                   {"gold_null", q.score.gold_null},
                   {"system_null", q.score.system_null},
                   {"syntax_rejected", q.score.syntax_rejected},
                   {"kind_mismatch", q.score.kind_mismatch},
                   {"category", ToString(q.category)}});
  }
  j["per_question"] = per;
  return j;
}

EvalReport ReportFromJson(const json& j) {
  try {
    if (j.at("version").get<int>() != 1) {
      throw std::invalid_argument("unsupported report version " + j.at("version").dump());
    }
    EvalReport r;
    r.split = j.at("split").get<std::string>();
    if (!j.at("shot_count").is_null()) r.shot_count = j["shot_count"].get<std::size_t>();
    r.gold_source = GoldSourceFromString(j.at("gold_source").get<std::string>());
    const json& m = j.at("macro");
    r.macro = {m.at("precision").get<double>(), m.at("recall").get<double>(),
               m.at("f1").get<double>(), m.at("count").get<std::size_t>()};
    const json& n = j.at("nulls");
    r.nulls = {n.at("null_gold").get<std::size_t>(), n.at("null_system").get<std::size_t>(),
               n.at("null_both").get<std::size_t>(),
               n.at("null_system_syntax").get<std::size_t>()};
    r.unlabeled = j.value("unlabeled", std::vector<std::string>{});
    for (const json& f : j.value("gold_failures", json::array())) {
      r.gold_failures.push_back({f.at("id").get<std::string>(), f.value("reason", "")});
    }
    r.missing_system = j.value("missing_system", std::vector<std::string>{});
    r.extra_system = j.value("extra_system", std::vector<std::string>{});
    for (const json& q : j.at("per_question")) {
      ScoredQuestion s;
      s.score.question_id = q.at("id").get<std::string>();
      s.score.precision = q.at("precision").get<double>();
      s.score.recall = q.at("recall").get<double>();
      s.score.f1 = q.at("f1").get<double>();
      s.score.gold_null = q.value("gold_null", false);
      s.score.system_null = q.value("system_null", false);
      s.score.syntax_rejected = q.value("syntax_rejected", false);
      s.score.kind_mismatch = q.value("kind_mismatch", false);
      s.category = CategoryFromString(q.at("category").get<std::string>());
      r.per_question.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

namespace {

std::string Fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Left-aligned columns separated by two spaces.
std::string Table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()));
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << line << '\n';
  }
  return out.str();
}

std::string Shots(const EvalReport& r) {
  return r.shot_count ? std::to_string(*r.shot_count) + "-shot" : "mixed";
}

}  // namespace

std::string RenderTables(const std::vector<EvalReport>& reports) {
  std::vector<std::vector<std::string>> scores{
      {"Split", "Shots", "Questions", "Precision", "Recall", "F1"}};
  std::vector<std::vector<std::string>> nulls{
      {"Split", "Shots", "Null gold", "Null system", "Both null", "Null system (syntax error)"}};
  std::vector<std::vector<std::string>> cats{{"Split", "Shots"}};
  for (ErrorCategory c : kCategories) cats[0].emplace_back(ToString(c));
  cats[0].emplace_back("unscored");

  for (const EvalReport& r : reports) {
    scores.push_back({r.split, Shots(r), std::to_string(r.macro.count), Fixed3(r.macro.precision),
                      Fixed3(r.macro.recall), Fixed3(r.macro.f1)});
    nulls.push_back({r.split, Shots(r), std::to_string(r.nulls.null_gold),
                     std::to_string(r.nulls.null_system), std::to_string(r.nulls.null_both),
                     std::to_string(r.nulls.null_system_syntax)});
    std::vector<std::string> row{r.split, Shots(r)};
    for (ErrorCategory c : kCategories) row.push_back(std::to_string(r.CountCategory(c)));
    row.push_back(std::to_string(r.unlabeled.size() + r.gold_failures.size()));
    cats.push_back(std::move(row));
  }
  return "Macro scores\n" + Table(scores) + "\nNull answers\n" + Table(nulls) +
         "\nError categories\n" + Table(cats);
}

}  // namespace sparqa
