#include "sparqa/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace sparqa {

using nlohmann::json;

std::string_view ToString(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split SplitFromString(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + std::string(name) +
                              "' (expected train, dev or test)");
}

FieldMap FieldMap::Parse(std::string_view spec) {
  FieldMap map;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    std::string_view item = Trim(spec.substr(
        start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw std::invalid_argument("field map entry '" + std::string(item) +
                                    "' is not key=value");
      const std::string_view key = Trim(item.substr(0, eq));
      std::string value(Trim(item.substr(eq + 1)));
      if (value.empty())
        throw std::invalid_argument("empty field name for '" + std::string(key) + "'");
      if (key == "id") map.id = value;
      else if (key == "question") map.question = value;
      else if (key == "query") map.query = value;
      else if (key == "answers") map.answers = value;
      else throw std::invalid_argument("unknown field map key '" + std::string(key) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return map;
}

Corpus::Corpus(Split split, std::vector<QAPair> pairs)
    : split_(split), pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw CorpusError("empty corpus");
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const QAPair& p = pairs_[i];
    const std::string where = "record " + std::to_string(i);
    if (Trim(p.id).empty()) throw CorpusError(where + ": field 'id' is empty");
    if (Trim(p.question).empty()) throw CorpusError(where + ": field 'question' is empty");
    if (Trim(p.sparql).empty()) throw CorpusError(where + ": field 'query' is empty");
    if (!seen.insert(p.id).second)
      throw CorpusError(where + ": duplicate id '" + p.id + "'");
  }
}

std::optional<std::size_t> Corpus::Find(std::string_view id) const {
  for (std::size_t i = 0; i < pairs_.size(); ++i)
    if (pairs_[i].id == id) return i;
  return std::nullopt;
}

namespace {

std::string PaddedIndex(std::size_t i, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(total).size());
  std::string s = std::to_string(i);
  return std::string(width - std::min(width, s.size()), '0') + s;
}

std::string StringField(const json& record, const std::string& field,
                        std::size_t index) {
  const std::string where = "record " + std::to_string(index) + ": field '" + field + "'";
  auto it = record.find(field);
  if (it == record.end()) throw CorpusError(where + " is missing");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  // QALD style: {"string": "..."} or [{"language": "en", "string": "..."}].
  if (it->is_object() && it->contains("string") && (*it)["string"].is_string())
    return (*it)["string"].get<std::string>();
  if (it->is_array() && !it->empty() && it->front().is_object() &&
      it->front().contains("string"))
    return it->front()["string"].get<std::string>();
  if (it->is_object() && it->contains("sparql") && (*it)["sparql"].is_string())
    return (*it)["sparql"].get<std::string>();
  throw CorpusError(where + " has an unsupported type");
}

}  // namespace

Corpus ParseCorpus(std::string_view text, Split split, const FieldMap& fields) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CorpusError(std::string("dataset is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("questions")) doc = doc["questions"];
  if (!doc.is_array()) throw CorpusError("dataset must be a top-level array of records");
  if (doc.empty()) throw CorpusError("empty corpus");

  std::vector<QAPair> pairs;
  pairs.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& rec = doc[i];
    if (!rec.is_object())
      throw CorpusError("record " + std::to_string(i) + " is not an object");
    QAPair p;
    p.id = rec.contains(fields.id) ? StringField(rec, fields.id, i)
                                   : PaddedIndex(i, doc.size());
    p.question = StringField(rec, fields.question, i);
    p.sparql = StringField(rec, fields.query, i);
    if (auto it = rec.find(fields.answers); it != rec.end() && !it->is_null()) {
      try {
        p.gold_answers = AnswerSetFromJson(*it);
      } catch (const std::exception& e) {
        throw CorpusError("record " + std::to_string(i) + ": field '" +
                          fields.answers + "': " + e.what());
      }
    }
    pairs.push_back(std::move(p));
  }
  return Corpus(split, std::move(pairs));
}

std::string SerializeCorpus(const Corpus& corpus, const FieldMap& fields) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const QAPair& p : corpus.pairs()) {
    nlohmann::ordered_json rec;
    rec[fields.id] = p.id;
    rec[fields.question] = p.question;
    rec[fields.query] = p.sparql;
    if (p.gold_answers)
      rec[fields.answers] = nlohmann::ordered_json::parse(ToJson(*p.gold_answers).dump());
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

Corpus LoadSplit(const std::filesystem::path& path, Split split,
                 const FieldMap& fields) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read dataset file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return ParseCorpus(buf.str(), split, fields);
  } catch (const CorpusError& e) {
    throw CorpusError(path.string() + ": " + e.what());
  }
}

void SaveSplit(const Corpus& corpus, const std::filesystem::path& path,
               const FieldMap& fields) {
  const std::string text = SerializeCorpus(corpus, fields);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError("cannot write dataset file " + path.string());
  out << text;
  if (!out.flush()) throw CorpusError("failed writing dataset file " + path.string());
}

}  // namespace sparqa
