#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparqa/answer_set.hpp"
#include "sparqa/text.hpp"

namespace sparqa {

enum class Split { kTrain, kDev, kTest };

std::string_view ToString(Split split);
// Throws std::invalid_argument for anything other than train/dev/test.
Split SplitFromString(std::string_view name);

struct QAPair {
  std::string id;
  std::string question;
  std::string sparql;  // verbatim gold query, newlines and all
  std::optional<AnswerSet> gold_answers;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

// Field names of a dataset record. SciQA derivatives disagree on these, so
// they are configurable (`--field-map id=uid,query=sparql_query`).
struct FieldMap {
  std::string id = "id";
  std::string question = "question";
  std::string query = "query";
  std::string answers = "answers";

  // Parses comma separated key=value overrides onto the defaults.
  static FieldMap Parse(std::string_view spec);
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An ordered, immutable split. File order is kept because retrieval breaks
// score ties by position.
class Corpus {
 public:
  // Validates QAPair invariants (non-empty trimmed question/sparql, unique
  // ids, at least one pair). Throws CorpusError.
  Corpus(Split split, std::vector<QAPair> pairs);

  Split split() const { return split_; }
  const std::vector<QAPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  const QAPair& operator[](std::size_t i) const { return pairs_[i]; }

  // Position of `id`, or nullopt.
  std::optional<std::size_t> Find(std::string_view id) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  Split split_;
  std::vector<QAPair> pairs_;
};

// Reads a dataset file: one top-level JSON array of objects, or an object
// wrapping that array under "questions". A record without an id gets its
// zero-padded file index ("0000", "0001", ...). Questions may be plain
// strings or objects holding the text under "string" (QALD style).
Corpus LoadSplit(const std::filesystem::path& path, Split split,
                 const FieldMap& fields = {});

// Writes the corpus as a top-level array; output is byte-stable.
void SaveSplit(const Corpus& corpus, const std::filesystem::path& path,
               const FieldMap& fields = {});

// In-memory variants of the above, used by LoadSplit/SaveSplit.
Corpus ParseCorpus(std::string_view text, Split split, const FieldMap& fields = {});
std::string SerializeCorpus(const Corpus& corpus, const FieldMap& fields = {});

}  // namespace sparqa
