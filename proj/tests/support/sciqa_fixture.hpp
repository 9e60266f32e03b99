#pragma once

#include <map>
#include <string>
#include <vector>

#include "sparqa/corpus.hpp"

namespace sparqa::testing {

// Template-generated question/query pairs in the style of the scholarly
// benchmark: 6 question templates x 50 dataset names = 300 pairs, ids
// "train-0000".."train-0299". Queries are multi-line, as in the dataset.
std::vector<QAPair> TemplateTrainPairs();

// Gold rows the stand-in knowledge graph returns for one pair.
AnswerSet TemplateAnswer(std::size_t template_index, const std::string& entity);

struct MemorizationFixture {
  std::vector<QAPair> train;
  std::vector<QAPair> test;  // 100 questions copied from train, with gold answers
  // Cleaned query -> W3C results payload, for a FixtureEndpoint.
  std::map<std::string, std::string> endpoint;
  std::vector<std::string> perturbed_ids;
};

// With `perturb`, every tenth test question's gold query spells its label
// literal with a leading space, and only that spelling has answers.
MemorizationFixture MakeMemorizationFixture(bool perturb);

// W3C results JSON for an answer set (all values as plain literals).
std::string ToResultsJson(const AnswerSet& answers);

}  // namespace sparqa::testing
