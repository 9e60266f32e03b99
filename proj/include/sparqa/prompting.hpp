#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sparqa {

class PromptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One retrieved training pair as it appears in the prompt. `sparql` must
// already be flattened by Clean().
struct ExampleBlock {
  std::string id;
  std::string question;
  std::string sparql;
};

// The few-shot template. Exactly one `{example}` and one `{test question}`
// placeholder.
class PromptTemplate {
 public:
  // The canonical template shipped as data/prompt_template.txt.
  static const PromptTemplate& Default();
  static PromptTemplate Load(const std::filesystem::path& path);
  // Throws PromptError unless each placeholder occurs exactly once.
  explicit PromptTemplate(std::string text);

  const std::string& text() const { return text_; }

  static constexpr std::string_view kExampleSlot = "{example}";
  static constexpr std::string_view kQuestionSlot = "{test question}";

 private:
  std::string text_;
};

struct FewShotPrompt {
  std::string text;
  std::size_t shot_count = 0;
  std::vector<std::string> example_ids;  // rank order, most similar first
  std::string test_question;
};

// "Question: <q>\nSparql: <s>\n" for each block, in the given order.
// Throws PromptError for an empty list, for a line break in any question
// or sparql, and for a sparql that Clean() would still change.
std::string RenderExamples(std::span<const ExampleBlock> blocks);

// Substitutes the rendered examples and the trimmed test question into the
// template. Throws PromptError for an empty test question.
FewShotPrompt BuildPrompt(std::span<const ExampleBlock> blocks, std::string_view test_question,
                          const PromptTemplate& tmpl = PromptTemplate::Default());

}  // namespace sparqa
