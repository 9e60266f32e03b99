#include "sparqa/prompting.hpp"

#include <fstream>
#include <sstream>

#include "sparqa/sparql_tools.hpp"
#include "sparqa/text.hpp"

namespace sparqa {

namespace {

// Keep in sync with data/prompt_template.txt (a test compares them).
constexpr std::string_view kDefaultTemplate =
    "Task: Generate SPARQL queries to query the ORKG.\n"
    "Instruction: If you cannot generate a SPARQL query based on the provided examples, "
    "explain the reason.\n"
    "\n"
    "{example}\n"
    "Question: {test question}\n"
    "Sparql:\n"
    "Note: Output only the SPARQL query.\n";

std::size_t CountOccurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

// Substitutes both slots in one pass over the template so that text
// inserted for one slot is never scanned for the other.
std::string Fill(std::string_view tmpl, std::string_view examples, std::string_view question) {
  auto ex = tmpl.find(PromptTemplate::kExampleSlot);
  auto q = tmpl.find(PromptTemplate::kQuestionSlot);
  struct Slot {
    std::size_t pos, len;
    std::string_view value;
  };
  Slot first{ex, PromptTemplate::kExampleSlot.size(), examples};
  Slot second{q, PromptTemplate::kQuestionSlot.size(), question};
  if (second.pos < first.pos) std::swap(first, second);
  std::string out;
  out.reserve(tmpl.size() + examples.size() + question.size());
  out += tmpl.substr(0, first.pos);
  out += first.value;
  out += tmpl.substr(first.pos + first.len, second.pos - first.pos - first.len);
  out += second.value;
  out += tmpl.substr(second.pos + second.len);
  return out;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  if (CountOccurrences(text_, kExampleSlot) != 1) {
    throw PromptError("template must contain {example} exactly once");
  }
  if (CountOccurrences(text_, kQuestionSlot) != 1) {
    throw PromptError("template must contain {test question} exactly once");
  }
}

const PromptTemplate& PromptTemplate::Default() {
  static const PromptTemplate tmpl{std::string(kDefaultTemplate)};
  return tmpl;
}

PromptTemplate PromptTemplate::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PromptError("cannot read template " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return PromptTemplate(buf.str());
}

std::string RenderExamples(std::span<const ExampleBlock> blocks) {
  if (blocks.empty()) throw PromptError("no examples to render");
  std::string out;
  for (const ExampleBlock& b : blocks) {
    if (b.question.find_first_of("\r\n") != std::string::npos) {
      throw PromptError("example '" + b.id + "': question contains a line break");
    }
    if (b.sparql.find_first_of("\r\n") != std::string::npos || Clean(b.sparql) != b.sparql) {
      throw PromptError("example '" + b.id + "': sparql is not cleaned");
    }
    out += "Question: ";
    out += b.question;
    out += "\nSparql: ";
    out += b.sparql;
    out += '\n';
  }
  return out;
}

FewShotPrompt BuildPrompt(std::span<const ExampleBlock> blocks, std::string_view test_question,
                          const PromptTemplate& tmpl) {
  const std::string_view question = Trim(test_question);
  if (question.empty()) throw PromptError("test question is empty");
  if (question.find_first_of("\r\n") != std::string_view::npos) {
    throw PromptError("test question contains a line break");
  }

  FewShotPrompt prompt;
  prompt.text = Fill(tmpl.text(), RenderExamples(blocks), question);
  prompt.shot_count = blocks.size();
  for (const ExampleBlock& b : blocks) prompt.example_ids.push_back(b.id);
  prompt.test_question = std::string(question);
  return prompt;
}

}  // namespace sparqa
