#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sparqa/corpus.hpp"
#include "sparqa/endpoint_client.hpp"
#include "sparqa/generation.hpp"
#include "sparqa/pipeline.hpp"
#include "sparqa/retrieval.hpp"

namespace sparqa {

// Every knob of a run. Built from defaults, then the config file, then the
// environment, then command-line flags; later sources win.
struct RunConfig {
  std::optional<std::filesystem::path> train, dev, test, index, prompt_template, prefixes;
  std::string field_map;  // FieldMap::Parse syntax, empty for defaults

  std::size_t shot_count = 3;
  std::size_t top_n = 5;
  std::size_t concurrency = 4;
  bool ensure_prefixes = false;

  std::string embedder = "hash";  // hash | remote
  RemoteEmbedderConfig remote_embedder;

  std::string backend = "http";   // http | echo-nearest | replay
  std::string protocol = "default";  // default | openai
  std::optional<std::filesystem::path> replay_file;
  std::optional<std::filesystem::path> record_file;
  LlmConfig llm;

  EndpointConfig endpoint;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Applies a config document (see README) on top of `config`. Relative paths
// resolve against `base`. Throws ConfigError.
void ApplyConfigJson(const nlohmann::json& j, const std::filesystem::path& base,
                     RunConfig& config);
// Reads SPARQA_LLM_URL, SPARQA_LLM_API_KEY, SPARQA_ENDPOINT_URL,
// SPARQA_EMBEDDER_URL and SPARQA_EMBEDDER_API_KEY from `env`.
void ApplyEnvironment(const std::map<std::string, std::string>& env, RunConfig& config);
std::map<std::string, std::string> ProcessEnvironment();

// `sparqa <args...>`; args exclude the program name. Returns the exit code:
// 0 success, 1 usage or configuration error, 2 at least one failed stage.
// `lint` returns 1 when a query has hard issues.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
           const std::map<std::string, std::string>& env = ProcessEnvironment());

// "results.jsonl" with n=3 -> "results-3shot.jsonl".
std::filesystem::path ShotSuffixed(const std::filesystem::path& path, std::size_t shots);

}  // namespace sparqa
