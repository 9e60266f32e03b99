#include "fixtures.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sparqa/sparql_tools.hpp"

namespace sparqa::testing {

using nlohmann::json;

std::filesystem::path SourceDir() { return SPARQA_SOURCE_DIR; }

std::filesystem::path TestData(std::string_view name) {
  return SourceDir() / "tests" / "data" / name;
}

std::filesystem::path MakeTempDir(std::string_view tag) {
  static std::mt19937_64 rng(std::random_device{}());
  for (;;) {
    auto dir = std::filesystem::temp_directory_path() /
               ("sparqa-" + std::string(tag) + "-" + std::to_string(rng() % 1000000000));
    if (std::filesystem::create_directories(dir)) return dir;
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

LocalServer::~LocalServer() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

void LocalServer::Start() {
  port_ = server_.bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("cannot bind a test server");
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

std::string LocalServer::Url(std::string_view path) const {
  return "http://127.0.0.1:" + std::to_string(port_) + std::string(path);
}

std::string ResultsJson(const std::vector<std::string>& vars,
                        const std::vector<std::vector<std::optional<std::string>>>& rows) {
  json bindings = json::array();
  for (const auto& row : rows) {
    json b = json::object();
    for (std::size_t i = 0; i < vars.size() && i < row.size(); ++i) {
      if (row[i]) b[vars[i]] = {{"type", "literal"}, {"value", *row[i]}};
    }
    bindings.push_back(b);
  }
  return json{{"head", {{"vars", vars}}}, {"results", {{"bindings", bindings}}}}.dump();
}

std::string BooleanJson(bool truth) { return json{{"head", json::object()}, {"boolean", truth}}.dump(); }

namespace {

// Projected variables of a SELECT, or nullopt for other forms.
std::optional<std::vector<std::string>> SelectVars(const std::string& query) {
  std::vector<Token> tokens;
  try {
    tokens = Tokenize(query);
  } catch (const TokenizeError&) {
    return std::nullopt;
  }
  auto it = std::find_if(tokens.begin(), tokens.end(),
                         [](const Token& t) { return IsKeyword(t, "SELECT"); });
  if (it == tokens.end()) return std::nullopt;
  std::vector<std::string> vars;
  int depth = 0;
  bool after_as = false;
  for (++it; it != tokens.end(); ++it) {
    if (depth == 0 && (IsKeyword(*it, "WHERE") || it->text == "{")) break;
    if (it->text == "(") ++depth;
    if (it->text == ")") --depth;
    if (it->kind == TokenKind::kVariable && (depth == 0 || after_as)) {
      vars.push_back(it->text.substr(1));
    }
    after_as = IsKeyword(*it, "AS");
  }
  return vars;
}

}  // namespace

FixtureEndpoint::FixtureEndpoint() {
  server_.server().Post("/sparql", [this](const httplib::Request& req, httplib::Response& res) {
    Handle(req, res);
  });
  server_.Start();
}

void FixtureEndpoint::Add(std::string_view query, std::string payload) {
  std::lock_guard lock(mu_);
  canned_[Clean(query)] = std::move(payload);
}

void FixtureEndpoint::FailNext(int status, int times) {
  std::lock_guard lock(mu_);
  fail_status_ = status;
  fail_times_ = times;
}

std::vector<std::string> FixtureEndpoint::received() const {
  std::lock_guard lock(mu_);
  return received_;
}

void FixtureEndpoint::Handle(const httplib::Request& req, httplib::Response& res) {
  ++hits_;
  if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
  const std::string query = Clean(req.get_param_value("query"));
  std::unique_lock lock(mu_);
  received_.push_back(query);
  if (fail_times_ > 0) {
    --fail_times_;
    res.status = fail_status_;
    return;
  }
  if (auto it = canned_.find(query); it != canned_.end()) {
    res.set_content(it->second, "application/sparql-results+json");
    return;
  }
  lock.unlock();
  if (!Validate(query).ok()) {
    res.status = 400;
    res.set_content("Parse error: malformed query", "text/plain");
    return;
  }
  if (auto vars = SelectVars(query)) {
    res.set_content(ResultsJson(*vars, {}), "application/sparql-results+json");
  } else {
    res.set_content(BooleanJson(false), "application/sparql-results+json");
  }
}

FixtureLlm::FixtureLlm(std::function<std::string(const std::string&)> complete)
    : complete_(std::move(complete)) {
  server_.server().Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
    ++hits_;
    if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
    {
      std::lock_guard lock(mu_);
      last_body_ = req.body;
      if (fail_times_ > 0) {
        --fail_times_;
        res.status = fail_status_;
        return;
      }
    }
    const json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("prompt")) {
      res.status = 422;
      return;
    }
    res.set_content(json{{"text", complete_(body["prompt"].get<std::string>())}}.dump(),
                    "application/json");
  });
  server_.Start();
}

void FixtureLlm::FailNext(int status, int times) {
  std::lock_guard lock(mu_);
  fail_status_ = status;
  fail_times_ = times;
}

std::string FixtureLlm::last_body() const {
  std::lock_guard lock(mu_);
  return last_body_;
}

std::string UnreachableUrl(std::string_view path) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);
  ::close(fd);
  return "http://127.0.0.1:" + std::to_string(port) + std::string(path);
}

}  // namespace sparqa::testing
