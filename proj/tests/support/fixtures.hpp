#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "httplib.h"

namespace sparqa::testing {

// Root of the source tree, for tests/data and data/.
std::filesystem::path SourceDir();
std::filesystem::path TestData(std::string_view name);

// Fresh empty directory under the system temp dir.
std::filesystem::path MakeTempDir(std::string_view tag);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

// httplib server on 127.0.0.1 with an ephemeral port. Register handlers on
// server() before Start().
class LocalServer {
 public:
  LocalServer() = default;
  ~LocalServer();
  LocalServer(const LocalServer&) = delete;
  LocalServer& operator=(const LocalServer&) = delete;

  httplib::Server& server() { return server_; }
  void Start();
  int port() const { return port_; }
  std::string Url(std::string_view path) const;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

// W3C SPARQL JSON results document; every value is a plain literal, an
// empty optional leaves the variable unbound in that row.
std::string ResultsJson(const std::vector<std::string>& vars,
                        const std::vector<std::vector<std::optional<std::string>>>& rows);
std::string BooleanJson(bool truth);

// Stand-in SPARQL endpoint. Queries are matched after Clean(). A known
// query gets its canned payload; a query the validator rejects gets HTTP
// 400; anything else gets an empty result with the SELECT variables.
class FixtureEndpoint {
 public:
  FixtureEndpoint();

  std::string url() const { return server_.Url("/sparql"); }
  void Add(std::string_view query, std::string payload);
  // Next `times` requests answer with `status` and no body.
  void FailNext(int status, int times = 1);
  void SetDelay(std::chrono::milliseconds delay) { delay_ms_ = delay.count(); }

  std::size_t hits() const { return hits_; }
  std::vector<std::string> received() const;

 private:
  void Handle(const httplib::Request& req, httplib::Response& res);

  LocalServer server_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> canned_;
  std::vector<std::string> received_;
  int fail_status_ = 0;
  int fail_times_ = 0;
  std::atomic<long long> delay_ms_{0};
  std::atomic<std::size_t> hits_{0};
};

// Completion server speaking the default {model, prompt, ...} -> {"text"}
// protocol. The handler maps a prompt to the completion text.
class FixtureLlm {
 public:
  explicit FixtureLlm(std::function<std::string(const std::string& prompt)> complete);

  std::string url() const { return server_.Url("/generate"); }
  void FailNext(int status, int times = 1);
  void SetDelay(std::chrono::milliseconds delay) { delay_ms_ = delay.count(); }
  std::size_t hits() const { return hits_; }
  std::string last_body() const;

 private:
  LocalServer server_;
  std::function<std::string(const std::string&)> complete_;
  mutable std::mutex mu_;
  std::string last_body_;
  int fail_status_ = 0;
  int fail_times_ = 0;
  std::atomic<long long> delay_ms_{0};
  std::atomic<std::size_t> hits_{0};
};

// A URL nothing listens on.
std::string UnreachableUrl(std::string_view path = "/");

}  // namespace sparqa::testing
