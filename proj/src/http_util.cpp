#include "http_util.hpp"

#include <stdexcept>

namespace sparqa::detail {

UrlParts SplitUrl(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw std::invalid_argument("URL '" + std::string(url) + "' has no scheme");
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw std::invalid_argument("unsupported URL scheme '" + std::string(scheme) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_start == std::string_view::npos) {
    parts.origin = std::string(url);
    parts.path = "/";
  } else {
    parts.origin = std::string(url.substr(0, path_start));
    parts.path = std::string(url.substr(path_start));
  }
  if (parts.origin.size() == scheme_end + 3) {
    throw std::invalid_argument("URL '" + std::string(url) + "' has no host");
  }
  return parts;
}

std::unique_ptr<httplib::Client> MakeClient(const UrlParts& url,
                                            std::chrono::milliseconds timeout) {
  auto client = std::make_unique<httplib::Client>(url.origin);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  client->set_follow_location(true);
  return client;
}

bool IsTimeout(httplib::Error error) {
  return error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read;
}

}  // namespace sparqa::detail
