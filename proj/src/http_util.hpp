#pragma once

// Internal helpers shared by the HTTP clients. Not installed.

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include "httplib.h"

namespace sparqa::detail {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // "/..." (at least "/")
};

// Throws std::invalid_argument if `url` has no http:// or https:// scheme.
UrlParts SplitUrl(std::string_view url);

std::unique_ptr<httplib::Client> MakeClient(const UrlParts& url,
                                            std::chrono::milliseconds timeout);

bool IsTimeout(httplib::Error error);

}  // namespace sparqa::detail
