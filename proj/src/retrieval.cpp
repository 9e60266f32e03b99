#include "sparqa/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "http_util.hpp"
#include "json.hpp"
#include "sparqa/text.hpp"

namespace sparqa {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr std::string_view kIndexMagic = "sparqa-index 1";

double Norm(std::span<const double> v) {
  double sum = 0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

Vector Vector::Normalized(std::vector<double> raw) {
  if (raw.empty()) throw RetrievalError("embedding has no components");
  for (double x : raw) {
    if (!std::isfinite(x)) throw RetrievalError("embedding has a non-finite component");
  }
  const double norm = Norm(raw);
  if (norm == 0) throw RetrievalError("zero-norm embedding");
  for (double& x : raw) x /= norm;
  return Vector(std::move(raw));
}

Vector Vector::FromUnit(std::vector<double> components) {
  if (components.empty()) throw RetrievalError("embedding has no components");
  const double norm = Norm(components);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > kUnitTolerance) {
    throw RetrievalError("vector is not unit length (norm " + std::to_string(norm) + ")");
  }
  return Vector(std::move(components));
}

double Cosine(const Vector& u, const Vector& v) {
  if (u.dim() != v.dim()) {
    throw RetrievalError("dimension mismatch: " + std::to_string(u.dim()) + " vs " +
                         std::to_string(v.dim()));
  }
  const auto a = u.components();
  const auto b = v.components();
  const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  return std::clamp(dot / (Norm(a) * Norm(b)), -1.0, 1.0);
}

Vector Embed(const Embedder& embedder, std::string_view text) {
  const std::string_view trimmed = Trim(text);
  if (trimmed.empty()) throw RetrievalError("cannot embed empty text");
  std::vector<double> raw = embedder.EmbedRaw(trimmed);
  if (raw.size() != embedder.dim()) {
    throw RetrievalError(embedder.provider_id() + " returned " + std::to_string(raw.size()) +
                         " components, expected " + std::to_string(embedder.dim()));
  }
  return Vector::Normalized(std::move(raw));
}

// ---------------------------------------------------------------------------

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw RetrievalError("embedding dimension must be positive");
}

std::string HashingEmbedder::provider_id() const {
  return "hash-trigram-" + std::to_string(dim_) + "-v1";
}

std::uint64_t HashingEmbedder::Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string HashingEmbedder::Preprocess(std::string_view text) {
  std::string out = " ";
  bool in_space = true;
  for (char c : Trim(text)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out += ' ';
      in_space = true;
      continue;
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    in_space = false;
  }
  if (out.back() != ' ') out += ' ';
  return out;
}

std::vector<double> HashingEmbedder::EmbedRaw(std::string_view text) const {
  const std::string s = Preprocess(text);
  std::vector<double> v(dim_, 0.0);
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
    v[Fnv1a64(std::string_view(s).substr(i, 3)) % dim_] += 1.0;
  }
  return v;
}

// ---------------------------------------------------------------------------

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw RetrievalError("remote embedder URL is empty");
  if (config_.model.empty()) throw RetrievalError("remote embedder model name is empty");
  if (config_.dim == 0) throw RetrievalError("remote embedder dimension must be positive");
}

std::vector<double> RemoteEmbedder::EmbedRaw(std::string_view text) const {
  const detail::UrlParts url = detail::SplitUrl(config_.url);
  auto client = detail::MakeClient(url, config_.timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  nlohmann::json body{{config_.request_field, std::string(text)}, {"model", config_.model}};
  auto res = client->Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw RetrievalError("embedder unreachable at " + config_.url + ": " +
                         httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw RetrievalError("embedder returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    return doc.at(nlohmann::json::json_pointer(config_.response_pointer))
        .get<std::vector<double>>();
  } catch (const std::exception& e) {
    throw RetrievalError(std::string("malformed embedder response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

EmbeddingIndex::EmbeddingIndex(std::string provider_id, std::size_t dim,
                               std::vector<IndexEntry> entries)
    : provider_id_(std::move(provider_id)), dim_(dim), entries_(std::move(entries)) {
  if (provider_id_.empty()) throw RetrievalError("index provider id is empty");
  if (dim_ == 0) throw RetrievalError("index dimension must be positive");
  for (const IndexEntry& e : entries_) {
    if (e.vector.dim() != dim_) {
      throw RetrievalError("entry '" + e.pair_id + "' has dimension " +
                           std::to_string(e.vector.dim()) + ", index has " +
                           std::to_string(dim_));
    }
  }
}

void EmbeddingIndex::Write(std::ostream& out) const {
  out << kIndexMagic << '\n'
      << "provider " << provider_id_ << '\n'
      << "dim " << dim_ << '\n'
      << "count " << entries_.size() << '\n';
  char buf[64];
  for (const IndexEntry& e : entries_) {
    if (e.pair_id.find_first_of("\t\n\r") != std::string::npos) {
      throw RetrievalError("pair id '" + e.pair_id + "' contains a tab or newline");
    }
    out << e.pair_id << '\t';
    bool first = true;
    for (double x : e.vector.components()) {
      if (!first) out << ' ';
      first = false;
      const auto res = std::to_chars(buf, buf + sizeof buf, x);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

namespace {

std::string ExpectField(std::istream& in, std::string_view key) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(std::string(key) + " ", 0) != 0) {
    throw RetrievalError("index header: expected '" + std::string(key) + " ...'");
  }
  return line.substr(key.size() + 1);
}

std::size_t ParseCount(const std::string& s, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw RetrievalError("index header: bad " + std::string(what) + " '" + s + "'");
  }
  return v;
}

}  // namespace

EmbeddingIndex EmbeddingIndex::Read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kIndexMagic) {
    throw RetrievalError("not a sparqa index file (or unsupported version)");
  }
  std::string provider = ExpectField(in, "provider");
  const std::size_t dim = ParseCount(ExpectField(in, "dim"), "dim");
  const std::size_t count = ParseCount(ExpectField(in, "count"), "count");

  std::vector<IndexEntry> entries;
  entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw RetrievalError("index truncated: " + std::to_string(i) + " of " +
                           std::to_string(count) + " entries");
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw RetrievalError("index entry " + std::to_string(i) + ": no tab");
    std::vector<double> comps;
    comps.reserve(dim);
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      double x = 0;
      const auto [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc()) {
        throw RetrievalError("index entry " + std::to_string(i) + ": bad component");
      }
      comps.push_back(x);
      p = next;
      if (p < end && *p == ' ') ++p;
    }
    if (comps.size() != dim) {
      throw RetrievalError("index entry " + std::to_string(i) + ": " +
                           std::to_string(comps.size()) + " components, expected " +
                           std::to_string(dim));
    }
    entries.push_back({line.substr(0, tab), Vector::FromUnit(std::move(comps))});
  }
  return EmbeddingIndex(std::move(provider), dim, std::move(entries));
}

void EmbeddingIndex::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RetrievalError("cannot write index file " + path.string());
  Write(out);
  if (!out.flush()) throw RetrievalError("failed writing index file " + path.string());
}

EmbeddingIndex EmbeddingIndex::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RetrievalError("cannot read index file " + path.string());
  return Read(in);
}

// ---------------------------------------------------------------------------

EmbeddingIndex BuildIndex(const Corpus& corpus, const Embedder& embedder,
                          std::size_t workers) {
  const std::size_t n = corpus.size();
  std::vector<Vector> vectors(n);
  std::vector<std::exception_ptr> errors(n);

  auto embed_slice = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        vectors[i] = Embed(embedder, corpus[i].question);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  workers = std::clamp<std::size_t>(workers, 1, n);
  if (workers == 1) {
    embed_slice(0, n);
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      threads.emplace_back(embed_slice, begin, std::min(n, begin + chunk));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw RetrievalError("embedding pair '" + corpus[i].id + "' failed: " + e.what());
    }
  }

  std::vector<IndexEntry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) entries.push_back({corpus[i].id, std::move(vectors[i])});
  return EmbeddingIndex(embedder.provider_id(), embedder.dim(), std::move(entries));
}

std::vector<Neighbor> TopN(const EmbeddingIndex& index, const Vector& query, std::size_t n) {
  if (n == 0 || n > index.size()) {
    throw RetrievalError("n = " + std::to_string(n) + " is outside [1, " +
                         std::to_string(index.size()) + "]");
  }
  if (query.dim() != index.dim()) {
    throw RetrievalError("query dimension " + std::to_string(query.dim()) +
                         " does not match index dimension " + std::to_string(index.dim()));
  }
  const auto& entries = index.entries();
  std::vector<Neighbor> scored;
  scored.reserve(entries.size());
  const auto q = query.components();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    // Both sides are unit length, so the cosine is the dot product.
    const auto v = entries[i].vector.components();
    const double dot = std::inner_product(q.begin(), q.end(), v.begin(), 0.0);
    scored.push_back({entries[i].pair_id, i, std::clamp(dot, -1.0, 1.0)});
  }
  // Equal cosines computed over differently ordered components can differ in
  // the last bit, so ranks use the score rounded to 1e-12 and anything closer
  // is a tie broken by corpus position.
  std::vector<std::pair<long long, std::size_t>> keys(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    keys[i] = {-std::llround(scored[i].score * 1e12), i};
  }
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n), keys.end());
  std::vector<Neighbor> top;
  top.reserve(n);
  for (std::size_t k = 0; k < n; ++k) top.push_back(std::move(scored[keys[k].second]));
  return top;
}

std::vector<Neighbor> TopN(const EmbeddingIndex& index, const Embedder& embedder,
                           std::string_view query, std::size_t n) {
  if (embedder.provider_id() != index.provider_id()) {
    throw RetrievalError("index was built by '" + index.provider_id() +
                         "' but the query embedder is '" + embedder.provider_id() + "'");
  }
  return TopN(index, Embed(embedder, query), n);
}

}  // namespace sparqa
