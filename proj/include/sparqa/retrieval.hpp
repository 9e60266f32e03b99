#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparqa/corpus.hpp"

namespace sparqa {

class RetrievalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A unit-length embedding. Construction normalizes; a zero vector is
// rejected because it has no direction to compare.
class Vector {
 public:
  Vector() = default;
  // Throws RetrievalError if `raw` is empty, all zero, or not finite.
  static Vector Normalized(std::vector<double> raw);
  // Accepts components that are already unit length (within 1e-9), as read
  // back from an index file. Throws RetrievalError otherwise.
  static Vector FromUnit(std::vector<double> components);

  std::size_t dim() const { return components_.size(); }
  std::span<const double> components() const { return components_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  explicit Vector(std::vector<double> c) : components_(std::move(c)) {}
  std::vector<double> components_;
};

// u.v / (|u||v|), clamped to [-1, 1]. Throws RetrievalError on a
// dimension mismatch.
double Cosine(const Vector& u, const Vector& v);

// Sentence encoder contract. Implementations must be deterministic for a
// fixed instance and safe to call from several threads.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string provider_id() const = 0;
  virtual std::size_t dim() const = 0;
  // Raw, unnormalized embedding of `text` (already trimmed, non-empty).
  virtual std::vector<double> EmbedRaw(std::string_view text) const = 0;
};

// Trims `text`, embeds it and normalizes. Throws RetrievalError for empty
// text, a zero-norm embedding or a wrong dimension.
Vector Embed(const Embedder& embedder, std::string_view text);

// Offline fallback encoder: hashed character-trigram term frequencies.
//
// The text is trimmed, ASCII letters are lower-cased, every whitespace run
// becomes one space and the result is padded with one space on each side.
// Each 3-byte window w contributes +1 to bucket FNV-1a-64(w) mod dim.
// With the default dim of 512 the provider id is "hash-trigram-512-v1".
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 512);

  std::string provider_id() const override;
  std::size_t dim() const override { return dim_; }
  std::vector<double> EmbedRaw(std::string_view text) const override;

  // Exposed so tests and other tools can reproduce the bucket layout.
  static std::uint64_t Fnv1a64(std::string_view bytes);
  static std::string Preprocess(std::string_view text);

 private:
  std::size_t dim_;
};

// Remote sentence encoder reached over HTTP. POSTs {"text": ...} (the field
// name is configurable) and reads a JSON number array at `response_pointer`.
struct RemoteEmbedderConfig {
  std::string url;                   // e.g. http://localhost:8081/embed
  std::string model;                 // provider identity, e.g. "all-MiniLM-L6-v2"
  std::size_t dim = 0;               // expected dimension
  std::string request_field = "text";
  std::string response_pointer = "/embedding";
  std::chrono::milliseconds timeout{30000};
  std::string api_key;               // sent as a bearer token when non-empty
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);

  std::string provider_id() const override { return "remote:" + config_.model; }
  std::size_t dim() const override { return config_.dim; }
  std::vector<double> EmbedRaw(std::string_view text) const override;

 private:
  RemoteEmbedderConfig config_;
};

struct IndexEntry {
  std::string pair_id;
  Vector vector;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct Neighbor {
  std::string pair_id;
  std::size_t position;  // index of the pair in corpus order
  double score;          // cosine similarity

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Embeddings of one corpus, in corpus order, tagged with the encoder that
// produced them.
class EmbeddingIndex {
 public:
  EmbeddingIndex(std::string provider_id, std::size_t dim, std::vector<IndexEntry> entries);

  const std::string& provider_id() const { return provider_id_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<IndexEntry>& entries() const { return entries_; }

  // Versioned text format:
  //   sparqa-index 1
  //   provider <provider_id>
  //   dim <dim>
  //   count <count>
  //   <pair_id>\t<c0> <c1> ... <c(dim-1)>      (one line per entry)
  // Components use the shortest decimal form that reads back exactly.
  void Write(std::ostream& out) const;
  static EmbeddingIndex Read(std::istream& in);
  void Save(const std::filesystem::path& path) const;
  static EmbeddingIndex Load(const std::filesystem::path& path);

  friend bool operator==(const EmbeddingIndex&, const EmbeddingIndex&) = default;

 private:
  std::string provider_id_;
  std::size_t dim_;
  std::vector<IndexEntry> entries_;
};

// Embeds every question of `corpus`. Up to `workers` threads embed
// disjoint slices; entries always come out in corpus order. An embedding
// failure aborts with a RetrievalError naming the pair id.
EmbeddingIndex BuildIndex(const Corpus& corpus, const Embedder& embedder,
                          std::size_t workers = 1);

// The `n` most similar entries to `query`, best first. Scores are ranked at
// 1e-12 resolution; ties keep corpus order. Throws RetrievalError if the
// embedder is not the one that built the index or if n is outside
// [1, index.size()].
std::vector<Neighbor> TopN(const EmbeddingIndex& index, const Embedder& embedder,
                           std::string_view query, std::size_t n);

// Same ranking for an already embedded query.
std::vector<Neighbor> TopN(const EmbeddingIndex& index, const Vector& query, std::size_t n);

}  // namespace sparqa
