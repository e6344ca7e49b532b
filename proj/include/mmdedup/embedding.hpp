#pragma once

#include <cctype>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mmdedup/errors.hpp"
#include "mmdedup/linalg.hpp"

// Semantic vectors for the combined "name city" string. The default
// provider is a deterministic signed feature-hashing vectorizer over
// character n-grams; it stands in for a hosted language model while
// preserving the property the pipeline actually needs: similar surface
// forms land on nearby vectors. A remote HTTP provider covers the case
// where real model embeddings are available (see remote_embedding.hpp).

namespace mmdedup {

enum class EmbeddingProviderKind { local_hashed, remote };

struct EmbeddingConfig {
  std::size_t dim = 768;
  std::size_t ngram_size = 3;
  std::uint64_t hash_seed = 0;
  EmbeddingProviderKind provider = EmbeddingProviderKind::local_hashed;
  std::string endpoint;            // remote provider only
  std::size_t max_batch = 64;      // remote request batch cap
  unsigned max_in_flight = 4;      // remote concurrent request cap
  int timeout_seconds = 30;

  void validate() const {
    if (dim < 1) throw ConfigError("embedding.dim must be >= 1");
    if (ngram_size < 1) throw ConfigError("embedding.ngram_size must be >= 1");
    if (max_batch < 1) throw ConfigError("embedding.max_batch must be >= 1");
    if (provider == EmbeddingProviderKind::remote && endpoint.empty())
      throw ConfigError("remote embedding provider requires an endpoint");
  }
};

// Case-folds, collapses whitespace runs to single spaces, and trims. Used
// both for embedding input ("name city") and the string baseline.
inline std::string normalize_text(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

inline std::string combine_text(const std::string& name, const std::string& city) {
  return normalize_text(name + " " + city);
}

namespace detail {

// Seeded FNV-1a over the n-gram bytes with a splitmix64-style finisher so
// both the bucket (mod dim) and the sign bit are well mixed. Pure integer
// arithmetic: identical on every platform.
inline std::uint64_t hash_ngram(const char* data, std::size_t len, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  h ^= h >> 30;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 27;
  h *= 0x94D049BB133111EBULL;
  h ^= h >> 31;
  return h;
}

}  // namespace detail

// Signed hashed character-n-gram embedding of one normalized text. The text
// is padded with (n-1) '#' boundary markers on both ends; every n-gram
// occurrence adds +-1 to bucket (hash mod dim), sign taken from hash bit 63;
// the result is L2-normalized. Empty text has no n-grams and stays the zero
// vector.
inline Vec embed_text_hashed(const std::string& text, const EmbeddingConfig& cfg) {
  Vec v(cfg.dim, 0.0);
  if (text.empty()) return v;
  const std::size_t n = cfg.ngram_size;
  std::string padded;
  padded.reserve(text.size() + 2 * (n - 1));
  padded.append(n - 1, '#');
  padded += text;
  padded.append(n - 1, '#');
  for (std::size_t i = 0; i + n <= padded.size(); ++i) {
    const std::uint64_t h = detail::hash_ngram(padded.data() + i, n, cfg.hash_seed);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[h % cfg.dim] += sign;
  }
  normalize_l2(v);
  return v;
}

// Provider interface: both the local vectorizer and the remote client
// produce one L2-normalized (or all-zero) vector per input text.
class TextEmbedder {
public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<Vec> embed_batch(const std::vector<std::string>& texts) = 0;
  virtual std::size_t dim() const = 0;
};

class HashedNgramEmbedder final : public TextEmbedder {
public:
  explicit HashedNgramEmbedder(EmbeddingConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  std::vector<Vec> embed_batch(const std::vector<std::string>& texts) override {
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_text_hashed(t, cfg_));
    return out;
  }

  std::size_t dim() const override { return cfg_.dim; }

private:
  EmbeddingConfig cfg_;
};

inline std::vector<Vec> embed_batch(const std::vector<std::string>& texts,
                                    const EmbeddingConfig& cfg) {
  return HashedNgramEmbedder(cfg).embed_batch(texts);
}

}  // namespace mmdedup
