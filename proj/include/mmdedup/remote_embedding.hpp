#pragma once

#include <future>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mmdedup/embedding.hpp"
#include "mmdedup/errors.hpp"

// HTTP client for an external embedding service, standing in for a hosted
// language model. Wire contract: POST /embed with {"texts": [...]} returns
// {"vectors": [[...], ...]}, one vector per input text, all of the
// configured dimension. Returned vectors are L2-normalized locally.

namespace mmdedup {

namespace detail {

inline std::vector<Vec> remote_embed_one_batch(const std::vector<std::string>& texts,
                                               const EmbeddingConfig& cfg) {
  httplib::Client client(cfg.endpoint);
  client.set_connection_timeout(cfg.timeout_seconds, 0);
  client.set_read_timeout(cfg.timeout_seconds, 0);
  client.set_write_timeout(cfg.timeout_seconds, 0);

  nlohmann::json body;
  body["texts"] = texts;
  const auto res = client.Post("/embed", body.dump(), "application/json");
  if (!res)
    throw ProviderError("embedding service unreachable (" +
                            httplib::to_string(res.error()) + ") at " + cfg.endpoint,
                        /*retryable=*/true);
  if (res->status < 200 || res->status >= 300)
    throw ProviderError("embedding service returned HTTP " + std::to_string(res->status),
                        /*retryable=*/res->status >= 500);

  nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("vectors") || !parsed["vectors"].is_array())
    throw ProtocolError("embedding response is not a JSON object with a 'vectors' array");
  const auto& vectors = parsed["vectors"];
  if (vectors.size() != texts.size())
    throw ProtocolError("embedding count mismatch: sent " + std::to_string(texts.size()) +
                        " texts, got " + std::to_string(vectors.size()) + " vectors");

  std::vector<Vec> out;
  out.reserve(vectors.size());
  for (const auto& item : vectors) {
    if (!item.is_array() || item.size() != cfg.dim)
      throw ProtocolError("embedding dimension mismatch: expected " +
                          std::to_string(cfg.dim) + ", got " +
                          std::to_string(item.size()));
    Vec v;
    v.reserve(cfg.dim);
    for (const auto& x : item) {
      if (!x.is_number()) throw ProtocolError("embedding vector entry is not a number");
      v.push_back(x.get<double>());
    }
    normalize_l2(v);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

// Embeds texts through the remote service, splitting into batches of at
// most cfg.max_batch and keeping no more than cfg.max_in_flight requests
// outstanding. Results are reassembled in input order.
inline std::vector<Vec> remote_embed(const std::vector<std::string>& texts,
                                     const EmbeddingConfig& cfg) {
  cfg.validate();
  if (texts.empty()) return {};

  const std::size_t batch = cfg.max_batch;
  const std::size_t n_batches = (texts.size() + batch - 1) / batch;
  std::vector<std::vector<Vec>> results(n_batches);

  const unsigned window = std::max(1u, cfg.max_in_flight);
  std::size_t launched = 0;
  std::vector<std::pair<std::size_t, std::future<std::vector<Vec>>>> in_flight;
  auto launch_next = [&]() {
    const std::size_t bi = launched++;
    const std::size_t lo = bi * batch;
    const std::size_t hi = std::min(lo + batch, texts.size());
    std::vector<std::string> slice(texts.begin() + lo, texts.begin() + hi);
    in_flight.emplace_back(bi, std::async(std::launch::async, [slice = std::move(slice),
                                                               &cfg]() {
                             return detail::remote_embed_one_batch(slice, cfg);
                           }));
  };
  while (launched < n_batches || !in_flight.empty()) {
    while (launched < n_batches && in_flight.size() < window) launch_next();
    auto [bi, fut] = std::move(in_flight.front());
    in_flight.erase(in_flight.begin());
    results[bi] = fut.get();  // propagates Provider/Protocol errors
  }

  std::vector<Vec> out;
  out.reserve(texts.size());
  for (auto& r : results)
    for (auto& v : r) out.push_back(std::move(v));
  return out;
}

inline std::vector<Vec> remote_embed(const std::vector<std::string>& texts,
                                     const std::string& endpoint) {
  EmbeddingConfig cfg;
  cfg.provider = EmbeddingProviderKind::remote;
  cfg.endpoint = endpoint;
  return remote_embed(texts, cfg);
}

class RemoteEmbedder final : public TextEmbedder {
public:
  explicit RemoteEmbedder(EmbeddingConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
  }

  std::vector<Vec> embed_batch(const std::vector<std::string>& texts) override {
    return remote_embed(texts, cfg_);
  }

  std::size_t dim() const override { return cfg_.dim; }

private:
  EmbeddingConfig cfg_;
};

// Builds the provider selected by the config.
inline std::unique_ptr<TextEmbedder> make_embedder(const EmbeddingConfig& cfg) {
  cfg.validate();
  if (cfg.provider == EmbeddingProviderKind::remote)
    return std::make_unique<RemoteEmbedder>(cfg);
  return std::make_unique<HashedNgramEmbedder>(cfg);
}

}  // namespace mmdedup
