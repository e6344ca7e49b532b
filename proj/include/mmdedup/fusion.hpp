#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <thread>
#include <vector>

#include "mmdedup/errors.hpp"
#include "mmdedup/linalg.hpp"

// Late-fusion pair scoring across the three modalities plus DBSCAN
// clustering of the concatenated feature vectors.

namespace mmdedup {

struct FusionWeights {
  double w_text = 0.4;
  double w_behavior = 0.35;
  double w_device = 0.25;
  double threshold = 0.75;

  void validate() const {
    if (w_text < 0.0 || w_behavior < 0.0 || w_device < 0.0)
      throw ConfigError("fusion weights must be non-negative");
    if (std::fabs(w_text + w_behavior + w_device - 1.0) > 1e-9)
      throw ConfigError("fusion weights must sum to 1");
    if (threshold < 0.0 || threshold > 1.0)
      throw ConfigError("fusion threshold must lie in [0, 1]");
  }
};

struct ScoredPair {
  int i = 0;
  int j = 0;  // invariant: i < j
  double text_sim = 0.0;
  double behavior_sim = 0.0;
  double device_sim = 0.0;
  double fused = 0.0;
};

struct ScoreOptions {
  std::size_t chunk_size = 65536;  // pairs evaluated per batch
  unsigned workers = 1;
};

namespace detail {

// Maps a linear rank in [0, n*(n-1)/2) to the rank-th (i, j) pair in
// lexicographic order over the strict upper triangle.
inline std::pair<std::size_t, std::size_t> pair_from_rank(std::size_t rank, std::size_t n) {
  // Rows i = 0..n-2 hold (n-1-i) pairs; solve for the row via the
  // triangular-number formula, then nudge for rounding.
  const double nd = static_cast<double>(n);
  double x = (2.0 * nd - 1.0 - std::sqrt((2.0 * nd - 1.0) * (2.0 * nd - 1.0) -
                                         8.0 * static_cast<double>(rank))) / 2.0;
  std::size_t i = static_cast<std::size_t>(x);
  if (i >= n - 1) i = n - 2;
  auto row_start = [&](std::size_t r) { return r * n - r * (r + 1) / 2; };
  while (i > 0 && row_start(i) > rank) --i;
  while (row_start(i + 1) <= rank) ++i;
  const std::size_t j = i + 1 + (rank - row_start(i));
  return {i, j};
}

struct NormCache {
  std::vector<double> norms;

  explicit NormCache(const Matrix& m) : norms(m.rows) {
    for (std::size_t r = 0; r < m.rows; ++r) norms[r] = norm(m.row(r), m.cols);
  }

  double cos(const Matrix& m, std::size_t a, std::size_t b) const {
    if (norms[a] < kZeroNormEps || norms[b] < kZeroNormEps) return 0.0;
    return dot(m.row(a), m.row(b), m.cols) / (norms[a] * norms[b]);
  }
};

}  // namespace detail

// Evaluates every unordered pair in deterministic (i, j) order and hands
// emitted pairs (fused strictly above the threshold) to `sink` one chunk at
// a time. Peak memory is bounded by the chunk size, never by the full
// n*(n-1)/2 pair space. With workers > 1 chunks are scored in parallel and
// delivered to the sink in rank order.
template <typename Sink>
void score_pairs_visit(const Matrix& text, const Matrix& behavior, const Matrix& device,
                       const FusionWeights& w, const ScoreOptions& opt, Sink&& sink) {
  w.validate();
  const std::size_t n = text.rows;
  if (behavior.rows != n || device.rows != n)
    throw ShapeError("score_pairs: modality row counts differ");
  if (n < 2)
    throw ShapeError("score_pairs requires at least 2 records");
  if (opt.chunk_size == 0) throw ConfigError("score_pairs: chunk_size must be positive");

  const detail::NormCache tn(text), bn(behavior), dn(device);
  const std::size_t total = n * (n - 1) / 2;
  const std::size_t chunks = (total + opt.chunk_size - 1) / opt.chunk_size;

  auto score_chunk = [&](std::size_t ci, std::vector<ScoredPair>& out) {
    const std::size_t begin = ci * opt.chunk_size;
    const std::size_t end = std::min(begin + opt.chunk_size, total);
    auto [i, j] = detail::pair_from_rank(begin, n);
    for (std::size_t rank = begin; rank < end; ++rank) {
      const double t = tn.cos(text, i, j);
      const double b = bn.cos(behavior, i, j);
      const double d = dn.cos(device, i, j);
      const double fused = w.w_text * t + w.w_behavior * b + w.w_device * d;
      if (fused > w.threshold)
        out.push_back({static_cast<int>(i), static_cast<int>(j), t, b, d, fused});
      if (++j == n) {
        ++i;
        j = i + 1;
      }
    }
  };

  const unsigned workers = std::max(1u, opt.workers);
  if (workers == 1 || chunks <= 1) {
    std::vector<ScoredPair> buf;
    for (std::size_t ci = 0; ci < chunks; ++ci) {
      buf.clear();
      score_chunk(ci, buf);
      sink(static_cast<const std::vector<ScoredPair>&>(buf));
    }
    return;
  }

  // Parallel path: score chunks across threads, then deliver in rank order
  // so output is identical to the sequential walk.
  std::vector<std::vector<ScoredPair>> results(chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t ci = next.fetch_add(1);
      if (ci >= chunks) return;
      score_chunk(ci, results[ci]);
    }
  };
  std::vector<std::thread> pool;
  const unsigned spawn = std::min<std::size_t>(workers, chunks);
  pool.reserve(spawn);
  for (unsigned t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (std::size_t ci = 0; ci < chunks; ++ci)
    sink(static_cast<const std::vector<ScoredPair>&>(results[ci]));
}

inline std::vector<ScoredPair> score_pairs(const Matrix& text, const Matrix& behavior,
                                           const Matrix& device, const FusionWeights& w,
                                           const ScoreOptions& opt = {}) {
  std::vector<ScoredPair> out;
  score_pairs_visit(text, behavior, device, w, opt,
                    [&](const std::vector<ScoredPair>& chunk) {
                      out.insert(out.end(), chunk.begin(), chunk.end());
                    });
  return out;
}

// Scores one specific pair (used for reporting cluster-decided pairs).
inline ScoredPair score_single_pair(const Matrix& text, const Matrix& behavior,
                                    const Matrix& device, const FusionWeights& w,
                                    std::size_t i, std::size_t j) {
  const double t = cosine(text.row(i), text.row(j), text.cols);
  const double b = cosine(behavior.row(i), behavior.row(j), behavior.cols);
  const double d = cosine(device.row(i), device.row(j), device.cols);
  return {static_cast<int>(i), static_cast<int>(j), t, b, d,
          w.w_text * t + w.w_behavior * b + w.w_device * d};
}

// Per-record concatenation text || behavior || device. Each modality block
// is L2-normalized first (zero blocks stay zero) unless raw_concat is set,
// which reproduces the unnormalized concatenation where the widest block
// dominates Euclidean distance.
inline Matrix fuse_features(const Matrix& text, const Matrix& behavior, const Matrix& device,
                            bool raw_concat = false) {
  const std::size_t n = text.rows;
  if (behavior.rows != n || device.rows != n)
    throw ShapeError("fuse_features: modality row counts differ");
  Matrix out(n, text.cols + behavior.cols + device.cols);
  for (std::size_t r = 0; r < n; ++r) {
    double* dst = out.row(r);
    auto put = [&](const Matrix& m) {
      std::copy(m.row(r), m.row(r) + m.cols, dst);
      if (!raw_concat) normalize_l2(dst, m.cols);
      dst += m.cols;
    };
    put(text);
    put(behavior);
    put(device);
  }
  return out;
}

struct ClusterParams {
  double eps = 0.3;
  std::size_t min_samples = 2;

  void validate() const {
    if (eps <= 0.0) throw ConfigError("dbscan eps must be positive");
    if (min_samples < 1) throw ConfigError("dbscan min_samples must be >= 1");
  }
};

struct ClusterAssignment {
  std::vector<int> labels;  // -1 = noise; clusters numbered from 0

  std::size_t cluster_count() const {
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    return static_cast<std::size_t>(max_label + 1);
  }
};

// DBSCAN over Euclidean distance with the closed-ball convention (<= eps,
// the point itself counted). Clusters are connected components of core
// points under eps-reachability, numbered in order of their first core
// point by record index. Border points join the cluster of the lowest-index
// core point that reaches them; everything else is noise.
inline ClusterAssignment dbscan(const Matrix& points, const ClusterParams& p) {
  p.validate();
  const std::size_t n = points.rows;
  const std::size_t d = points.cols;
  const double eps_sq = p.eps * p.eps;

  auto within_eps = [&](std::size_t a, std::size_t b) {
    const double* pa = points.row(a);
    const double* pb = points.row(b);
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = pa[k] - pb[k];
      s += diff * diff;
      if (s > eps_sq) return false;
    }
    return true;
  };

  // Pass 1: core flags from closed-ball neighbor counts.
  std::vector<char> core(n, 0);
  std::vector<std::size_t> neighbor_count(n, 1);  // self counts
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (within_eps(i, j)) {
        ++neighbor_count[i];
        ++neighbor_count[j];
      }
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbor_count[i] >= p.min_samples;

  // Pass 2: label core components by BFS, in ascending index order.
  ClusterAssignment out;
  out.labels.assign(n, -1);
  int next_label = 0;
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || out.labels[i] != -1) continue;
    const int label = next_label++;
    out.labels[i] = label;
    queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (!core[v] || out.labels[v] != -1 || !within_eps(u, v)) continue;
        out.labels[v] = label;
        queue.push_back(v);
      }
    }
  }

  // Pass 3: border points take the cluster of the first core point (by
  // index) within reach.
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (std::size_t c = 0; c < n; ++c) {
      if (!core[c] || !within_eps(i, c)) continue;
      out.labels[i] = out.labels[c];
      break;
    }
  }
  return out;
}

// All within-cluster index pairs (noise excluded), i < j, sorted.
inline std::vector<std::pair<int, int>> cluster_pairs(const ClusterAssignment& assign) {
  std::vector<std::vector<int>> members;
  for (std::size_t i = 0; i < assign.labels.size(); ++i) {
    const int l = assign.labels[i];
    if (l < 0) continue;
    if (members.size() <= static_cast<std::size_t>(l))
      members.resize(static_cast<std::size_t>(l) + 1);
    members[static_cast<std::size_t>(l)].push_back(static_cast<int>(i));
  }
  std::vector<std::pair<int, int>> pairs;
  for (const auto& group : members)
    for (std::size_t a = 0; a < group.size(); ++a)
      for (std::size_t b = a + 1; b < group.size(); ++b)
        pairs.emplace_back(group[a], group[b]);
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace mmdedup
