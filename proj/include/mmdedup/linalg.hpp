#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "mmdedup/errors.hpp"

// Self-contained numerical kernels: dense row-major matrices, cosine
// similarity, and PCA backed by a symmetric eigensolver (Householder
// tridiagonalization + implicit-shift QL). At this project's scale the
// covariance never exceeds 768x768, so a direct dense decomposition is
// both fast enough and easy to verify against an independent oracle.

namespace mmdedup {

using Vec = std::vector<double>;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  Vec row_vec(std::size_t r) const {
    return Vec(row(r), row(r) + cols);
  }
};

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const double* a, std::size_t n) {
  return std::sqrt(dot(a, a, n));
}

inline constexpr double kZeroNormEps = 1e-12;

// Cosine similarity with a defined-zero policy: if either vector has norm
// below kZeroNormEps the result is 0, so degenerate records flow through
// scoring as "no evidence" instead of NaN.
inline double cosine(const double* a, const double* b, std::size_t n) {
  const double na = norm(a, n);
  const double nb = norm(b, n);
  if (na < kZeroNormEps || nb < kZeroNormEps) return 0.0;
  return dot(a, b, n) / (na * nb);
}

inline double cosine(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw ShapeError("cosine: vector lengths differ (" +
                     std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  return cosine(a.data(), b.data(), a.size());
}

// L2-normalizes in place; all-zero vectors stay zero.
inline void normalize_l2(double* a, std::size_t n) {
  const double m = norm(a, n);
  if (m < kZeroNormEps) return;
  for (std::size_t i = 0; i < n; ++i) a[i] /= m;
}

inline void normalize_l2(Vec& a) { normalize_l2(a.data(), a.size()); }

namespace detail {

// Householder reduction of a real symmetric matrix to tridiagonal form.
// On exit `a` holds the accumulated orthogonal transform Q, `d` the
// diagonal and `e` the subdiagonal (e[0] unused).
inline void tridiagonalize(Matrix& a, Vec& d, Vec& e) {
  const std::size_t n = a.rows;
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (i > 1) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(a.at(i, k));
      if (scale == 0.0) {
        e[i] = a.at(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a.at(i, k) /= scale;
          h += a.at(i, k) * a.at(i, k);
        }
        double f = a.at(i, l);
        double g = (f >= 0.0 ? -std::sqrt(h) : std::sqrt(h));
        e[i] = scale * g;
        h -= f * g;
        a.at(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          a.at(j, i) = a.at(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += a.at(j, k) * a.at(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += a.at(k, j) * a.at(i, k);
          e[j] = g / h;
          f += e[j] * a.at(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = a.at(i, j);
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k)
            a.at(j, k) -= f * e[k] + g * a.at(i, k);
        }
      }
    } else {
      e[i] = a.at(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += a.at(i, k) * a.at(k, j);
        for (std::size_t k = 0; k < i; ++k) a.at(k, j) -= g * a.at(k, i);
      }
    }
    d[i] = a.at(i, i);
    a.at(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      a.at(j, i) = 0.0;
      a.at(i, j) = 0.0;
    }
  }
}

inline double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Implicit-shift QL on a tridiagonal matrix; eigenvectors accumulate in
// the columns of `z` (which must enter holding the tridiagonalizing Q).
inline void ql_implicit(Vec& d, Vec& e, Matrix& z) {
  const std::size_t n = d.size();
  if (n == 0) return;
  constexpr double eps = 2.220446049250313e-16;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  // Absolute deflation floor: rank-deficient inputs leave long runs where
  // diagonal and off-diagonal entries are both rounding noise, and a purely
  // relative test never fires there.
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max(scale, std::fabs(d[i]) + std::fabs(e[i]));
  const double tiny = eps * scale;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd + tiny) break;
      }
      if (m != l) {
        if (++iter == 60)
          throw Error("symmetric QL eigensolver failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            // Recover from an underflowed off-diagonal and restart.
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z.at(k, i + 1);
            z.at(k, i + 1) = s * z.at(k, i) + c * f;
            z.at(k, i) = c * z.at(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

// Full eigendecomposition of a symmetric matrix. Returns eigenvalues in
// descending order with matching orthonormal eigenvectors as matrix rows.
struct SymmetricEigen {
  Vec values;
  Matrix vectors;  // row i is the eigenvector for values[i]
};

inline SymmetricEigen eigen_symmetric(const Matrix& m) {
  if (m.rows != m.cols) throw ShapeError("eigen_symmetric: matrix not square");
  const std::size_t n = m.rows;
  Matrix q = m;
  Vec d, e;
  detail::tridiagonalize(q, d, e);
  detail::ql_implicit(d, e, q);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = d[order[i]];
    for (std::size_t k = 0; k < n; ++k) out.vectors.at(i, k) = q.at(k, order[i]);
  }
  return out;
}

struct PcaModel {
  Vec mean;                 // input-space mean, length d
  Matrix components;        // k x d, orthonormal rows, descending variance
  Vec explained_variance;   // length k, non-negative, non-increasing
  bool degenerate = false;  // true when the input had no variance at all

  std::size_t input_dim() const { return mean.size(); }
  std::size_t output_dim() const { return components.rows; }
};

struct PcaConfig {
  std::size_t text_dim = 64;
  std::size_t device_dim = 16;
};

namespace detail {

// Flips each component so its largest-magnitude entry is positive; ties go
// to the first such entry. Keeps golden files stable across platforms.
inline void fix_component_signs(Matrix& components) {
  for (std::size_t r = 0; r < components.rows; ++r) {
    double* row = components.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < components.cols; ++c)
      if (std::fabs(row[c]) > std::fabs(row[best])) best = c;
    if (row[best] < 0.0)
      for (std::size_t c = 0; c < components.cols; ++c) row[c] = -row[c];
  }
}

}  // namespace detail

// Fits PCA on the rows of `samples`: mean-centering, covariance with
// divisor n-1, top-k eigenpairs. k is clamped to min(k, d, n-1); with fewer
// samples than dimensions it is further clamped to the numerical rank.
inline PcaModel pca_fit(const Matrix& samples, std::size_t k) {
  const std::size_t n = samples.rows;
  const std::size_t d = samples.cols;
  if (n < 2)
    throw ConfigError("pca_fit requires at least 2 samples, got " + std::to_string(n));
  if (k < 1) throw ConfigError("pca_fit requires k >= 1");
  k = std::min({k, d, n - 1});

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = samples.row(r);
    for (std::size_t c = 0; c < d; ++c) model.mean[c] += row[c];
  }
  for (std::size_t c = 0; c < d; ++c) model.mean[c] /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      centered.at(r, c) = samples.at(r, c) - model.mean[c];

  if (d > n) {
    // Snapshot route: the n x n Gram matrix X X^T / (n - 1) shares the
    // covariance's nonzero spectrum and stays well conditioned where the
    // d x d covariance (rank <= n - 1) would drown the eigensolver in a
    // numerically zero subspace. Components map back as X^T u / sqrt((n-1) l).
    Matrix gram(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) {
        const double s =
            dot(centered.row(a), centered.row(b), d) / static_cast<double>(n - 1);
        gram.at(a, b) = s;
        gram.at(b, a) = s;
      }

    double trace = 0.0;
    for (std::size_t a = 0; a < n; ++a) trace += gram.at(a, a);
    if (trace <= 1e-12) {
      model.degenerate = true;
      model.components = Matrix(k, d);
      model.explained_variance.assign(k, 0.0);
      return model;
    }

    const SymmetricEigen eig = eigen_symmetric(gram);
    // Eigenpairs at rounding-noise scale have no well-defined direction to
    // map back; cut at the numerical rank instead.
    std::size_t kept = 0;
    while (kept < k && eig.values[kept] > eig.values[0] * 1e-12) ++kept;

    model.components = Matrix(kept, d);
    model.explained_variance.resize(kept);
    for (std::size_t i = 0; i < kept; ++i) {
      model.explained_variance[i] = eig.values[i];
      const double inv =
          1.0 / std::sqrt(static_cast<double>(n - 1) * eig.values[i]);
      for (std::size_t c = 0; c < d; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r)
          s += centered.at(r, c) * eig.vectors.at(i, r);
        model.components.at(i, c) = s * inv;
      }
    }
    detail::fix_component_signs(model.components);
    return model;
  }

  // Upper triangle of X^T X / (n - 1), mirrored.
  Matrix cov(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r)
        s += centered.at(r, a) * centered.at(r, b);
      s /= static_cast<double>(n - 1);
      cov.at(a, b) = s;
      cov.at(b, a) = s;
    }
  }

  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) trace += cov.at(a, a);
  if (trace <= 1e-12) {
    model.degenerate = true;
    model.components = Matrix(k, d);
    model.explained_variance.assign(k, 0.0);
    return model;
  }

  SymmetricEigen eig = eigen_symmetric(cov);
  model.components = Matrix(k, d);
  model.explained_variance.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    model.explained_variance[i] = std::max(0.0, eig.values[i]);
    for (std::size_t c = 0; c < d; ++c)
      model.components.at(i, c) = eig.vectors.at(i, c);
  }
  detail::fix_component_signs(model.components);
  return model;
}

// Projects samples onto the fitted components: (x - mean) . components^T.
inline Matrix pca_transform(const PcaModel& model, const Matrix& samples) {
  const std::size_t d = model.input_dim();
  const std::size_t k = model.output_dim();
  if (samples.cols != d)
    throw ShapeError("pca_transform: sample dim " + std::to_string(samples.cols) +
                     " does not match model dim " + std::to_string(d));
  Matrix out(samples.rows, k);
  if (model.degenerate) return out;
  Vec centered(d);
  for (std::size_t r = 0; r < samples.rows; ++r) {
    const double* row = samples.row(r);
    for (std::size_t c = 0; c < d; ++c) centered[c] = row[c] - model.mean[c];
    for (std::size_t i = 0; i < k; ++i)
      out.at(r, i) = dot(centered.data(), model.components.row(i), d);
  }
  return out;
}

}  // namespace mmdedup
