#pragma once

#include <utility>
#include <vector>

#include "swipeauth/core.hpp"

namespace swipeauth {

using Matrix = std::vector<std::vector<double>>;  // row major, equal widths

inline constexpr double kRankEps = 1e-6;
inline constexpr int kDefaultTopK = 40;

// Per-column min/max bounds learned from a training pool.
struct Normalizer {
  std::vector<double> lo, hi;
};

Normalizer fit_normalizer(const Matrix& pool);

// Maps into [0,1]; unseen values clamp, constant columns map to 0.
double normalize_value(const Normalizer& nz, std::size_t col, double v);
std::vector<double> apply_normalizer(const Normalizer& nz,
                                     const std::vector<double>& row);
Matrix apply_normalizer(const Normalizer& nz, const Matrix& m);

// Mean after dropping points outside the Tukey fences
// [Q1 - 1.5 IQR, Q3 + 1.5 IQR]; falls back to the median if everything is
// trimmed away.
double trimmed_mean(const std::vector<double>& values);

struct RankEntry {
  int feature;   // column index within the ranked matrices
  double score;  // |m_G - m_I| / max(m_G, eps), trimmed means
};

// Ranks every column, descending score, ties by ascending column index.
// Both matrices must already be normalized by a shared Normalizer.
std::vector<RankEntry> rank_features(const Matrix& genuine,
                                     const Matrix& impostor);

// Consecutive pairs over the top_k ranked features (top_k - 1 pairs).
std::vector<std::pair<int, int>> select_pairs(
    const std::vector<RankEntry>& ranked, int top_k = kDefaultTopK);

}  // namespace swipeauth
