#include "swipeauth/ranking.hpp"

#include <algorithm>
#include <cmath>

namespace swipeauth {

namespace {

double percentile_sorted(const std::vector<double>& v, double p) {
  const std::size_t n = v.size();
  if (n == 1) return v[0];
  double r = p / 100.0 * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(std::floor(r));
  if (lo + 1 >= n) return v[n - 1];
  double frac = r - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace

Normalizer fit_normalizer(const Matrix& pool) {
  if (pool.empty()) throw EmptyStream();
  const std::size_t cols = pool.front().size();
  Normalizer nz;
  nz.lo.assign(cols, 0.0);
  nz.hi.assign(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double lo = pool[0][c], hi = pool[0][c];
    for (const auto& row : pool) {
      lo = std::min(lo, row[c]);
      hi = std::max(hi, row[c]);
    }
    nz.lo[c] = lo;
    nz.hi[c] = hi;
  }
  return nz;
}

double normalize_value(const Normalizer& nz, std::size_t col, double v) {
  double lo = nz.lo[col], hi = nz.hi[col];
  if (hi <= lo) return 0.0;
  double u = (v - lo) / (hi - lo);
  return std::min(1.0, std::max(0.0, u));
}

std::vector<double> apply_normalizer(const Normalizer& nz,
                                     const std::vector<double>& row) {
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c)
    out[c] = normalize_value(nz, c, row[c]);
  return out;
}

Matrix apply_normalizer(const Normalizer& nz, const Matrix& m) {
  Matrix out;
  out.reserve(m.size());
  for (const auto& row : m) out.push_back(apply_normalizer(nz, row));
  return out;
}

double trimmed_mean(const std::vector<double>& values) {
  if (values.empty()) throw EmptyStream();
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double q1 = percentile_sorted(sorted, 25.0);
  double q3 = percentile_sorted(sorted, 75.0);
  double iqr = q3 - q1;
  double lo = q1 - 1.5 * iqr, hi = q3 + 1.5 * iqr;
  double sum = 0.0;
  std::size_t kept = 0;
  for (double v : sorted) {
    if (v >= lo && v <= hi) {
      sum += v;
      ++kept;
    }
  }
  if (kept == 0) return percentile_sorted(sorted, 50.0);
  return sum / static_cast<double>(kept);
}

std::vector<RankEntry> rank_features(const Matrix& genuine,
                                     const Matrix& impostor) {
  if (genuine.empty() || impostor.empty()) throw EmptyStream();
  const std::size_t cols = genuine.front().size();
  std::vector<RankEntry> out;
  out.reserve(cols);
  std::vector<double> gcol(genuine.size()), icol(impostor.size());
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < genuine.size(); ++r) gcol[r] = genuine[r][c];
    for (std::size_t r = 0; r < impostor.size(); ++r) icol[r] = impostor[r][c];
    double mg = trimmed_mean(gcol);
    double mi = trimmed_mean(icol);
    double score = std::abs(mg - mi) / std::max(mg, kRankEps);
    out.push_back({static_cast<int>(c), score});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.feature < b.feature;
  });
  return out;
}

std::vector<std::pair<int, int>> select_pairs(
    const std::vector<RankEntry>& ranked, int top_k) {
  if (static_cast<int>(ranked.size()) < top_k)
    throw InsufficientFeatures("ranked list shorter than top_k");
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < top_k; ++i)
    pairs.emplace_back(ranked[i].feature, ranked[i + 1].feature);
  return pairs;
}

}  // namespace swipeauth
