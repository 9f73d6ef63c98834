#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "swipeauth/features.hpp"
#include "swipeauth/ranking.hpp"

namespace swipeauth {

struct Point2 {
  double x = 0.0, y = 0.0;
};

// Eigendecomposition of the symmetric matrix [[a, b], [b, c]], l1 >= l2.
struct SymEig2 {
  double l1, l2;
  double v1x, v1y;  // unit eigenvector for l1
  double v2x, v2y;
};
SymEig2 sym_eig2(double a, double b, double c);

struct GmmComponent {
  double mx = 0.0, my = 0.0;
  double cxx = 1.0, cxy = 0.0, cyy = 1.0;  // symmetric covariance
  double weight = 1.0;
};

struct Gmm2D {
  std::vector<GmmComponent> comps;
  std::vector<double> ll_trace;  // mean log-likelihood per EM iteration
};

struct EmSettings {
  int max_iters = 100;
  double rel_tol = 1e-6;    // relative log-likelihood gain stop
  double cov_floor = 1e-6;  // covariance eigenvalue floor
};

// EM with k-means++-style seeding; deterministic for a fixed seed.
Gmm2D fit_gmm(const std::vector<Point2>& pts, int k, std::uint64_t seed,
              const EmSettings& em = {});

// Minimum Euclidean distance from p to the mixture's centroids.
double min_centroid_distance(const Gmm2D& g, Point2 p);

// One mixture per feature pair, fitted on genuine data only; per-pair seed
// is seed + pair index.
std::vector<Gmm2D> train_ensemble(const Matrix& genuine_norm,
                                  const std::vector<std::pair<int, int>>& pairs,
                                  int k, std::uint64_t seed,
                                  const EmSettings& em = {});

// Nearest-rank percentile of the genuine training distance sums:
// sorted(D_G)[ceil(i/100 * n) - 1].
double calibrate_threshold(std::vector<double> d_g, double percentile_i);

// Mean of the min(m, |C|) smallest values of C.
double window_statistic(const std::vector<double>& c, int m = 4);

// Sliding windows of length w, stride 1; a single shorter window if fewer
// than w scores are available. Returns the per-window statistics.
std::vector<double> stream_window_stats(const std::vector<double>& scores,
                                        int w = 25, int m = 4);

struct UserModel {
  std::string user;
  std::vector<Context> contexts;  // training contexts
  FeatureSet feature_set = FeatureSet::Fusion;
  std::vector<int> columns;  // global catalog indices of the restricted set
  Normalizer normalizer;     // over `columns`, same order
  std::vector<int> ranked;   // top_k entries, local indices into `columns`
  std::vector<std::pair<int, int>> pairs;  // local indices
  std::vector<Gmm2D> gmms;
  double threshold = 0.0;
  int percentile_i = 100;
  int k = 3;
  std::uint64_t seed = 0;
  EmSettings em;
};

// Distance sum D over all pair-classifiers for a restricted, normalized row.
double score_normalized(const UserModel& m, const std::vector<double>& row);

// Restricts a full 211-value vector to the model columns, normalizes and
// scores it.
double score_raw(const UserModel& m, const std::vector<double>& full_row);

bool decide_genuine(const UserModel& m, double statistic);

// Versioned JSON persistence; round trips are bit-exact.
std::string model_to_json(const UserModel& m);
UserModel model_from_json(const std::string& text);
void save_model(const UserModel& m, const std::string& path);
UserModel load_model(const std::string& path);

}  // namespace swipeauth
