#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swipeauth/classifier.hpp"
#include "swipeauth/ingest.hpp"

namespace swipeauth {

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Sweeps candidate thresholds over the score values and their midpoints.
// FRR(t) = fraction of genuine > t, FAR(t) = fraction of impostor <= t;
// returns the t minimizing |FAR - FRR| (ties to the smaller t) and
// eer = (FAR + FRR) / 2 there.
EerResult compute_eer(const std::vector<double>& genuine,
                      const std::vector<double>& impostor);

struct Protocol {
  std::vector<Context> train_contexts;  // sorted unique
  Context test_context = Context::S1_ReadSit;
  FeatureSet feature_set = FeatureSet::Fusion;
  int top_k = 40;
  int w = 25;
  int m = 4;
  int k = 3;
  std::uint64_t seed = 1;
};

struct UserEval {
  std::string user;
  double eer = 0.0;
  double threshold = 0.0;
  int percentile_i = 100;
  std::size_t n_genuine_windows = 0;
  std::size_t n_impostor_windows = 0;
};

struct EvalReport {
  Protocol protocol;
  std::vector<UserEval> per_user;
  std::vector<std::string> skipped_users;
  double mean_eer = 0.0;
  double std_eer = 0.0;  // population std across users
};

// Pre-extracted per-swipe features for a whole dataset, chronological per
// (user, context, session).
struct SwipeRow {
  std::string user;
  Context context = Context::S1_ReadSit;
  int session_index = 1;
  std::int64_t t_start = 0;
  std::vector<double> values;  // 211
};

struct FeatureTable {
  std::vector<SwipeRow> rows;
};

FeatureTable build_feature_table(
    const Dataset& ds, std::optional<DirectionClass> keep = std::nullopt);

// Sessions 1-2 train, 3-4 test; impostors are all other users' swipes in
// the same context set. One model per user, per-user EER on window
// statistics.
EvalReport run_protocol(const FeatureTable& table, const Protocol& protocol,
                        int workers = 1);

// Trains the full per-user model for one user of the table and calibrates
// its threshold at the given percentile (CLI `train` path).
UserModel train_user_model(const FeatureTable& table, const std::string& user,
                           const Protocol& protocol, double percentile_i);

// 4 scenarios x {context-specific, general} x 3 feature sets = 24 reports.
std::vector<EvalReport> run_table1(const FeatureTable& table,
                                   std::uint64_t seed, int k, int workers);

// The 8 cross-scenario train/test pairs x 3 feature sets = 24 reports.
std::vector<EvalReport> run_table2(const FeatureTable& table,
                                   std::uint64_t seed, int k, int workers);

// S3/S3 Touch, all swipes vs. vertical-only (train and test filtered).
std::pair<EvalReport, EvalReport> run_direction_ablation(const Dataset& ds,
                                                         std::uint64_t seed,
                                                         int k, int workers);

struct PcaEllipse {
  Point2 centroid;
  Point2 axis1, axis2;   // unit eigen-axes of the 2-D covariance
  double len1 = 0.0, len2 = 0.0;  // sqrt eigenvalues
  double weight = 0.0;
};

struct PcaGroup {
  std::string label;
  std::vector<Point2> points;
  std::vector<PcaEllipse> components;
};

struct PcaExport {
  double eigval1 = 0.0, eigval2 = 0.0;
  std::vector<PcaGroup> groups;
};

// Mean-centers the pooled channel block, projects onto the top-2
// eigenvectors of the population covariance (first nonzero loading positive)
// and fits a Gmm2D per context group.
PcaExport export_pca_gmm(
    const FeatureTable& table, Channel channel,
    const std::vector<std::pair<std::string, std::vector<Context>>>& groups,
    int k, std::uint64_t seed);

}  // namespace swipeauth
