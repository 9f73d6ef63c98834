#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "swipeauth/eval.hpp"
#include "swipeauth/rng.hpp"

using namespace swipeauth;

namespace {

// Brute force reference: try every distinct value and midpoint plus a point
// below the minimum, recompute the rates directly.
EerResult brute_force_eer(const std::vector<double>& genuine,
                          const std::vector<double>& impostor) {
  std::vector<double> all = genuine;
  all.insert(all.end(), impostor.begin(), impostor.end());
  std::sort(all.begin(), all.end());
  std::vector<double> cands = {all.front() - 1.0};
  for (std::size_t i = 0; i < all.size(); ++i) {
    cands.push_back(all[i]);
    if (i + 1 < all.size()) cands.push_back((all[i] + all[i + 1]) / 2.0);
  }
  EerResult best;
  double best_gap = 1e300;
  for (double t : cands) {
    double frr = 0, far = 0;
    for (double g : genuine) frr += g > t ? 1.0 : 0.0;
    for (double i : impostor) far += i <= t ? 1.0 : 0.0;
    frr /= static_cast<double>(genuine.size());
    far /= static_cast<double>(impostor.size());
    double gap = std::abs(far - frr);
    if (gap < best_gap || (gap == best_gap && t < best.threshold)) {
      best_gap = gap;
      best.threshold = t;
      best.eer = (far + frr) / 2.0;
    }
  }
  return best;
}

FeatureTable tiny_two_user_table(std::uint64_t seed, int swipes_per_session = 30) {
  SynthConfig cfg;
  cfg.n_users = 3;
  cfg.swipes_per_session = swipes_per_session;
  cfg.contexts = {Context::S1_ReadSit};
  cfg.rng_seed = seed;
  cfg.user_separation = 2.0;
  return build_feature_table(generate_synthetic(cfg));
}

}  // namespace

TEST_CASE("EER on a known overlapping pair of score sets") {
  std::vector<double> genuine = {0.1, 0.2, 0.3};
  std::vector<double> impostor = {0.25, 0.35, 0.45};
  auto r = compute_eer(genuine, impostor);
  CHECK(r.eer == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("EER is 0 for disjoint scores and 0.5 for identical ones") {
  auto r0 = compute_eer({1, 2, 3}, {10, 11, 12});
  CHECK(r0.eer == doctest::Approx(0.0));
  auto r5 = compute_eer({1, 2, 3}, {1, 2, 3});
  CHECK(r5.eer == doctest::Approx(0.5));
}

TEST_CASE("EER rejects empty inputs") {
  CHECK_THROWS_AS(compute_eer({}, {1.0}), EmptyScores);
  CHECK_THROWS_AS(compute_eer({1.0}, {}), EmptyScores);
}

TEST_CASE("EER matches the brute-force sweep on random instances") {
  Rng rng(97);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> g, i;
    int ng = 1 + static_cast<int>(rng.uniform_int(0, 30));
    int ni = 1 + static_cast<int>(rng.uniform_int(0, 30));
    for (int j = 0; j < ng; ++j) g.push_back(rng.normal(0, 1));
    for (int j = 0; j < ni; ++j) i.push_back(rng.normal(0.8, 1));
    if (trial % 3 == 0) {
      // duplicate-heavy instances
      for (auto& v : g) v = std::floor(v * 2) / 2;
      for (auto& v : i) v = std::floor(v * 2) / 2;
    }
    auto fast = compute_eer(g, i);
    auto slow = brute_force_eer(g, i);
    CHECK(fast.eer == doctest::Approx(slow.eer).epsilon(1e-12));
    CHECK(fast.threshold == doctest::Approx(slow.threshold).epsilon(1e-12));
  }
}

TEST_CASE("EER stays within [0, 1] and separation drives it to zero") {
  std::vector<double> g, i;
  Rng rng(13);
  for (int j = 0; j < 50; ++j) {
    g.push_back(rng.normal(0, 0.1));
    i.push_back(rng.normal(100, 0.1));
  }
  auto r = compute_eer(g, i);
  CHECK(r.eer == 0.0);
  // ties on |FAR - FRR| resolve to the smallest candidate: max genuine score
  CHECK(r.threshold == doctest::Approx(*std::max_element(g.begin(), g.end())));
  CHECK(r.threshold < 99.0);
}

TEST_CASE("feature table rows are grouped and chronological") {
  auto table = tiny_two_user_table(3);
  REQUIRE(!table.rows.empty());
  for (const auto& row : table.rows) CHECK(row.values.size() == 211);
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const auto& a = table.rows[i - 1];
    const auto& b = table.rows[i];
    bool same_seq = a.user == b.user && a.context == b.context &&
                    a.session_index == b.session_index;
    if (same_seq) CHECK(a.t_start < b.t_start);
  }
}

TEST_CASE("direction filter drops rows") {
  SynthConfig cfg;
  cfg.n_users = 2;
  cfg.swipes_per_session = 30;
  cfg.contexts = {Context::S3_MapSit};  // mixed directions
  auto ds = generate_synthetic(cfg);
  auto all = build_feature_table(ds);
  auto vertical = build_feature_table(ds, DirectionClass::Vertical);
  auto horizontal = build_feature_table(ds, DirectionClass::Horizontal);
  CHECK(vertical.rows.size() + horizontal.rows.size() == all.rows.size());
  CHECK(vertical.rows.size() < all.rows.size());
  CHECK(!horizontal.rows.empty());
}

TEST_CASE("run_protocol produces a per-user report with coherent aggregates") {
  auto table = tiny_two_user_table(5);
  Protocol p;
  p.train_contexts = {Context::S1_ReadSit};
  p.test_context = Context::S1_ReadSit;
  p.feature_set = FeatureSet::Touch;
  auto report = run_protocol(table, p);
  REQUIRE(report.per_user.size() == 3);
  CHECK(report.skipped_users.empty());
  double mean = 0;
  for (const auto& ue : report.per_user) {
    CHECK(ue.eer >= 0.0);
    CHECK(ue.eer <= 1.0);
    CHECK(ue.n_genuine_windows > 0);
    CHECK(ue.n_impostor_windows > 0);
    CHECK(ue.percentile_i >= 50);
    CHECK(ue.percentile_i <= 100);
    mean += ue.eer;
  }
  mean /= static_cast<double>(report.per_user.size());
  CHECK(report.mean_eer == doctest::Approx(mean).epsilon(1e-12));
  double var = 0;
  for (const auto& ue : report.per_user) var += (ue.eer - mean) * (ue.eer - mean);
  CHECK(report.std_eer ==
        doctest::Approx(std::sqrt(var / static_cast<double>(report.per_user.size())))
            .epsilon(1e-12));
}

TEST_CASE("run_protocol is independent of the worker count") {
  auto table = tiny_two_user_table(7);
  Protocol p;
  p.train_contexts = {Context::S1_ReadSit};
  p.test_context = Context::S1_ReadSit;
  p.feature_set = FeatureSet::Fusion;
  auto a = run_protocol(table, p, 1);
  auto b = run_protocol(table, p, 4);
  REQUIRE(a.per_user.size() == b.per_user.size());
  for (std::size_t i = 0; i < a.per_user.size(); ++i) {
    CHECK(a.per_user[i].user == b.per_user[i].user);
    CHECK(a.per_user[i].eer == b.per_user[i].eer);
    CHECK(a.per_user[i].threshold == b.per_user[i].threshold);
  }
  CHECK(a.mean_eer == b.mean_eer);
}

TEST_CASE("train_user_model produces a usable persisted model") {
  auto table = tiny_two_user_table(9);
  Protocol p;
  p.train_contexts = {Context::S1_ReadSit};
  p.test_context = Context::S1_ReadSit;
  p.feature_set = FeatureSet::Touch;
  auto m = train_user_model(table, "u001", p, 95);
  CHECK(m.user == "u001");
  CHECK(m.columns.size() == 117);
  CHECK(m.ranked.size() == 40);
  CHECK(m.pairs.size() == 39);
  CHECK(m.gmms.size() == 39);
  CHECK(m.threshold > 0.0);
  auto text = model_to_json(m);
  auto back = model_from_json(text);
  for (const auto& row : table.rows) {
    if (row.user != "u001") continue;
    CHECK(score_raw(back, row.values) == score_raw(m, row.values));
  }
}

TEST_CASE("table 1 produces 24 reports in the frozen order") {
  SynthConfig cfg;
  cfg.n_users = 3;
  cfg.swipes_per_session = 25;
  cfg.rng_seed = 11;
  auto table = build_feature_table(generate_synthetic(cfg));
  auto reports = run_table1(table, 1, 3, 4);
  REQUIRE(reports.size() == 24);
  // 4 scenarios x (specific, general) x 3 feature sets
  for (int s = 0; s < 4; ++s) {
    for (int mode = 0; mode < 2; ++mode) {
      for (int f = 0; f < 3; ++f) {
        const auto& r = reports[static_cast<std::size_t>((s * 2 + mode) * 3 + f)];
        CHECK(static_cast<int>(r.protocol.test_context) == s);
        if (mode == 0)
          CHECK(r.protocol.train_contexts ==
                std::vector<Context>{static_cast<Context>(s)});
        else
          CHECK(r.protocol.train_contexts.size() == 4);
      }
    }
  }
}

TEST_CASE("table 2 produces the 8 cross pairs x 3 feature sets") {
  SynthConfig cfg;
  cfg.n_users = 3;
  cfg.swipes_per_session = 25;
  cfg.rng_seed = 17;
  auto table = build_feature_table(generate_synthetic(cfg));
  auto reports = run_table2(table, 1, 3, 4);
  REQUIRE(reports.size() == 24);
  for (const auto& r : reports) {
    REQUIRE(r.protocol.train_contexts.size() == 1);
    CHECK(r.protocol.train_contexts[0] != r.protocol.test_context);
  }
}

TEST_CASE("direction ablation requires scenario 3 data") {
  SynthConfig cfg;
  cfg.n_users = 2;
  cfg.swipes_per_session = 25;
  cfg.contexts = {Context::S1_ReadSit};
  auto ds = generate_synthetic(cfg);
  CHECK_THROWS_AS(run_direction_ablation(ds, 1, 3, 1), InvalidConfig);
}

TEST_CASE("PCA on a rank-1 cloud explains everything with one axis") {
  // embed a line into the motion block of a synthetic table
  FeatureTable table;
  Rng rng(19);
  for (int i = 0; i < 60; ++i) {
    SwipeRow row;
    row.user = "u001";
    row.context = Context::S1_ReadSit;
    row.session_index = 1;
    row.t_start = i;
    row.values.assign(211, 0.0);
    double s = rng.normal(0, 1);
    for (int c = 117; c < 211; ++c)
      row.values[static_cast<std::size_t>(c)] = s * (c - 116);
    table.rows.push_back(row);
  }
  auto pca = export_pca_gmm(table, Channel::Motion,
                            {{"all", {Context::S1_ReadSit}}}, 1, 1);
  CHECK(pca.eigval1 > 0.0);
  CHECK(pca.eigval2 == doctest::Approx(0.0).epsilon(1e-9));
  REQUIRE(pca.groups.size() == 1);
  CHECK(pca.groups[0].points.size() == 60);
  for (const auto& p : pca.groups[0].points)
    CHECK(std::abs(p.y) < 1e-6 * std::max(1.0, std::abs(p.x)));
}

TEST_CASE("PCA eigenvalues match a power-iteration oracle on a small block") {
  // table whose touch block only uses 5 columns; everything else constant
  FeatureTable table;
  Rng rng(23);
  const int d = 5;
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 80; ++i) {
    SwipeRow row;
    row.user = "u001";
    row.context = Context::S1_ReadSit;
    row.session_index = 1;
    row.t_start = i;
    row.values.assign(211, 0.0);
    std::vector<double> v(d);
    double a = rng.normal(0, 2), b = rng.normal(0, 1);
    for (int c = 0; c < d; ++c) {
      v[static_cast<std::size_t>(c)] = a * (c + 1) + b * ((c % 2) ? 1.0 : -1.0) +
                                       0.01 * rng.normal();
      row.values[static_cast<std::size_t>(c)] = v[static_cast<std::size_t>(c)];
    }
    data.push_back(v);
    table.rows.push_back(row);
  }
  // independent covariance + power iteration with deflation
  std::vector<double> mean(d, 0.0);
  for (const auto& v : data)
    for (int c = 0; c < d; ++c) mean[static_cast<std::size_t>(c)] += v[static_cast<std::size_t>(c)];
  for (auto& m : mean) m /= static_cast<double>(data.size());
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& v : data)
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c)
        cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] +=
            (v[static_cast<std::size_t>(r)] - mean[static_cast<std::size_t>(r)]) *
            (v[static_cast<std::size_t>(c)] - mean[static_cast<std::size_t>(c)]);
  for (auto& rowv : cov)
    for (auto& x : rowv) x /= static_cast<double>(data.size());
  auto power_iter = [&](std::vector<std::vector<double>> m) {
    std::vector<double> v(static_cast<std::size_t>(d), 1.0 / std::sqrt(d));
    double lambda = 0.0;
    for (int it = 0; it < 5000; ++it) {
      std::vector<double> w(static_cast<std::size_t>(d), 0.0);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
          w[static_cast<std::size_t>(r)] += m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * v[static_cast<std::size_t>(c)];
      double norm = 0;
      for (double x : w) norm += x * x;
      norm = std::sqrt(norm);
      for (auto& x : w) x /= norm;
      lambda = norm;
      v = w;
    }
    return std::pair(lambda, v);
  };
  auto [l1, v1] = power_iter(cov);
  auto deflated = cov;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      deflated[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
          l1 * v1[static_cast<std::size_t>(r)] * v1[static_cast<std::size_t>(c)];
  auto [l2, v2] = power_iter(deflated);
  (void)v2;

  auto pca = export_pca_gmm(table, Channel::Touch,
                            {{"all", {Context::S1_ReadSit}}}, 1, 1);
  CHECK(pca.eigval1 == doctest::Approx(l1).epsilon(1e-8));
  CHECK(pca.eigval2 == doctest::Approx(l2).epsilon(1e-8));
}

TEST_CASE("PCA projection is invariant to translating the block") {
  auto table = tiny_two_user_table(29, 25);
  auto shifted = table;
  for (auto& row : shifted.rows)
    for (int c = 117; c < 211; ++c) row.values[static_cast<std::size_t>(c)] += 42.0;
  auto a = export_pca_gmm(table, Channel::Motion, {{"all", {Context::S1_ReadSit}}}, 1, 1);
  auto b = export_pca_gmm(shifted, Channel::Motion, {{"all", {Context::S1_ReadSit}}}, 1, 1);
  CHECK(a.eigval1 == doctest::Approx(b.eigval1).epsilon(1e-9));
  REQUIRE(a.groups[0].points.size() == b.groups[0].points.size());
  for (std::size_t i = 0; i < a.groups[0].points.size(); ++i) {
    CHECK(a.groups[0].points[i].x ==
          doctest::Approx(b.groups[0].points[i].x).epsilon(1e-6));
    CHECK(a.groups[0].points[i].y ==
          doctest::Approx(b.groups[0].points[i].y).epsilon(1e-6));
  }
}

TEST_CASE("PCA export rejects an empty selection") {
  FeatureTable empty;
  CHECK_THROWS_AS(export_pca_gmm(empty, Channel::Touch,
                                 {{"all", {Context::S1_ReadSit}}}, 1, 1),
                  DegenerateData);
}
