#include "swipeauth/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>

#include "swipeauth/rng.hpp"

namespace swipeauth {

EerResult compute_eer(const std::vector<double>& genuine,
                      const std::vector<double>& impostor) {
  if (genuine.empty() || impostor.empty()) throw EmptyScores();
  std::vector<double> g = genuine, m = impostor;
  std::sort(g.begin(), g.end());
  std::sort(m.begin(), m.end());
  std::vector<double> all;
  all.reserve(g.size() + m.size());
  all.insert(all.end(), g.begin(), g.end());
  all.insert(all.end(), m.begin(), m.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> cands;
  cands.reserve(2 * all.size() + 1);
  cands.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i < all.size(); ++i) {
    cands.push_back(all[i]);
    if (i + 1 < all.size()) cands.push_back(0.5 * (all[i] + all[i + 1]));
  }

  const double ng = static_cast<double>(g.size());
  const double ni = static_cast<double>(m.size());
  EerResult best;
  double best_diff = 2.0;
  for (double t : cands) {  // ascending, so ties keep the smaller t
    double frr =
        static_cast<double>(g.end() - std::upper_bound(g.begin(), g.end(), t)) / ng;
    double far =
        static_cast<double>(std::upper_bound(m.begin(), m.end(), t) - m.begin()) / ni;
    double diff = std::abs(far - frr);
    if (diff < best_diff) {
      best_diff = diff;
      best.eer = 0.5 * (far + frr);
      best.threshold = t;
    }
  }
  return best;
}

FeatureTable build_feature_table(const Dataset& ds,
                                 std::optional<DirectionClass> keep) {
  FeatureTable table;
  for (const auto& ud : ds.users) {
    for (const auto& sd : ud.sessions) {
      auto swipes = segment_swipes(sd.touch);
      if (keep) swipes = filter_direction(swipes, *keep);
      attach_motion(swipes, sd.accel);
      for (const auto& sw : swipes) {
        SwipeRow row;
        row.user = ud.user;
        row.context = sd.id.context;
        row.session_index = sd.id.session_index;
        row.t_start = sw.t_start;
        row.values = extract(sw);
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

namespace {

std::vector<double> restrict_row(const std::vector<double>& v,
                                 const std::vector<int>& cols) {
  std::vector<double> out(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i)
    out[i] = v[static_cast<std::size_t>(cols[i])];
  return out;
}

bool in_contexts(Context c, const std::vector<Context>& set) {
  return std::find(set.begin(), set.end(), c) != set.end();
}

struct TrainedCore {
  Normalizer nz;
  std::vector<RankEntry> ranked;
  std::vector<std::pair<int, int>> pairs;
  std::vector<Gmm2D> gmms;
  std::vector<double> d_g;  // training distance sums, genuine user
};

UserModel to_model(const std::string& user, const Protocol& p,
                   const std::vector<int>& cols, const TrainedCore& core,
                   std::uint64_t user_seed) {
  UserModel m;
  m.user = user;
  m.contexts = p.train_contexts;
  m.feature_set = p.feature_set;
  m.columns = cols;
  m.normalizer = core.nz;
  for (int i = 0; i < p.top_k; ++i)
    m.ranked.push_back(core.ranked[static_cast<std::size_t>(i)].feature);
  m.pairs = core.pairs;
  m.gmms = core.gmms;
  m.k = p.k;
  m.seed = user_seed;
  return m;
}

// Ranking, ensemble and training distance sums for one user; returns false
// with a reason when the user lacks usable data.
bool train_core(const FeatureTable& table, const std::string& user,
                const Protocol& p, const std::vector<int>& cols,
                std::uint64_t user_seed, TrainedCore& core, std::string& why) {
  Matrix genuine, impostor;
  for (const auto& row : table.rows) {
    if (row.session_index > 2 || !in_contexts(row.context, p.train_contexts))
      continue;
    auto r = restrict_row(row.values, cols);
    if (row.user == user)
      genuine.push_back(std::move(r));
    else
      impostor.push_back(std::move(r));
  }
  if (static_cast<int>(genuine.size()) < std::max(p.k, 2)) {
    why = "too few genuine training swipes";
    return false;
  }
  if (impostor.empty()) {
    why = "no impostor training swipes";
    return false;
  }
  Matrix pool = genuine;
  pool.insert(pool.end(), impostor.begin(), impostor.end());
  core.nz = fit_normalizer(pool);
  Matrix gn = apply_normalizer(core.nz, genuine);
  Matrix in = apply_normalizer(core.nz, impostor);
  core.ranked = rank_features(gn, in);
  core.pairs = select_pairs(core.ranked, p.top_k);
  EmSettings em;
  core.gmms = train_ensemble(gn, core.pairs, p.k, user_seed, em);
  UserModel scorer;
  scorer.pairs = core.pairs;
  scorer.gmms = core.gmms;
  core.d_g.reserve(gn.size());
  for (const auto& row : gn) core.d_g.push_back(score_normalized(scorer, row));
  return true;
}

// Integer percentile in [50, 100] whose nearest-rank value of D_G is
// closest to the chosen threshold.
int back_derive_percentile(const std::vector<double>& d_g, double threshold) {
  int best_i = 100;
  double best_d = 1e300;
  for (int i = 50; i <= 100; ++i) {
    double v = calibrate_threshold(d_g, i);
    double d = std::abs(v - threshold);
    if (d < best_d) {
      best_d = d;
      best_i = i;
    }
  }
  return best_i;
}

std::vector<std::string> sorted_users(const FeatureTable& table) {
  std::set<std::string> s;
  for (const auto& row : table.rows) s.insert(row.user);
  return {s.begin(), s.end()};
}

std::uint64_t protocol_stream(const Protocol& p) {
  std::uint64_t mask = 0;
  for (Context c : p.train_contexts) mask |= 1ULL << static_cast<int>(c);
  return (mask << 6) | (static_cast<std::uint64_t>(p.test_context) << 3) |
         static_cast<std::uint64_t>(p.feature_set);
}

}  // namespace

UserModel train_user_model(const FeatureTable& table, const std::string& user,
                           const Protocol& protocol, double percentile_i) {
  auto users = sorted_users(table);
  auto it = std::find(users.begin(), users.end(), user);
  if (it == users.end()) throw Error("unknown user: " + user);
  std::uint64_t proto_seed = Rng::derive(protocol.seed, protocol_stream(protocol));
  std::uint64_t user_seed =
      Rng::derive(proto_seed, static_cast<std::uint64_t>(it - users.begin()));
  auto cols = columns_for(protocol.feature_set);
  TrainedCore core;
  std::string why;
  if (!train_core(table, user, protocol, cols, user_seed, core, why))
    throw Error("cannot train model for " + user + ": " + why);
  UserModel m = to_model(user, protocol, cols, core, user_seed);
  m.percentile_i = static_cast<int>(percentile_i);
  m.threshold = calibrate_threshold(core.d_g, percentile_i);
  return m;
}

EvalReport run_protocol(const FeatureTable& table, const Protocol& protocol,
                        int workers) {
  EvalReport report;
  report.protocol = protocol;
  auto users = sorted_users(table);
  auto cols = columns_for(protocol.feature_set);
  std::uint64_t proto_seed = Rng::derive(protocol.seed, protocol_stream(protocol));

  std::vector<std::optional<UserEval>> results(users.size());
  std::vector<std::string> reasons(users.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto evaluate_user = [&](std::size_t ui) {
    const std::string& user = users[ui];
    std::uint64_t user_seed = Rng::derive(proto_seed, ui);
    TrainedCore core;
    std::string why;
    if (!train_core(table, user, protocol, cols, user_seed, core, why)) {
      reasons[ui] = why;
      return;
    }
    UserModel scorer;
    scorer.pairs = core.pairs;
    scorer.gmms = core.gmms;

    // window statistics per single-user, single-session sequence
    auto window_stats_for = [&](const std::string& owner) {
      std::vector<double> stats;
      for (int sess = 3; sess <= 4; ++sess) {
        std::vector<double> scores;
        for (const auto& row : table.rows) {
          if (row.user != owner || row.session_index != sess ||
              row.context != protocol.test_context)
            continue;
          auto norm =
              apply_normalizer(core.nz, restrict_row(row.values, cols));
          scores.push_back(score_normalized(scorer, norm));
        }
        if (scores.empty()) continue;
        auto ws = stream_window_stats(scores, protocol.w, protocol.m);
        stats.insert(stats.end(), ws.begin(), ws.end());
      }
      return stats;
    };

    auto genuine_stats = window_stats_for(user);
    if (genuine_stats.empty()) {
      reasons[ui] = "no genuine test swipes";
      return;
    }
    std::vector<double> impostor_stats;
    for (const auto& other : users) {
      if (other == user) continue;
      auto ws = window_stats_for(other);
      impostor_stats.insert(impostor_stats.end(), ws.begin(), ws.end());
    }
    if (impostor_stats.empty()) {
      reasons[ui] = "no impostor test swipes";
      return;
    }
    EerResult er = compute_eer(genuine_stats, impostor_stats);
    UserEval ue;
    ue.user = user;
    ue.eer = er.eer;
    ue.threshold = er.threshold;
    ue.percentile_i = back_derive_percentile(core.d_g, er.threshold);
    ue.n_genuine_windows = genuine_stats.size();
    ue.n_impostor_windows = impostor_stats.size();
    results[ui] = ue;
  };

  auto worker = [&]() {
    for (;;) {
      std::size_t ui = next.fetch_add(1);
      if (ui >= users.size()) return;
      try {
        evaluate_user(ui);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  double sum = 0.0;
  for (std::size_t ui = 0; ui < users.size(); ++ui) {
    if (results[ui]) {
      report.per_user.push_back(*results[ui]);
      sum += results[ui]->eer;
    } else {
      report.skipped_users.push_back(users[ui] + ": " + reasons[ui]);
    }
  }
  if (!report.per_user.empty()) {
    report.mean_eer = sum / static_cast<double>(report.per_user.size());
    double acc = 0.0;
    for (const auto& ue : report.per_user)
      acc += (ue.eer - report.mean_eer) * (ue.eer - report.mean_eer);
    report.std_eer = std::sqrt(acc / static_cast<double>(report.per_user.size()));
  }
  return report;
}

std::vector<EvalReport> run_table1(const FeatureTable& table,
                                   std::uint64_t seed, int k, int workers) {
  std::vector<EvalReport> out;
  const std::vector<Context> all(std::begin(kAllContexts), std::end(kAllContexts));
  for (Context scenario : kAllContexts) {
    for (bool general : {false, true}) {
      for (FeatureSet fs :
           {FeatureSet::Touch, FeatureSet::Motion, FeatureSet::Fusion}) {
        Protocol p;
        p.train_contexts = general ? all : std::vector<Context>{scenario};
        p.test_context = scenario;
        p.feature_set = fs;
        p.k = k;
        p.seed = seed;
        out.push_back(run_protocol(table, p, workers));
      }
    }
  }
  return out;
}

std::vector<EvalReport> run_table2(const FeatureTable& table,
                                   std::uint64_t seed, int k, int workers) {
  using C = Context;
  const std::pair<C, C> pairs[] = {
      {C::S1_ReadSit, C::S2_ReadWalk}, {C::S2_ReadWalk, C::S1_ReadSit},
      {C::S3_MapSit, C::S4_MapWalk},   {C::S4_MapWalk, C::S3_MapSit},
      {C::S1_ReadSit, C::S3_MapSit},   {C::S3_MapSit, C::S1_ReadSit},
      {C::S2_ReadWalk, C::S4_MapWalk}, {C::S4_MapWalk, C::S2_ReadWalk}};
  std::vector<EvalReport> out;
  for (const auto& [train, test] : pairs) {
    for (FeatureSet fs :
         {FeatureSet::Touch, FeatureSet::Motion, FeatureSet::Fusion}) {
      Protocol p;
      p.train_contexts = {train};
      p.test_context = test;
      p.feature_set = fs;
      p.k = k;
      p.seed = seed;
      out.push_back(run_protocol(table, p, workers));
    }
  }
  return out;
}

std::pair<EvalReport, EvalReport> run_direction_ablation(const Dataset& ds,
                                                         std::uint64_t seed,
                                                         int k, int workers) {
  bool has_s3 = false;
  for (const auto& ud : ds.users)
    for (const auto& sd : ud.sessions)
      if (sd.id.context == Context::S3_MapSit) has_s3 = true;
  if (!has_s3) throw InvalidConfig("ablation requires S3 sessions");

  Protocol p;
  p.train_contexts = {Context::S3_MapSit};
  p.test_context = Context::S3_MapSit;
  p.feature_set = FeatureSet::Touch;
  p.k = k;
  p.seed = seed;

  FeatureTable all = build_feature_table(ds);
  FeatureTable vertical = build_feature_table(ds, DirectionClass::Vertical);
  return {run_protocol(all, p, workers), run_protocol(vertical, p, workers)};
}

PcaExport export_pca_gmm(
    const FeatureTable& table, Channel channel,
    const std::vector<std::pair<std::string, std::vector<Context>>>& groups,
    int k, std::uint64_t seed) {
  auto cols = columns_for(channel == Channel::Touch ? FeatureSet::Touch
                                                    : FeatureSet::Motion);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto d = static_cast<Eigen::Index>(cols.size());
  if (n == 0) throw DegenerateData("no rows for PCA");

  Eigen::MatrixXd x(n, d);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      x(r, c) = table.rows[static_cast<std::size_t>(r)]
                    .values[static_cast<std::size_t>(cols[static_cast<std::size_t>(c)])];
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DegenerateData("eigensolver failed");
  Eigen::VectorXd evals = eig.eigenvalues();  // ascending
  if (evals(d - 1) <= 1e-15) throw DegenerateData("covariance has rank 0");

  PcaExport out;
  out.eigval1 = evals(d - 1);
  out.eigval2 = d >= 2 ? evals(d - 2) : 0.0;
  Eigen::MatrixXd basis(d, 2);
  basis.col(0) = eig.eigenvectors().col(d - 1);
  if (d >= 2)
    basis.col(1) = eig.eigenvectors().col(d - 2);
  else
    basis.col(1).setZero();
  for (int c = 0; c < 2; ++c) {  // deterministic sign convention
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(basis(i, c)) > 1e-12) {
        if (basis(i, c) < 0.0) basis.col(c) = -basis.col(c);
        break;
      }
    }
  }
  Eigen::MatrixXd proj = x * basis;

  std::size_t gi = 0;
  for (const auto& [label, ctxs] : groups) {
    PcaGroup pg;
    pg.label = label;
    std::vector<Point2> pts;
    for (Eigen::Index r = 0; r < n; ++r) {
      Context c = table.rows[static_cast<std::size_t>(r)].context;
      if (std::find(ctxs.begin(), ctxs.end(), c) == ctxs.end()) continue;
      pts.push_back({proj(r, 0), proj(r, 1)});
    }
    pg.points = pts;
    if (!pts.empty()) {
      Gmm2D g = fit_gmm(pts, k, Rng::derive(seed, 500 + gi));
      for (const auto& comp : g.comps) {
        SymEig2 e = sym_eig2(comp.cxx, comp.cxy, comp.cyy);
        PcaEllipse el;
        el.centroid = {comp.mx, comp.my};
        el.axis1 = {e.v1x, e.v1y};
        el.axis2 = {e.v2x, e.v2y};
        el.len1 = std::sqrt(std::max(e.l1, 0.0));
        el.len2 = std::sqrt(std::max(e.l2, 0.0));
        el.weight = comp.weight;
        pg.components.push_back(el);
      }
    }
    out.groups.push_back(std::move(pg));
    ++gi;
  }
  return out;
}

}  // namespace swipeauth
