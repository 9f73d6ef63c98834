#include "swipeauth/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "swipeauth/rng.hpp"

namespace swipeauth {

SymEig2 sym_eig2(double a, double b, double c) {
  double half_tr = 0.5 * (a + c);
  double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  SymEig2 e;
  e.l1 = half_tr + disc;
  e.l2 = half_tr - disc;
  double vx, vy;
  if (std::abs(b) > 1e-300) {
    vx = b;
    vy = e.l1 - a;
  } else if (a >= c) {
    vx = 1.0;
    vy = 0.0;
  } else {
    vx = 0.0;
    vy = 1.0;
  }
  double norm = std::hypot(vx, vy);
  e.v1x = vx / norm;
  e.v1y = vy / norm;
  e.v2x = -e.v1y;
  e.v2y = e.v1x;
  return e;
}

namespace {

void floor_covariance(GmmComponent& c, double floor) {
  SymEig2 e = sym_eig2(c.cxx, c.cxy, c.cyy);
  double l1 = std::max(e.l1, floor);
  double l2 = std::max(e.l2, floor);
  c.cxx = l1 * e.v1x * e.v1x + l2 * e.v2x * e.v2x;
  c.cxy = l1 * e.v1x * e.v1y + l2 * e.v2x * e.v2y;
  c.cyy = l1 * e.v1y * e.v1y + l2 * e.v2y * e.v2y;
}

double log_gauss2(const GmmComponent& c, Point2 p) {
  double det = c.cxx * c.cyy - c.cxy * c.cxy;
  double dx = p.x - c.mx, dy = p.y - c.my;
  double quad = (c.cyy * dx * dx - 2.0 * c.cxy * dx * dy + c.cxx * dy * dy) / det;
  return -std::log(2.0 * 3.14159265358979323846) - 0.5 * std::log(det) -
         0.5 * quad;
}

}  // namespace

Gmm2D fit_gmm(const std::vector<Point2>& pts, int k, std::uint64_t seed,
              const EmSettings& em) {
  const std::size_t n = pts.size();
  if (static_cast<int>(n) < k || k < 1)
    throw TooFewPoints("fit_gmm: need at least k points");
  Rng rng(seed);

  // k-means++-style seeding
  std::vector<Point2> centers;
  centers.push_back(pts[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = 1e300;
      for (const auto& c : centers) {
        double d = (pts[i].x - c.x) * (pts[i].x - c.x) +
                   (pts[i].y - c.y) * (pts[i].y - c.y);
        best = std::min(best, d);
      }
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    } else {
      double r = rng.uniform() * total;
      pick = 0;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pts[pick]);
  }

  // shared sample covariance as the initial spread
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  GmmComponent base;
  base.cxx = base.cxy = base.cyy = 0.0;
  for (const auto& p : pts) {
    base.cxx += (p.x - mx) * (p.x - mx);
    base.cxy += (p.x - mx) * (p.y - my);
    base.cyy += (p.y - my) * (p.y - my);
  }
  base.cxx /= static_cast<double>(n);
  base.cxy /= static_cast<double>(n);
  base.cyy /= static_cast<double>(n);
  floor_covariance(base, em.cov_floor);

  Gmm2D g;
  for (int c = 0; c < k; ++c) {
    GmmComponent comp = base;
    comp.mx = centers[static_cast<std::size_t>(c)].x;
    comp.my = centers[static_cast<std::size_t>(c)].y;
    comp.weight = 1.0 / k;
    g.comps.push_back(comp);
  }

  std::vector<double> resp(n * static_cast<std::size_t>(k));
  double prev_ll = -1e300;
  for (int iter = 0; iter < em.max_iters; ++iter) {
    // E step + log-likelihood
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double lmax = -1e300;
      std::vector<double> lp(static_cast<std::size_t>(k));
      for (int c = 0; c < k; ++c) {
        lp[static_cast<std::size_t>(c)] =
            std::log(std::max(g.comps[static_cast<std::size_t>(c)].weight, 1e-300)) +
            log_gauss2(g.comps[static_cast<std::size_t>(c)], pts[i]);
        lmax = std::max(lmax, lp[static_cast<std::size_t>(c)]);
      }
      double sum = 0.0;
      for (int c = 0; c < k; ++c)
        sum += std::exp(lp[static_cast<std::size_t>(c)] - lmax);
      double lse = lmax + std::log(sum);
      ll += lse;
      for (int c = 0; c < k; ++c)
        resp[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] =
            std::exp(lp[static_cast<std::size_t>(c)] - lse);
    }
    ll /= static_cast<double>(n);
    g.ll_trace.push_back(ll);
    if (iter > 0 && ll - prev_ll < em.rel_tol * (std::abs(prev_ll) + 1e-3)) break;
    prev_ll = ll;

    // M step
    for (int c = 0; c < k; ++c) {
      auto& comp = g.comps[static_cast<std::size_t>(c)];
      double nk = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double r = resp[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)];
        nk += r;
        sx += r * pts[i].x;
        sy += r * pts[i].y;
      }
      double denom = std::max(nk, 1e-12);
      comp.weight = nk / static_cast<double>(n);
      comp.mx = sx / denom;
      comp.my = sy / denom;
      double cxx = 0.0, cxy = 0.0, cyy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double r = resp[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)];
        double dx = pts[i].x - comp.mx, dy = pts[i].y - comp.my;
        cxx += r * dx * dx;
        cxy += r * dx * dy;
        cyy += r * dy * dy;
      }
      comp.cxx = cxx / denom;
      comp.cxy = cxy / denom;
      comp.cyy = cyy / denom;
      floor_covariance(comp, em.cov_floor);
    }
    double wsum = 0.0;
    for (const auto& c : g.comps) wsum += c.weight;
    for (auto& c : g.comps) c.weight /= wsum;
  }
  return g;
}

double min_centroid_distance(const Gmm2D& g, Point2 p) {
  double best = 1e300;
  for (const auto& c : g.comps)
    best = std::min(best, std::hypot(p.x - c.mx, p.y - c.my));
  return best;
}

std::vector<Gmm2D> train_ensemble(const Matrix& genuine_norm,
                                  const std::vector<std::pair<int, int>>& pairs,
                                  int k, std::uint64_t seed,
                                  const EmSettings& em) {
  if (genuine_norm.empty()) throw TooFewPoints("train_ensemble: no genuine data");
  std::vector<Gmm2D> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::vector<Point2> pts;
    pts.reserve(genuine_norm.size());
    for (const auto& row : genuine_norm)
      pts.push_back({row[static_cast<std::size_t>(pairs[i].first)],
                     row[static_cast<std::size_t>(pairs[i].second)]});
    out.push_back(fit_gmm(pts, k, seed + i, em));
  }
  return out;
}

double calibrate_threshold(std::vector<double> d_g, double percentile_i) {
  if (d_g.empty()) throw EmptyScores();
  std::sort(d_g.begin(), d_g.end());
  const auto n = static_cast<double>(d_g.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile_i / 100.0 * n));
  if (rank < 1) rank = 1;
  if (rank > d_g.size()) rank = d_g.size();
  return d_g[rank - 1];
}

double window_statistic(const std::vector<double>& c, int m) {
  if (c.empty()) throw EmptyScores();
  std::vector<double> sorted = c;
  std::sort(sorted.begin(), sorted.end());
  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(m), sorted.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += sorted[i];
  return sum / static_cast<double>(take);
}

std::vector<double> stream_window_stats(const std::vector<double>& scores,
                                        int w, int m) {
  if (scores.empty()) throw EmptyScores();
  const std::size_t n = scores.size();
  std::vector<double> out;
  if (n < static_cast<std::size_t>(w)) {
    out.push_back(window_statistic(scores, m));
    return out;
  }
  for (std::size_t i = 0; i + static_cast<std::size_t>(w) <= n; ++i) {
    std::vector<double> win(scores.begin() + static_cast<long>(i),
                            scores.begin() + static_cast<long>(i) + w);
    out.push_back(window_statistic(win, m));
  }
  return out;
}

double score_normalized(const UserModel& m, const std::vector<double>& row) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    Point2 p{row[static_cast<std::size_t>(m.pairs[i].first)],
             row[static_cast<std::size_t>(m.pairs[i].second)]};
    total += min_centroid_distance(m.gmms[i], p);
  }
  return total;
}

double score_raw(const UserModel& m, const std::vector<double>& full_row) {
  std::vector<double> restricted(m.columns.size());
  for (std::size_t i = 0; i < m.columns.size(); ++i)
    restricted[i] = full_row[static_cast<std::size_t>(m.columns[i])];
  return score_normalized(m, apply_normalizer(m.normalizer, restricted));
}

bool decide_genuine(const UserModel& m, double statistic) {
  return statistic <= m.threshold;
}

namespace {

using nlohmann::json;

json gmm_to_json(const Gmm2D& g) {
  json comps = json::array();
  for (const auto& c : g.comps) {
    comps.push_back({{"mean", {c.mx, c.my}},
                     {"cov", {c.cxx, c.cxy, c.cyy}},
                     {"weight", c.weight}});
  }
  return {{"k", g.comps.size()}, {"components", comps}};
}

Gmm2D gmm_from_json(const json& j) {
  Gmm2D g;
  for (const auto& cj : j.at("components")) {
    GmmComponent c;
    c.mx = cj.at("mean")[0];
    c.my = cj.at("mean")[1];
    c.cxx = cj.at("cov")[0];
    c.cxy = cj.at("cov")[1];
    c.cyy = cj.at("cov")[2];
    c.weight = cj.at("weight");
    g.comps.push_back(c);
  }
  return g;
}

}  // namespace

std::string model_to_json(const UserModel& m) {
  json j;
  j["schema_version"] = 1;
  j["user"] = m.user;
  json ctxs = json::array();
  for (Context c : m.contexts) ctxs.push_back(to_string(c));
  j["contexts"] = ctxs;
  j["feature_set"] = to_string(m.feature_set);
  j["columns"] = m.columns;
  j["normalizer"] = {{"lo", m.normalizer.lo}, {"hi", m.normalizer.hi}};
  j["ranked"] = m.ranked;
  json pairs = json::array();
  for (const auto& p : m.pairs) pairs.push_back({p.first, p.second});
  j["pairs"] = pairs;
  json gmms = json::array();
  for (const auto& g : m.gmms) gmms.push_back(gmm_to_json(g));
  j["gmms"] = gmms;
  j["threshold"] = m.threshold;
  j["percentile_i"] = m.percentile_i;
  j["k"] = m.k;
  j["seed"] = m.seed;
  j["em"] = {{"max_iters", m.em.max_iters},
             {"rel_tol", m.em.rel_tol},
             {"cov_floor", m.em.cov_floor}};
  return j.dump(2);
}

UserModel model_from_json(const std::string& text) {
  json j = json::parse(text);
  UserModel m;
  m.user = j.at("user");
  for (const auto& c : j.at("contexts"))
    m.contexts.push_back(context_from_string(c.get<std::string>()));
  m.feature_set = feature_set_from_string(j.at("feature_set"));
  m.columns = j.at("columns").get<std::vector<int>>();
  m.normalizer.lo = j.at("normalizer").at("lo").get<std::vector<double>>();
  m.normalizer.hi = j.at("normalizer").at("hi").get<std::vector<double>>();
  m.ranked = j.at("ranked").get<std::vector<int>>();
  for (const auto& p : j.at("pairs"))
    m.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
  for (const auto& g : j.at("gmms")) m.gmms.push_back(gmm_from_json(g));
  m.threshold = j.at("threshold");
  m.percentile_i = j.at("percentile_i");
  m.k = j.at("k");
  m.seed = j.at("seed");
  m.em.max_iters = j.at("em").at("max_iters");
  m.em.rel_tol = j.at("em").at("rel_tol");
  m.em.cov_floor = j.at("em").at("cov_floor");
  return m;
}

void save_model(const UserModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file: " + path);
  out << model_to_json(m) << "\n";
}

UserModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read model file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace swipeauth
