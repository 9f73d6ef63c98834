#include "swipeauth/features.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <numeric>

namespace swipeauth {

namespace {

constexpr double kPi = 3.14159265358979323846;

double vec_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation; 0 for fewer than two points.
double vec_pstd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = vec_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

// Linear interpolation between closest ranks on a sorted copy.
double vec_percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 1) return v[0];
  double r = p / 100.0 * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(std::floor(r));
  if (lo + 1 >= n) return v[n - 1];
  double frac = r - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

// mean, std, min, max, P5, P25, P50, P75, P95
void push_stats9(std::vector<double>& out, const std::vector<double>& v) {
  out.push_back(vec_mean(v));
  out.push_back(vec_pstd(v));
  out.push_back(*std::min_element(v.begin(), v.end()));
  out.push_back(*std::max_element(v.begin(), v.end()));
  for (double p : {5.0, 25.0, 50.0, 75.0, 95.0})
    out.push_back(vec_percentile(v, p));
}

// Central differences on interior points, one-sided at the ends.
std::vector<double> derivative(const std::vector<double>& v,
                               const std::vector<double>& ts) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (v[1] - v[0]) / (ts[1] - ts[0]);
  d[n - 1] = (v[n - 1] - v[n - 2]) / (ts[n - 1] - ts[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    d[i] = (v[i + 1] - v[i - 1]) / (ts[i + 1] - ts[i - 1]);
  return d;
}

// Piecewise-linear interpolation over increasing xs, clamped at the ends.
double interp_clamped(const std::vector<double>& xs,
                      const std::vector<double>& vs, double xq) {
  if (vs.empty()) return 0.0;
  if (xq <= xs.front()) return vs.front();
  if (xq >= xs.back()) return vs.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), xq);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  std::size_t lo = hi - 1;
  double frac = (xq - xs[lo]) / (xs[hi] - xs[lo]);
  return vs[lo] + frac * (vs[hi] - vs[lo]);
}

double wrap_deg(double a) {
  while (a > 180.0) a -= 360.0;
  while (a <= -180.0) a += 360.0;
  return a;
}

double atan2_deg(double y, double x) { return wrap_deg(std::atan2(y, x) * 180.0 / kPi); }

int sign_changes(const std::vector<double>& steps) {
  int count = 0;
  int last = 0;
  for (double d : steps) {
    int s = (d > 0.0) - (d < 0.0);
    if (s != 0) {
      if (last != 0 && s != last) ++count;
      last = s;
    }
  }
  return count;
}

struct WindowSummary {
  double mean = 0.0, std = 0.0, rms = 0.0, max = 0.0, range = 0.0;
};

// 28 per-window magnitude features; an empty window contributes all zeros.
WindowSummary push_window_feats(std::vector<double>& out,
                                const std::vector<MagSample>& w) {
  const std::size_t n = w.size();
  if (n == 0) {
    out.insert(out.end(), 28, 0.0);
    return {};
  }
  std::vector<double> v(n), ts(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = w[i].mag;
    ts[i] = static_cast<double>(w[i].t - w[0].t) / 1000.0;
  }
  double m = vec_mean(v);
  double sd = vec_pstd(v);
  double var = sd * sd;
  double mad = 0.0;
  for (double x : v) mad += std::abs(x - m);
  mad /= static_cast<double>(n);
  // 10%-trimmed mean: drop floor(n/10) from each tail of the sorted values
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::size_t trim = n / 10;
  double tmean;
  if (2 * trim >= n) {
    tmean = vec_percentile(v, 50.0);
  } else {
    tmean = std::accumulate(sorted.begin() + static_cast<long>(trim),
                            sorted.end() - static_cast<long>(trim), 0.0) /
            static_cast<double>(n - 2 * trim);
  }
  double mn = sorted.front(), mx = sorted.back();
  std::size_t argmin = 0, argmax = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] < v[argmin]) argmin = i;
    if (v[i] > v[argmax]) argmax = i;
  }
  double argmin_frac = n > 1 ? static_cast<double>(argmin) / static_cast<double>(n - 1) : 0.0;
  double argmax_frac = n > 1 ? static_cast<double>(argmax) / static_cast<double>(n - 1) : 0.0;
  double msq = 0.0;
  for (double x : v) msq += x * x;
  msq /= static_cast<double>(n);
  double rms = std::sqrt(msq);
  double madiff = 0.0;
  if (n >= 2) {
    for (std::size_t i = 0; i + 1 < n; ++i) madiff += std::abs(v[i + 1] - v[i]);
    madiff /= static_cast<double>(n - 1);
  }
  // lag-1 autocorrelation; defined as 0 for constant or single-sample signals
  double acf1 = 0.0;
  if (n >= 2) {
    double den = 0.0, num = 0.0;
    for (std::size_t i = 0; i < n; ++i) den += (v[i] - m) * (v[i] - m);
    for (std::size_t i = 0; i + 1 < n; ++i) num += (v[i] - m) * (v[i + 1] - m);
    if (den > 0.0) acf1 = num / den;
  }
  double slope = 0.0;
  if (n >= 2) {
    double tm = vec_mean(ts);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (ts[i] - tm) * (ts[i] - tm);
      sxy += (ts[i] - tm) * (v[i] - m);
    }
    if (sxx > 0.0) slope = sxy / sxx;
  }
  double mcr = 0.0;
  if (n >= 2) {
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      if ((v[i] - m) * (v[i + 1] - m) < 0.0) ++crossings;
    mcr = static_cast<double>(crossings) / static_cast<double>(n - 1);
  }
  int peaks = 0;
  double peak_sum = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (v[i] > v[i - 1] && v[i] > v[i + 1]) {
      ++peaks;
      peak_sum += v[i];
    }
  }
  double peak_mean = peaks > 0 ? peak_sum / peaks : 0.0;
  double delta = v[n - 1] - v[0];
  double skewp = m - vec_percentile(v, 50.0);

  out.push_back(m);
  out.push_back(sd);
  out.push_back(var);
  out.push_back(mad);
  out.push_back(tmean);
  out.push_back(mn);
  out.push_back(mx);
  out.push_back(mx - mn);
  out.push_back(argmin_frac);
  out.push_back(argmax_frac);
  for (double p : {5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 95.0})
    out.push_back(vec_percentile(v, p));
  out.push_back(vec_percentile(v, 75.0) - vec_percentile(v, 25.0));
  out.push_back(rms);
  out.push_back(msq);
  out.push_back(madiff);
  out.push_back(acf1);
  out.push_back(slope);
  out.push_back(mcr);
  out.push_back(static_cast<double>(peaks));
  out.push_back(peak_mean);
  out.push_back(delta);
  out.push_back(skewp);
  return {m, sd, rms, mx, mx - mn};
}

const char* kStat9[] = {"mean", "std", "min", "max", "p5", "p25", "p50", "p75", "p95"};
const char* kWindowStat[] = {"mean", "std",  "var",  "mad",   "tmean10", "min",  "max",
                             "range", "argmin_frac", "argmax_frac", "p5", "p10", "p25",
                             "p50",  "p75", "p90",  "p95",  "iqr",   "rms",  "msq",
                             "madiff", "acf1", "slope", "mcr", "peaks", "peak_mean",
                             "delta", "skewp"};
const char* kCrossStat[] = {"mean", "std", "rms", "max", "range"};

std::vector<FeatureId> build_catalog() {
  std::vector<FeatureId> cat;
  int idx = 0;
  auto add = [&](const std::string& name, const char* group, Channel ch) {
    cat.push_back({idx++, name, group, ch});
  };
  auto add9 = [&](const std::string& prefix, const char* group) {
    for (const char* s : kStat9) add(prefix + "_" + s, group, Channel::Touch);
  };
  // touch: position 18, pressure 9, kinematics 36
  add9("x", "position");
  add9("y", "position");
  add9("pressure", "pressure");
  add9("vx", "kinematics");
  add9("vy", "kinematics");
  add9("speed", "kinematics");
  add9("acc", "kinematics");
  // geometry 20
  for (const char* n : {"start_x", "start_y", "end_x", "end_y", "delta_x",
                        "delta_y", "displacement", "path_length", "straightness",
                        "x_range", "y_range", "aspect_ratio", "perp_dev_max",
                        "perp_dev_mean", "perp_dev_std", "chord_area", "curv_mean",
                        "curv_std", "curv_max", "bbox_area"})
    add(n, "geometry", Channel::Touch);
  // direction 10
  for (const char* n : {"chord_angle", "chord_sin", "chord_cos", "start_angle",
                        "end_angle", "angle_change", "seg_angle_mean",
                        "seg_angle_circ_std", "dir_changes_x", "dir_changes_y"})
    add(n, "direction", Channel::Touch);
  // temporal 6
  for (const char* n : {"duration", "point_count", "dt_mean", "dt_std",
                        "peak_speed_frac", "peak_pressure_frac"})
    add(n, "temporal", Channel::Touch);
  // checkpoints 15: speed/pressure/curvature at 20/35/50/65/80% of duration
  for (const char* f : {"20", "35", "50", "65", "80"})
    for (const char* s : {"speed_at_", "pressure_at_", "curv_at_"})
      add(std::string(s) + f, "checkpoint", Channel::Touch);
  // transition 3
  for (const char* n : {"pressure_delta", "speed_delta", "jerk_mean"})
    add(n, "transition", Channel::Touch);

  // motion: 28 per window, then 10 cross-window deltas
  for (const char* w : {"pre", "during", "post"}) {
    std::string group = std::string("window_") + w;
    for (const char* s : kWindowStat)
      cat.push_back({idx++, std::string(w) + "_" + s, group, Channel::Motion});
  }
  for (const char* other : {"pre", "post"})
    for (const char* s : kCrossStat)
      cat.push_back({idx++, std::string("d_") + other + "_" + s, "cross_window",
                     Channel::Motion});
  assert(static_cast<int>(cat.size()) == kFeatureCount);
  return cat;
}

}  // namespace

const std::vector<FeatureId>& feature_catalog() {
  static const std::vector<FeatureId> cat = build_catalog();
  return cat;
}

const char* to_string(FeatureSet fs) {
  switch (fs) {
    case FeatureSet::Touch: return "Touch";
    case FeatureSet::Motion: return "Motion";
    case FeatureSet::Fusion: return "Fusion";
  }
  return "?";
}

FeatureSet feature_set_from_string(const std::string& s) {
  std::string l;
  for (char c : s) l += static_cast<char>(std::tolower(c));
  if (l == "touch") return FeatureSet::Touch;
  if (l == "motion") return FeatureSet::Motion;
  if (l == "fusion") return FeatureSet::Fusion;
  throw ParseError("unknown feature set: " + s);
}

std::vector<int> columns_for(FeatureSet fs) {
  int lo = fs == FeatureSet::Motion ? kTouchFeatureCount : 0;
  int hi = fs == FeatureSet::Touch ? kTouchFeatureCount : kFeatureCount;
  std::vector<int> cols;
  for (int i = lo; i < hi; ++i) cols.push_back(i);
  return cols;
}

std::vector<double> extract_touch(const Swipe& sw) {
  const auto& s = sw.samples;
  const std::size_t n = s.size();
  std::vector<double> xs(n), ys(n), ps(n), tms(n), tsec(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = s[i].x;
    ys[i] = s[i].y;
    ps[i] = s[i].pressure;
    tms[i] = static_cast<double>(s[i].t - s[0].t);
    tsec[i] = tms[i] / 1000.0;
  }
  std::vector<double> out;
  out.reserve(kTouchFeatureCount);

  push_stats9(out, xs);
  push_stats9(out, ys);
  push_stats9(out, ps);

  auto vx = derivative(xs, tsec);
  auto vy = derivative(ys, tsec);
  std::vector<double> speed(n), accm(n);
  for (std::size_t i = 0; i < n; ++i) speed[i] = std::hypot(vx[i], vy[i]);
  auto ax = derivative(vx, tsec);
  auto ay = derivative(vy, tsec);
  for (std::size_t i = 0; i < n; ++i) accm[i] = std::hypot(ax[i], ay[i]);
  push_stats9(out, vx);
  push_stats9(out, vy);
  push_stats9(out, speed);
  push_stats9(out, accm);

  // geometry
  double sx = xs.front(), sy = ys.front(), ex = xs.back(), ey = ys.back();
  double dx = ex - sx, dy = ey - sy;
  double disp = std::hypot(dx, dy);
  double plen = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    plen += std::hypot(xs[i + 1] - xs[i], ys[i + 1] - ys[i]);
  double straight = plen > 0.0 ? disp / plen : 0.0;
  double xmin = *std::min_element(xs.begin(), xs.end());
  double xmax = *std::max_element(xs.begin(), xs.end());
  double ymin = *std::min_element(ys.begin(), ys.end());
  double ymax = *std::max_element(ys.begin(), ys.end());
  double xr = xmax - xmin, yr = ymax - ymin;
  double aspect = yr > 0.0 ? xr / yr : 0.0;
  std::vector<double> devs(n, 0.0);
  if (disp > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      devs[i] = std::abs((xs[i] - sx) * dy - (ys[i] - sy) * dx) / disp;
  }
  double chord_area = 0.0;  // shoelace of the closed polyline
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = (i + 1) % n;
    chord_area += xs[i] * ys[j] - xs[j] * ys[i];
  }
  chord_area *= 0.5;
  // Menger curvature at interior points
  std::vector<double> curv;
  std::vector<double> curv_t;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double a = std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
    double b = std::hypot(xs[i + 1] - xs[i], ys[i + 1] - ys[i]);
    double c = std::hypot(xs[i + 1] - xs[i - 1], ys[i + 1] - ys[i - 1]);
    double cross = std::abs((xs[i] - xs[i - 1]) * (ys[i + 1] - ys[i - 1]) -
                            (ys[i] - ys[i - 1]) * (xs[i + 1] - xs[i - 1]));
    curv.push_back(a * b * c > 0.0 ? 2.0 * cross / (a * b * c) : 0.0);
    curv_t.push_back(tms[i]);
  }
  out.push_back(sx);
  out.push_back(sy);
  out.push_back(ex);
  out.push_back(ey);
  out.push_back(dx);
  out.push_back(dy);
  out.push_back(disp);
  out.push_back(plen);
  out.push_back(straight);
  out.push_back(xr);
  out.push_back(yr);
  out.push_back(aspect);
  out.push_back(devs.empty() ? 0.0 : *std::max_element(devs.begin(), devs.end()));
  out.push_back(vec_mean(devs));
  out.push_back(vec_pstd(devs));
  out.push_back(chord_area);
  out.push_back(curv.empty() ? 0.0 : vec_mean(curv));
  out.push_back(curv.empty() ? 0.0 : vec_pstd(curv));
  out.push_back(curv.empty() ? 0.0 : *std::max_element(curv.begin(), curv.end()));
  out.push_back(xr * yr);

  // direction
  double theta = std::atan2(dy, dx);
  out.push_back(wrap_deg(theta * 180.0 / kPi));
  out.push_back(std::sin(theta));
  out.push_back(std::cos(theta));
  double start_angle = atan2_deg(ys[2] - ys[0], xs[2] - xs[0]);
  double end_angle = atan2_deg(ys[n - 1] - ys[n - 3], xs[n - 1] - xs[n - 3]);
  out.push_back(start_angle);
  out.push_back(end_angle);
  out.push_back(wrap_deg(end_angle - start_angle));
  double ssin = 0.0, scos = 0.0;
  int segs = 0;
  std::vector<double> step_x, step_y;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double ddx = xs[i + 1] - xs[i], ddy = ys[i + 1] - ys[i];
    step_x.push_back(ddx);
    step_y.push_back(ddy);
    if (ddx != 0.0 || ddy != 0.0) {
      double th = std::atan2(ddy, ddx);
      ssin += std::sin(th);
      scos += std::cos(th);
      ++segs;
    }
  }
  if (segs > 0) {
    out.push_back(atan2_deg(ssin, scos));
    double r = std::hypot(ssin, scos) / segs;
    r = std::min(1.0, std::max(1e-12, r));
    out.push_back(std::sqrt(-2.0 * std::log(r)) * 180.0 / kPi);
  } else {
    out.push_back(0.0);
    out.push_back(0.0);
  }
  out.push_back(static_cast<double>(sign_changes(step_x)));
  out.push_back(static_cast<double>(sign_changes(step_y)));

  // temporal
  double duration = tms.back();
  std::vector<double> dts;
  for (std::size_t i = 0; i + 1 < n; ++i) dts.push_back(tms[i + 1] - tms[i]);
  std::size_t peak_speed = 0, peak_pressure = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (speed[i] > speed[peak_speed]) peak_speed = i;
    if (ps[i] > ps[peak_pressure]) peak_pressure = i;
  }
  out.push_back(duration);
  out.push_back(static_cast<double>(n));
  out.push_back(vec_mean(dts));
  out.push_back(vec_pstd(dts));
  out.push_back(tms[peak_speed] / duration);
  out.push_back(tms[peak_pressure] / duration);

  // checkpoints
  for (double f : {0.20, 0.35, 0.50, 0.65, 0.80}) {
    double tq = f * duration;
    out.push_back(interp_clamped(tms, speed, tq));
    out.push_back(interp_clamped(tms, ps, tq));
    out.push_back(interp_clamped(curv_t, curv, tq));
  }

  // transition
  out.push_back(ps.back() - ps.front());
  out.push_back(speed.back() - speed.front());
  auto jerk = derivative(accm, tsec);
  double jm = 0.0;
  for (double j : jerk) jm += std::abs(j);
  out.push_back(jm / static_cast<double>(n));

  assert(static_cast<int>(out.size()) == kTouchFeatureCount);
  return out;
}

std::vector<double> extract_motion(const Swipe& sw) {
  std::vector<double> out;
  out.reserve(kMotionFeatureCount);
  WindowSummary pre = push_window_feats(out, sw.mag_pre);
  WindowSummary dur = push_window_feats(out, sw.mag_during);
  WindowSummary post = push_window_feats(out, sw.mag_post);
  for (const WindowSummary& other : {pre, post}) {
    out.push_back(dur.mean - other.mean);
    out.push_back(dur.std - other.std);
    out.push_back(dur.rms - other.rms);
    out.push_back(dur.max - other.max);
    out.push_back(dur.range - other.range);
  }
  assert(static_cast<int>(out.size()) == kMotionFeatureCount);
  return out;
}

std::vector<double> extract(const Swipe& sw) {
  std::vector<double> out = extract_touch(sw);
  std::vector<double> motion = extract_motion(sw);
  out.insert(out.end(), motion.begin(), motion.end());
  return out;
}

}  // namespace swipeauth
