#include "swipeauth/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "swipeauth/rng.hpp"
#include "swipeauth/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace swipeauth {

namespace {

ColumnRef parse_column_ref(const json& j) {
  ColumnRef r;
  if (j.is_number_integer()) {
    r.by_index = true;
    r.index = j.get<int>();
  } else {
    r.name = j.get<std::string>();
  }
  return r;
}

int resolve_column(const ColumnRef& ref, const std::vector<std::string>& header,
                   const std::string& field) {
  if (ref.by_index) return ref.index;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == ref.name) return static_cast<int>(i);
  throw MissingColumn("column '" + ref.name + "' (field " + field +
                      ") not found in header");
}

double parse_field(const std::vector<std::string>& row, int col,
                   std::size_t row_index, const std::string& field) {
  if (col < 0 || col >= static_cast<int>(row.size()))
    throw ParseError("row " + std::to_string(row_index) + ": missing field " + field);
  try {
    std::size_t pos = 0;
    double v = std::stod(row[static_cast<std::size_t>(col)], &pos);
    if (pos == 0) throw std::invalid_argument("empty");
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row_index) + ": cannot parse field " +
                     field + " from '" + row[static_cast<std::size_t>(col)] + "'");
  }
}

std::int64_t convert_timestamp(double v, TsUnit unit) {
  switch (unit) {
    case TsUnit::Ms: return std::llround(v);
    case TsUnit::Ns: return std::llround(v / 1e6);
    case TsUnit::S: return std::llround(v * 1000.0);
  }
  return 0;
}

TouchAction action_from_json(const std::string& s) {
  if (s == "Down") return TouchAction::Down;
  if (s == "Move") return TouchAction::Move;
  if (s == "Up") return TouchAction::Up;
  throw ParseError("unknown action name: " + s);
}

}  // namespace

ColumnMap ColumnMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open column map: " + path);
  json j = json::parse(in);
  ColumnMap m;
  for (const char* f : {"t", "x", "y", "pressure", "action"})
    m.touch[f] = parse_column_ref(j.at("touch").at(f));
  if (j.at("touch").contains("pointer_id"))
    m.touch["pointer_id"] = parse_column_ref(j.at("touch").at("pointer_id"));
  for (const char* f : {"t", "ax", "ay", "az"})
    m.accel[f] = parse_column_ref(j.at("accel").at(f));
  std::string unit = j.value("timestamp_unit", "ms");
  if (unit == "ms") m.timestamp_unit = TsUnit::Ms;
  else if (unit == "ns") m.timestamp_unit = TsUnit::Ns;
  else if (unit == "s") m.timestamp_unit = TsUnit::S;
  else throw ParseError("unknown timestamp_unit: " + unit);
  for (const auto& [code, name] : j.at("action_codes").items())
    m.action_codes[std::stoll(code)] = action_from_json(name.get<std::string>());
  m.has_header = j.value("has_header", true);
  return m;
}

ColumnMap ColumnMap::synth_default() {
  ColumnMap m;
  for (const char* f : {"t", "x", "y", "pressure", "action"}) m.touch[f] = {false, 0, f};
  for (const char* f : {"t", "ax", "ay", "az"}) m.accel[f] = {false, 0, f};
  m.action_codes = {{0, TouchAction::Down}, {1, TouchAction::Up}, {2, TouchAction::Move}};
  return m;
}

std::vector<TouchSample> read_touch_events(const std::string& path,
                                           const ColumnMap& map) {
  CsvFile csv = read_csv(path, map.has_header);
  int ct = resolve_column(map.touch.at("t"), csv.header, "t");
  int cx = resolve_column(map.touch.at("x"), csv.header, "x");
  int cy = resolve_column(map.touch.at("y"), csv.header, "y");
  int cp = resolve_column(map.touch.at("pressure"), csv.header, "pressure");
  int ca = resolve_column(map.touch.at("action"), csv.header, "action");
  int cpid = -1;
  if (map.touch.count("pointer_id"))
    cpid = resolve_column(map.touch.at("pointer_id"), csv.header, "pointer_id");
  std::vector<TouchSample> out;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    if (cpid >= 0 &&
        std::llround(parse_field(row, cpid, i, "pointer_id")) != 0)
      continue;  // multi-finger rows are not used
    auto code = std::llround(parse_field(row, ca, i, "action"));
    auto it = map.action_codes.find(code);
    if (it == map.action_codes.end()) continue;  // unmapped pointer event
    TouchSample s;
    s.t = convert_timestamp(parse_field(row, ct, i, "t"), map.timestamp_unit);
    s.x = parse_field(row, cx, i, "x");
    s.y = parse_field(row, cy, i, "y");
    s.pressure = parse_field(row, cp, i, "pressure");
    s.action = it->second;
    out.push_back(s);
  }
  return validate_stream(out);
}

std::vector<AccelSample> read_accel_events(const std::string& path,
                                           const ColumnMap& map) {
  CsvFile csv = read_csv(path, map.has_header);
  int ct = resolve_column(map.accel.at("t"), csv.header, "t");
  int cx = resolve_column(map.accel.at("ax"), csv.header, "ax");
  int cy = resolve_column(map.accel.at("ay"), csv.header, "ay");
  int cz = resolve_column(map.accel.at("az"), csv.header, "az");
  std::vector<AccelSample> out;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    AccelSample s;
    s.t = convert_timestamp(parse_field(row, ct, i, "t"), map.timestamp_unit);
    s.ax = parse_field(row, cx, i, "ax");
    s.ay = parse_field(row, cy, i, "ay");
    s.az = parse_field(row, cz, i, "az");
    out.push_back(s);
  }
  return validate_stream(out);
}

Dataset assemble_dataset(const std::string& root, const ColumnMap& map) {
  Dataset ds;
  fs::path rootp(root);
  if (!fs::exists(rootp)) throw ParseError("dataset root does not exist: " + root);

  // labels.csv: user_id,session_dir,session_index,context
  std::map<std::pair<std::string, std::string>, std::pair<int, Context>> labels;
  fs::path labels_path = rootp / "labels.csv";
  if (fs::exists(labels_path)) {
    CsvFile csv = read_csv(labels_path.string(), true);
    for (const auto& row : csv.rows) {
      if (row.size() < 4) throw ParseError("labels.csv: short row");
      labels[{row[0], row[1]}] = {std::stoi(row[2]), context_from_string(row[3])};
    }
  }

  std::vector<std::string> user_dirs;
  for (const auto& e : fs::directory_iterator(rootp))
    if (e.is_directory()) user_dirs.push_back(e.path().filename().string());
  std::sort(user_dirs.begin(), user_dirs.end());

  for (const auto& user : user_dirs) {
    UserData ud;
    ud.user = user;
    std::vector<std::string> session_dirs;
    for (const auto& e : fs::directory_iterator(rootp / user))
      if (e.is_directory()) session_dirs.push_back(e.path().filename().string());
    std::sort(session_dirs.begin(), session_dirs.end());
    for (const auto& sdir : session_dirs) {
      fs::path touch_path = rootp / user / sdir / "touch.csv";
      fs::path accel_path = rootp / user / sdir / "accel.csv";
      if (!fs::exists(touch_path)) continue;
      auto it = labels.find({user, sdir});
      if (it == labels.end())
        throw LabelMissing("no context label for " + user + "/" + sdir);
      SessionData sd;
      sd.id.user = user;
      sd.id.session_index = it->second.first;
      sd.id.context = it->second.second;
      try {
        sd.touch = read_touch_events(touch_path.string(), map);
        sd.accel = read_accel_events(accel_path.string(), map);
      } catch (const EmptyStream&) {
        ds.warnings.push_back("skipping empty session " + user + "/" + sdir);
        continue;
      }
      ud.sessions.push_back(std::move(sd));
    }
    if (ud.sessions.empty()) {
      ds.warnings.push_back("user " + user + " has no usable sessions");
      continue;
    }
    std::sort(ud.sessions.begin(), ud.sessions.end(),
              [](const SessionData& a, const SessionData& b) {
                if (a.id.context != b.id.context) return a.id.context < b.id.context;
                return a.id.session_index < b.id.session_index;
              });
    ds.users.push_back(std::move(ud));
  }
  return ds;
}

namespace {

// Latent per-user swipe style. Vertical swipes carry the full between-user
// separation; horizontal swipes (navigation noise) carry a dampened one.
struct UserStyle {
  double len_v, speed_v, press_v, bow_v;
  double len_h, speed_h, press_h, bow_h;
  double tremor, gmag, walk_amp, walk_freq;
  double phase1, phase2;
  double start_x, start_y;
  std::array<double, 4> len_mult, speed_mult, press_mult;  // per context
};

constexpr double kTwoPi = 6.283185307179586;
constexpr double kHorizontalDamp = 0.4;

// Stratified lattice positions in [-1, 1]: a seeded permutation per
// attribute keeps users apart on every axis once user_separation grows.
std::vector<double> lattice(std::uint64_t seed, std::uint64_t attr, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(Rng::derive(seed, 100 + attr));
  rng.shuffle(perm);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = 2.0 * (perm[static_cast<std::size_t>(i)] + 0.5) / n - 1.0;
  return out;
}

}  // namespace

Dataset generate_synthetic(const SynthConfig& cfg) {
  if (cfg.n_users < 2) throw InvalidConfig("n_users must be >= 2");
  if (cfg.swipes_per_session < 25)
    throw InvalidConfig("swipes_per_session must be >= 25");
  if (cfg.contexts.empty()) throw InvalidConfig("contexts must be non-empty");
  if (cfg.user_separation < 0.0) throw InvalidConfig("user_separation must be >= 0");
  if (cfg.walk_noise < 0.0) throw InvalidConfig("walk_noise must be >= 0");

  const int n = cfg.n_users;
  const double sep = cfg.user_separation;
  auto lat_len = lattice(cfg.rng_seed, 0, n);
  auto lat_speed = lattice(cfg.rng_seed, 1, n);
  auto lat_press = lattice(cfg.rng_seed, 2, n);
  auto lat_bow = lattice(cfg.rng_seed, 3, n);
  auto lat_tremor = lattice(cfg.rng_seed, 4, n);
  auto lat_gmag = lattice(cfg.rng_seed, 5, n);
  auto lat_wamp = lattice(cfg.rng_seed, 6, n);
  auto lat_wfreq = lattice(cfg.rng_seed, 7, n);

  std::vector<UserStyle> styles(static_cast<std::size_t>(n));
  for (int u = 0; u < n; ++u) {
    Rng ur(Rng::derive(cfg.rng_seed, 1000 + static_cast<std::uint64_t>(u)));
    auto& st = styles[static_cast<std::size_t>(u)];
    auto ui = static_cast<std::size_t>(u);
    st.len_v = 500.0 * std::exp(0.12 * sep * lat_len[ui] + 0.02 * ur.normal());
    st.speed_v = 800.0 * std::exp(0.12 * sep * lat_speed[ui] + 0.02 * ur.normal());
    st.press_v = 0.5 * std::exp(0.15 * sep * lat_press[ui] + 0.02 * ur.normal());
    st.bow_v = 0.08 * (0.6 * sep * lat_bow[ui] + 0.05 * ur.normal());
    st.len_h = 450.0 * std::exp(0.12 * kHorizontalDamp * sep * lat_len[ui] + 0.02 * ur.normal());
    st.speed_h = 850.0 * std::exp(0.12 * kHorizontalDamp * sep * lat_speed[ui] + 0.02 * ur.normal());
    st.press_h = 0.5 * std::exp(0.15 * kHorizontalDamp * sep * lat_press[ui] + 0.02 * ur.normal());
    st.bow_h = 0.08 * (0.6 * kHorizontalDamp * sep * lat_bow[ui] + 0.05 * ur.normal());
    st.tremor = 0.02 * std::exp(0.20 * sep * lat_tremor[ui] + 0.05 * ur.normal());
    st.gmag = 9.81 * (1.0 + 0.004 * sep * lat_gmag[ui] + 0.0003 * ur.normal());
    st.walk_amp = std::exp(0.25 * sep * lat_wamp[ui] + 0.05 * ur.normal());
    st.walk_freq = 2.0 * std::exp(0.10 * sep * lat_wfreq[ui] + 0.02 * ur.normal());
    st.phase1 = ur.uniform(0.0, kTwoPi);
    st.phase2 = ur.uniform(0.0, kTwoPi);
    // position habits saturate: at low separation they barely matter, at
    // high separation they stay bounded by the screen
    const double pos_sep = std::min(1.0, 0.35 * sep);
    st.start_x = 540.0 + 120.0 * pos_sep * ur.uniform(-1.0, 1.0);
    st.start_y = 1300.0 + 150.0 * pos_sep * ur.uniform(-1.0, 1.0);
    for (int c = 0; c < 4; ++c) {
      st.len_mult[static_cast<std::size_t>(c)] = std::exp(0.10 * ur.uniform(-1.0, 1.0));
      st.speed_mult[static_cast<std::size_t>(c)] = std::exp(0.10 * ur.uniform(-1.0, 1.0));
      st.press_mult[static_cast<std::size_t>(c)] = std::exp(0.10 * ur.uniform(-1.0, 1.0));
    }
  }

  Dataset ds;
  for (int u = 0; u < n; ++u) {
    const auto& st = styles[static_cast<std::size_t>(u)];
    UserData ud;
    char name[16];
    std::snprintf(name, sizeof(name), "u%03d", u + 1);
    ud.user = name;
    for (Context ctx : cfg.contexts) {
      auto ci = static_cast<std::size_t>(static_cast<int>(ctx));
      for (int sess = 1; sess <= 4; ++sess) {
        std::uint64_t stream =
            2000 + ((static_cast<std::uint64_t>(u) * 4 + ci) * 8 +
                    static_cast<std::uint64_t>(sess));
        Rng sr(Rng::derive(cfg.rng_seed, stream));
        SessionData sd;
        sd.id.user = ud.user;
        sd.id.session_index = sess;
        sd.id.context = ctx;

        const bool walking = is_walking(ctx);
        const double p_vertical = is_reading(ctx) ? 0.95 : 0.55;
        const double touch_noise = walking ? 2.0 : 1.0;
        const double ctx_len = is_reading(ctx) ? 1.25 : 0.8;
        const double ctx_speed = walking ? 0.9 : 1.0;

        std::int64_t cursor = 0;
        // per-swipe style drift is what keeps genuine and impostor score
        // distributions overlapping at low separation; walking amplifies it
        const double swipe_jitter = 0.05 * touch_noise;
        for (int sw = 0; sw < cfg.swipes_per_session; ++sw) {
          const bool vertical = sr.uniform() < p_vertical;
          double len = (vertical ? st.len_v : st.len_h) * st.len_mult[ci] * ctx_len *
                       std::exp(swipe_jitter * sr.normal());
          double speed = (vertical ? st.speed_v : st.speed_h) * st.speed_mult[ci] *
                         ctx_speed * std::exp(swipe_jitter * sr.normal());
          double press = (vertical ? st.press_v : st.press_h) * st.press_mult[ci] *
                         std::exp(swipe_jitter * sr.normal());
          double bow = (vertical ? st.bow_v : st.bow_h) +
                       0.02 * touch_noise * sr.normal();
          double base_angle = vertical ? (sr.uniform() < 0.8 ? -kTwoPi / 4 : kTwoPi / 4)
                                       : (sr.uniform() < 0.5 ? 0.0 : kTwoPi / 2);
          double angle = base_angle + 0.05 * touch_noise * sr.normal();
          double dirx = std::cos(angle), diry = std::sin(angle);
          double perpx = -diry, perpy = dirx;
          double x0 = st.start_x + 40.0 * touch_noise * sr.normal();
          double y0 = st.start_y + 60.0 * touch_noise * sr.normal();
          int npts = static_cast<int>(std::lround(len / speed / 0.012));
          npts = std::min(100, std::max(8, npts));
          std::int64_t t = cursor;
          for (int i = 0; i < npts; ++i) {
            double s = static_cast<double>(i) / (npts - 1);
            double along = s * len + 1.5 * touch_noise * sr.normal();
            double lateral = bow * len * 4.0 * s * (1.0 - s) + 1.0 * touch_noise * sr.normal();
            TouchSample ts;
            ts.t = t;
            ts.x = x0 + dirx * along + perpx * lateral;
            ts.y = y0 + diry * along + perpy * lateral;
            ts.pressure = std::max(
                0.01, press * (1.0 + 0.08 * std::sin(3.14159265358979 * s)) +
                          0.01 * touch_noise * sr.normal());
            ts.action = i == 0 ? TouchAction::Down
                               : (i == npts - 1 ? TouchAction::Up : TouchAction::Move);
            sd.touch.push_back(ts);
            t += 10 + sr.uniform_int(0, 4);
          }
          cursor = t + 800 + sr.uniform_int(0, 1200);
        }

        // 50 Hz accelerometer stream covering every swipe window
        std::int64_t t_last = sd.touch.back().t;
        for (std::int64_t t = -1000; t <= t_last + 1000; t += 20) {
          double tsec = static_cast<double>(t) / 1000.0;
          double mag = st.gmag +
                       st.tremor * std::sin(kTwoPi * 1.3 * tsec + st.phase1) +
                       0.03 * sr.normal();
          if (walking)
            mag += cfg.walk_noise * st.walk_amp *
                   std::sin(kTwoPi * st.walk_freq * tsec + st.phase2);
          AccelSample as;
          as.t = t;
          as.ax = 0.02 * sr.normal();
          as.ay = 0.02 * sr.normal();
          double rem = mag * mag - as.ax * as.ax - as.ay * as.ay;
          as.az = std::sqrt(std::max(rem, 1e-4));
          sd.accel.push_back(as);
        }

        sd.touch = validate_stream(sd.touch);
        sd.accel = validate_stream(sd.accel);
        ud.sessions.push_back(std::move(sd));
      }
    }
    ds.users.push_back(std::move(ud));
  }
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& root) {
  fs::path rootp(root);
  fs::create_directories(rootp);
  std::ofstream labels(rootp / "labels.csv");
  labels << "user_id,session_dir,session_index,context\n";
  for (const auto& ud : ds.users) {
    for (const auto& sd : ud.sessions) {
      std::string sdir = std::string(to_string(sd.id.context)) + "_" +
                         std::to_string(sd.id.session_index);
      fs::create_directories(rootp / ud.user / sdir);
      labels << ud.user << "," << sdir << "," << sd.id.session_index << ","
             << to_string(sd.id.context) << "\n";
      std::ofstream touch(rootp / ud.user / sdir / "touch.csv");
      touch << "t,x,y,pressure,action\n";
      for (const auto& s : sd.touch) {
        int code = s.action == TouchAction::Down ? 0
                   : s.action == TouchAction::Up ? 1 : 2;
        touch << s.t << "," << fmt_double(s.x) << "," << fmt_double(s.y) << ","
              << fmt_double(s.pressure) << "," << code << "\n";
      }
      std::ofstream accel(rootp / ud.user / sdir / "accel.csv");
      accel << "t,ax,ay,az\n";
      for (const auto& s : sd.accel)
        accel << s.t << "," << fmt_double(s.ax) << "," << fmt_double(s.ay)
              << "," << fmt_double(s.az) << "\n";
    }
  }
}

}  // namespace swipeauth
