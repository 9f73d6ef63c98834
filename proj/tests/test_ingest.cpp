#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "doctest.h"
#include "swipeauth/ingest.hpp"
#include "swipeauth/segment.hpp"

using namespace swipeauth;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("swipeauth_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
  if (a.users.size() != b.users.size()) return false;
  for (std::size_t u = 0; u < a.users.size(); ++u) {
    const auto& ua = a.users[u];
    const auto& ub = b.users[u];
    if (ua.user != ub.user || ua.sessions.size() != ub.sessions.size()) return false;
    for (std::size_t s = 0; s < ua.sessions.size(); ++s) {
      const auto& sa = ua.sessions[s];
      const auto& sb = ub.sessions[s];
      if (sa.id.context != sb.id.context) return false;
      if (sa.touch.size() != sb.touch.size() || sa.accel.size() != sb.accel.size())
        return false;
      for (std::size_t i = 0; i < sa.touch.size(); ++i) {
        if (sa.touch[i].t != sb.touch[i].t || sa.touch[i].x != sb.touch[i].x ||
            sa.touch[i].y != sb.touch[i].y ||
            sa.touch[i].pressure != sb.touch[i].pressure ||
            sa.touch[i].action != sb.touch[i].action)
          return false;
      }
      for (std::size_t i = 0; i < sa.accel.size(); ++i) {
        if (sa.accel[i].t != sb.accel[i].t || sa.accel[i].ax != sb.accel[i].ax ||
            sa.accel[i].ay != sb.accel[i].ay || sa.accel[i].az != sb.accel[i].az)
          return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("read_touch_events parses a small header CSV") {
  TempDir dir;
  write_file(dir.path / "touch.csv",
             "t,x,y,pressure,action\n"
             "100,10.5,20.25,0.5,0\n"
             "110,11,21,0.55,2\n"
             "120,12,22,0.6,1\n");
  auto events = read_touch_events((dir.path / "touch.csv").string(),
                                  ColumnMap::synth_default());
  REQUIRE(events.size() == 3);
  CHECK(events[0].t == 100);
  CHECK(events[0].action == TouchAction::Down);
  CHECK(events[1].x == 11.0);
  CHECK(events[1].action == TouchAction::Move);
  CHECK(events[2].pressure == 0.6);
  CHECK(events[2].action == TouchAction::Up);
}

TEST_CASE("unmapped action codes are dropped, not fatal") {
  TempDir dir;
  write_file(dir.path / "touch.csv",
             "t,x,y,pressure,action\n"
             "100,1,1,0.5,0\n"
             "105,1,1,0.5,7\n"  // e.g. a hover event
             "110,1,1,0.5,1\n");
  auto events = read_touch_events((dir.path / "touch.csv").string(),
                                  ColumnMap::synth_default());
  CHECK(events.size() == 2);
}

TEST_CASE("missing header column raises MissingColumn") {
  TempDir dir;
  write_file(dir.path / "touch.csv", "t,x,y,action\n100,1,1,0\n");
  CHECK_THROWS_AS(read_touch_events((dir.path / "touch.csv").string(),
                                    ColumnMap::synth_default()),
                  MissingColumn);
}

TEST_CASE("malformed numeric field raises ParseError") {
  TempDir dir;
  write_file(dir.path / "accel.csv", "t,ax,ay,az\n100,abc,0,9.8\n");
  CHECK_THROWS_AS(read_accel_events((dir.path / "accel.csv").string(),
                                    ColumnMap::synth_default()),
                  ParseError);
}

TEST_CASE("index-based column map without header") {
  TempDir dir;
  write_file(dir.path / "map.json", R"({
    "touch": {"t": 0, "x": 1, "y": 2, "pressure": 3, "action": 4},
    "accel": {"t": 0, "ax": 1, "ay": 2, "az": 3},
    "timestamp_unit": "ms",
    "has_header": false,
    "action_codes": {"0": "Down", "1": "Up", "2": "Move"}
  })");
  write_file(dir.path / "touch.csv", "50,1,2,0.4,0\n60,1,2,0.4,1\n");
  auto map = ColumnMap::load((dir.path / "map.json").string());
  auto events = read_touch_events((dir.path / "touch.csv").string(), map);
  REQUIRE(events.size() == 2);
  CHECK(events[0].t == 50);
}

TEST_CASE("nanosecond timestamps convert to milliseconds") {
  TempDir dir;
  write_file(dir.path / "map.json", R"({
    "touch": {"t": 0, "x": 1, "y": 2, "pressure": 3, "action": 4},
    "accel": {"t": 0, "ax": 1, "ay": 2, "az": 3},
    "timestamp_unit": "ns",
    "has_header": false,
    "action_codes": {"0": "Down", "1": "Up"}
  })");
  write_file(dir.path / "accel.csv", "250000000,0,0,9.8\n");
  auto map = ColumnMap::load((dir.path / "map.json").string());
  auto events = read_accel_events((dir.path / "accel.csv").string(), map);
  REQUIRE(events.size() == 1);
  CHECK(events[0].t == 250);
}

TEST_CASE("synthetic generation is deterministic") {
  SynthConfig cfg;
  cfg.n_users = 3;
  cfg.swipes_per_session = 25;
  auto a = generate_synthetic(cfg);
  auto b = generate_synthetic(cfg);
  CHECK(datasets_equal(a, b));
  cfg.rng_seed = 2;
  auto c = generate_synthetic(cfg);
  CHECK(!datasets_equal(a, c));
}

TEST_CASE("synthetic dataset has the requested shape") {
  SynthConfig cfg;
  cfg.n_users = 4;
  cfg.swipes_per_session = 25;
  cfg.contexts = {Context::S1_ReadSit, Context::S3_MapSit};
  auto ds = generate_synthetic(cfg);
  REQUIRE(ds.users.size() == 4);
  CHECK(ds.users[0].user == "u001");
  CHECK(ds.users[3].user == "u004");
  for (const auto& ud : ds.users) {
    CHECK(ud.sessions.size() == 8);  // 2 contexts x 4 sessions
    for (const auto& sd : ud.sessions) {
      CHECK(!sd.touch.empty());
      CHECK(!sd.accel.empty());
      // accel stream spans every swipe's motion windows
      CHECK(sd.accel.front().t <= sd.touch.front().t - 500);
      CHECK(sd.accel.back().t >= sd.touch.back().t + 500);
    }
  }
}

TEST_CASE("synthetic config validation") {
  SynthConfig cfg;
  cfg.n_users = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
  cfg.n_users = 3;
  cfg.swipes_per_session = 10;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
  cfg.swipes_per_session = 25;
  cfg.contexts.clear();
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
  cfg = SynthConfig{};
  cfg.user_separation = -1.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), InvalidConfig);
}

TEST_CASE("reading sessions are predominantly vertical after segmentation") {
  SynthConfig cfg;
  cfg.n_users = 3;
  cfg.swipes_per_session = 40;
  cfg.contexts = {Context::S1_ReadSit};
  auto ds = generate_synthetic(cfg);
  int vertical = 0, total = 0;
  for (const auto& ud : ds.users) {
    for (const auto& sd : ud.sessions) {
      auto swipes = segment_swipes(sd.touch);
      for (const auto& sw : swipes) {
        ++total;
        if (direction_of(sw) == DirectionClass::Vertical) ++vertical;
      }
    }
  }
  CHECK(total > 0);
  CHECK(vertical * 10 >= total * 9);  // >= 90 %
}

TEST_CASE("write_dataset then assemble_dataset round trips") {
  SynthConfig cfg;
  cfg.n_users = 2;
  cfg.swipes_per_session = 25;
  cfg.contexts = {Context::S2_ReadWalk};
  auto ds = generate_synthetic(cfg);
  TempDir dir;
  write_dataset(ds, dir.path.string());
  auto back = assemble_dataset(dir.path.string(), ColumnMap::synth_default());
  CHECK(back.warnings.empty());
  CHECK(datasets_equal(ds, back));
}

TEST_CASE("assemble_dataset requires a label for every session") {
  SynthConfig cfg;
  cfg.n_users = 2;
  cfg.swipes_per_session = 25;
  cfg.contexts = {Context::S1_ReadSit};
  auto ds = generate_synthetic(cfg);
  TempDir dir;
  write_dataset(ds, dir.path.string());
  // drop the last labels.csv line
  std::ifstream in(dir.path / "labels.csv");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  auto cut = text.rfind("u002,S1_4");
  REQUIRE(cut != std::string::npos);
  write_file(dir.path / "labels.csv", text.substr(0, cut));
  CHECK_THROWS_AS(assemble_dataset(dir.path.string(), ColumnMap::synth_default()),
                  LabelMissing);
}

TEST_CASE("assemble_dataset warns about empty sessions and users") {
  TempDir dir;
  write_file(dir.path / "labels.csv",
             "user_id,session_dir,session_index,context\n"
             "u001,S1_1,1,S1\n");
  fs::create_directories(dir.path / "u001" / "S1_1");
  write_file(dir.path / "u001" / "S1_1" / "touch.csv", "t,x,y,pressure,action\n");
  write_file(dir.path / "u001" / "S1_1" / "accel.csv", "t,ax,ay,az\n");
  auto ds = assemble_dataset(dir.path.string(), ColumnMap::synth_default());
  CHECK(ds.users.empty());
  CHECK(ds.warnings.size() == 2);  // empty session, then user without sessions
}

TEST_CASE("assemble_dataset on an empty root yields no users") {
  TempDir dir;
  auto ds = assemble_dataset(dir.path.string(), ColumnMap::synth_default());
  CHECK(ds.users.empty());
  CHECK_THROWS_AS(assemble_dataset((dir.path / "missing").string(),
                                   ColumnMap::synth_default()),
                  ParseError);
}

TEST_CASE("sessions come out sorted by context then index") {
  SynthConfig cfg;
  cfg.n_users = 2;
  cfg.swipes_per_session = 25;
  auto ds = generate_synthetic(cfg);
  TempDir dir;
  write_dataset(ds, dir.path.string());
  auto back = assemble_dataset(dir.path.string(), ColumnMap::synth_default());
  for (const auto& ud : back.users) {
    for (std::size_t i = 1; i < ud.sessions.size(); ++i) {
      const auto& a = ud.sessions[i - 1].id;
      const auto& b = ud.sessions[i].id;
      CHECK((a.context < b.context ||
             (a.context == b.context && a.session_index < b.session_index)));
    }
  }
}
