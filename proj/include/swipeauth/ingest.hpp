#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "swipeauth/core.hpp"

namespace swipeauth {

// Reference into a CSV file: either a header name or a 0-based index.
struct ColumnRef {
  bool by_index = false;
  int index = 0;
  std::string name;
};

enum class TsUnit { Ms, Ns, S };

// Externalized adapter from source CSV schemas to the logical fields.
struct ColumnMap {
  std::map<std::string, ColumnRef> touch;  // t, x, y, pressure, action [, pointer_id]
  std::map<std::string, ColumnRef> accel;  // t, ax, ay, az
  TsUnit timestamp_unit = TsUnit::Ms;
  std::map<long long, TouchAction> action_codes;
  bool has_header = true;

  static ColumnMap load(const std::string& path);
  // Mapping for datasets written by write_dataset / the synth generator.
  static ColumnMap synth_default();
};

// Reads and validates one event file. Rows with unmapped action codes or a
// non-primary pointer id are dropped.
std::vector<TouchSample> read_touch_events(const std::string& path,
                                           const ColumnMap& map);
std::vector<AccelSample> read_accel_events(const std::string& path,
                                           const ColumnMap& map);

struct SessionData {
  SessionId id;
  std::vector<TouchSample> touch;
  std::vector<AccelSample> accel;
};

struct UserData {
  std::string user;
  std::vector<SessionData> sessions;  // ordered by (context, session_index)
};

struct Dataset {
  std::vector<UserData> users;  // ordered by user id
  std::vector<std::string> warnings;
};

// Layout: <root>/<user>/<session_dir>/{touch.csv,accel.csv} plus
// <root>/labels.csv with user_id,session_dir,session_index,context.
Dataset assemble_dataset(const std::string& root, const ColumnMap& map);

struct SynthConfig {
  int n_users = 5;
  int swipes_per_session = 30;
  std::set<Context> contexts = {Context::S1_ReadSit, Context::S2_ReadWalk,
                                Context::S3_MapSit, Context::S4_MapWalk};
  double user_separation = 1.0;
  double walk_noise = 1.0;
  std::uint64_t rng_seed = 1;
};

// Deterministic raw-event generator; same config => bit-identical dataset.
Dataset generate_synthetic(const SynthConfig& cfg);

// Writes a Dataset in the assemble_dataset layout (byte-deterministic).
void write_dataset(const Dataset& ds, const std::string& root);

}  // namespace swipeauth
