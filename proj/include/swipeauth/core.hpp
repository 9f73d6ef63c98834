#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace swipeauth {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyStream : Error {
  EmptyStream() : Error("empty stream") {}
};
struct ParseError : Error {
  using Error::Error;
};
struct MissingColumn : Error {
  using Error::Error;
};
struct LabelMissing : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct TooFewPoints : Error {
  using Error::Error;
};
struct InsufficientFeatures : Error {
  using Error::Error;
};
struct EmptyScores : Error {
  EmptyScores() : Error("empty score list") {}
};
struct DegenerateData : Error {
  using Error::Error;
};

enum class TouchAction { Down, Move, Up };

struct TouchSample {
  std::int64_t t = 0;  // ms
  double x = 0.0;      // px
  double y = 0.0;      // px
  double pressure = 0.0;
  TouchAction action = TouchAction::Move;
};

struct AccelSample {
  std::int64_t t = 0;  // ms
  double ax = 0.0, ay = 0.0, az = 0.0;  // m/s^2
};

enum class Context { S1_ReadSit = 0, S2_ReadWalk = 1, S3_MapSit = 2, S4_MapWalk = 3 };

inline constexpr Context kAllContexts[] = {Context::S1_ReadSit, Context::S2_ReadWalk,
                                           Context::S3_MapSit, Context::S4_MapWalk};

const char* to_string(Context c);
Context context_from_string(const std::string& s);  // accepts "S1".."S4"

inline bool is_reading(Context c) {
  return c == Context::S1_ReadSit || c == Context::S2_ReadWalk;
}
inline bool is_walking(Context c) {
  return c == Context::S2_ReadWalk || c == Context::S4_MapWalk;
}

struct SessionId {
  std::string user;
  int session_index = 1;  // 1..4
  Context context = Context::S1_ReadSit;
};

inline double accel_magnitude(const AccelSample& s) {
  return std::sqrt(s.ax * s.ax + s.ay * s.ay + s.az * s.az);
}

// Stable-sorts by timestamp and collapses duplicate timestamps keeping the
// first occurrence. Throws EmptyStream on empty input.
template <class Sample>
std::vector<Sample> validate_stream(std::vector<Sample> samples) {
  if (samples.empty()) throw EmptyStream();
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.t < b.t; });
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (out.empty() || s.t != out.back().t) out.push_back(s);
  }
  return out;
}

}  // namespace swipeauth
