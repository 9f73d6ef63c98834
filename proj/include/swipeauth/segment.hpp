#pragma once

#include <cstdint>
#include <vector>

#include "swipeauth/core.hpp"

namespace swipeauth {

struct MagSample {
  std::int64_t t = 0;
  double mag = 0.0;
};

// One segmented gesture: Down, Move*, Up with more than five samples, plus
// the three accelerometer magnitude windows attached by attach_motion.
struct Swipe {
  SessionId session;
  std::vector<TouchSample> samples;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::vector<MagSample> mag_pre;     // [t_start - 500, t_start)
  std::vector<MagSample> mag_during;  // [t_start, t_end]
  std::vector<MagSample> mag_post;    // (t_end, t_end + 500]
};

enum class DirectionClass { Vertical, Horizontal };

inline constexpr std::int64_t kMotionWindowMs = 500;
inline constexpr std::size_t kMinSwipeSamples = 6;  // "more than five"

// Vertical iff |end_y - start_y| >= |end_x - start_x| (diagonal ties vertical).
DirectionClass direction_of(const Swipe& s);

// Cuts a validated touch stream into maximal Down..Up runs. Runs with <= 5
// samples, runs ending without an Up, and runs spanning an inter-sample gap
// larger than max_gap_ms are discarded. Output ordered by t_start.
std::vector<Swipe> segment_swipes(const std::vector<TouchSample>& touch,
                                  std::int64_t max_gap_ms = 2000);

// Fills mag_pre / mag_during / mag_post from a validated accelerometer
// stream of the same session. Windows may come out empty.
void attach_motion(std::vector<Swipe>& swipes,
                   const std::vector<AccelSample>& accel);

std::vector<Swipe> filter_direction(const std::vector<Swipe>& swipes,
                                    DirectionClass keep);

}  // namespace swipeauth
