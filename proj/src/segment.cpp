#include "swipeauth/segment.hpp"

#include <algorithm>
#include <cmath>

namespace swipeauth {

DirectionClass direction_of(const Swipe& s) {
  double dx = s.samples.back().x - s.samples.front().x;
  double dy = s.samples.back().y - s.samples.front().y;
  return std::abs(dy) >= std::abs(dx) ? DirectionClass::Vertical
                                      : DirectionClass::Horizontal;
}

std::vector<Swipe> segment_swipes(const std::vector<TouchSample>& touch,
                                  std::int64_t max_gap_ms) {
  std::vector<Swipe> out;
  std::vector<TouchSample> run;
  bool open = false;
  for (const auto& s : touch) {
    if (open && !run.empty() && s.t - run.back().t > max_gap_ms) {
      // logger dropout: the accumulated fragment has no Up, discard it
      run.clear();
      open = false;
    }
    switch (s.action) {
      case TouchAction::Down:
        run.clear();
        run.push_back(s);
        open = true;
        break;
      case TouchAction::Move:
        if (open) run.push_back(s);
        break;
      case TouchAction::Up:
        if (open) {
          run.push_back(s);
          if (run.size() >= kMinSwipeSamples) {
            Swipe sw;
            sw.samples = run;
            sw.t_start = run.front().t;
            sw.t_end = run.back().t;
            out.push_back(std::move(sw));
          }
          run.clear();
          open = false;
        }
        break;
    }
  }
  return out;  // trailing run without Up is dropped
}

void attach_motion(std::vector<Swipe>& swipes,
                   const std::vector<AccelSample>& accel) {
  auto lower = [&](std::int64_t t) {
    return std::lower_bound(
        accel.begin(), accel.end(), t,
        [](const AccelSample& a, std::int64_t v) { return a.t < v; });
  };
  for (auto& sw : swipes) {
    sw.mag_pre.clear();
    sw.mag_during.clear();
    sw.mag_post.clear();
    for (auto it = lower(sw.t_start - kMotionWindowMs);
         it != accel.end() && it->t < sw.t_start; ++it)
      sw.mag_pre.push_back({it->t, accel_magnitude(*it)});
    for (auto it = lower(sw.t_start); it != accel.end() && it->t <= sw.t_end;
         ++it)
      sw.mag_during.push_back({it->t, accel_magnitude(*it)});
    for (auto it = lower(sw.t_end + 1);
         it != accel.end() && it->t <= sw.t_end + kMotionWindowMs; ++it)
      sw.mag_post.push_back({it->t, accel_magnitude(*it)});
  }
}

std::vector<Swipe> filter_direction(const std::vector<Swipe>& swipes,
                                    DirectionClass keep) {
  std::vector<Swipe> out;
  for (const auto& s : swipes)
    if (direction_of(s) == keep) out.push_back(s);
  return out;
}

}  // namespace swipeauth
