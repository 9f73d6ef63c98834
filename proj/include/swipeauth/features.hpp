#pragma once

#include <string>
#include <vector>

#include "swipeauth/segment.hpp"

namespace swipeauth {

inline constexpr int kTouchFeatureCount = 117;
inline constexpr int kMotionFeatureCount = 94;
inline constexpr int kFeatureCount = 211;

enum class Channel { Touch, Motion };

enum class FeatureSet { Touch, Motion, Fusion };

const char* to_string(FeatureSet fs);
FeatureSet feature_set_from_string(const std::string& s);

// Global catalog column indices selected by a feature set.
std::vector<int> columns_for(FeatureSet fs);

struct FeatureId {
  int index;          // 0..210; 0..116 Touch, 117..210 Motion
  std::string name;   // unique
  std::string group;
  Channel channel;
};

// The frozen feature registry. Order is the extraction order and is stable
// across runs; REGISTRY.json is the committed dump of this list.
const std::vector<FeatureId>& feature_catalog();

std::vector<double> extract_touch(const Swipe& sw);   // 117 values
std::vector<double> extract_motion(const Swipe& sw);  // 94 values
std::vector<double> extract(const Swipe& sw);         // 211 values

}  // namespace swipeauth
