#include "swipeauth/core.hpp"

namespace swipeauth {

const char* to_string(Context c) {
  switch (c) {
    case Context::S1_ReadSit: return "S1";
    case Context::S2_ReadWalk: return "S2";
    case Context::S3_MapSit: return "S3";
    case Context::S4_MapWalk: return "S4";
  }
  return "S?";
}

Context context_from_string(const std::string& s) {
  if (s == "S1") return Context::S1_ReadSit;
  if (s == "S2") return Context::S2_ReadWalk;
  if (s == "S3") return Context::S3_MapSit;
  if (s == "S4") return Context::S4_MapWalk;
  throw ParseError("unknown context label: " + s);
}

}  // namespace swipeauth
