#include "doctest.h"
#include "swipeauth/core.hpp"
#include "swipeauth/rng.hpp"

using namespace swipeauth;

TEST_CASE("accel_magnitude on known triples") {
  CHECK(accel_magnitude({0, 3, 4, 0}) == doctest::Approx(5.0));
  CHECK(accel_magnitude({0, 0, 0, 0}) == doctest::Approx(0.0));
  CHECK(accel_magnitude({0, 1, 2, 2}) == doctest::Approx(3.0));
}

TEST_CASE("accel_magnitude is permutation and sign invariant") {
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    double a = rng.normal(0, 5), b = rng.normal(0, 5), c = rng.normal(0, 5);
    double base = accel_magnitude({0, a, b, c});
    CHECK(accel_magnitude({0, c, a, b}) == doctest::Approx(base));
    CHECK(accel_magnitude({0, -a, b, -c}) == doctest::Approx(base));
  }
}

TEST_CASE("validate_stream basics") {
  std::vector<AccelSample> in = {{1, 1, 0, 0}, {2, 2, 0, 0}, {3, 3, 0, 0}};
  auto out = validate_stream(in);
  REQUIRE(out.size() == 3);
  CHECK(out[0].t == 1);
  CHECK(out[2].t == 3);
}

TEST_CASE("validate_stream dedups keeping the first occurrence") {
  std::vector<AccelSample> in = {{1, 1, 0, 0}, {1, 99, 0, 0}, {2, 2, 0, 0}};
  auto out = validate_stream(in);
  REQUIRE(out.size() == 2);
  CHECK(out[0].ax == 1);  // first occurrence wins
  CHECK(out[1].t == 2);
}

TEST_CASE("validate_stream sorts out-of-order samples stably") {
  std::vector<AccelSample> in = {{5, 1, 0, 0}, {2, 2, 0, 0}, {5, 3, 0, 0}};
  auto out = validate_stream(in);
  REQUIRE(out.size() == 2);
  CHECK(out[0].t == 2);
  CHECK(out[1].ax == 1);  // stable: first t=5 sample kept
}

TEST_CASE("validate_stream rejects empty input") {
  std::vector<AccelSample> in;
  CHECK_THROWS_AS(validate_stream(in), EmptyStream);
}

TEST_CASE("validate_stream is idempotent and never grows") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<AccelSample> in;
    int n = static_cast<int>(rng.uniform_int(1, 40));
    for (int i = 0; i < n; ++i)
      in.push_back({rng.uniform_int(0, 20), rng.normal(), 0, 0});
    auto once = validate_stream(in);
    auto twice = validate_stream(once);
    CHECK(once.size() <= in.size());
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i].t == twice[i].t);
      CHECK(once[i].ax == twice[i].ax);
    }
  }
}

TEST_CASE("context labels round trip") {
  for (Context c : kAllContexts) CHECK(context_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(context_from_string("S9"), ParseError);
}
