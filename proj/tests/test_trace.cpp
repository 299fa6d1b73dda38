#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "vitalwave/random.hpp"
#include "vitalwave/trace.hpp"

using namespace vitalwave;
using Catch::Approx;

TEST_CASE("make_trace validates its inputs", "[trace]") {
  SECTION("minimal valid input") {
    const Trace t = make_trace(250.0, 0.0, {0.0, 0.0, 0.0}, Site::wrist);
    REQUIRE(t.size() == 3);
    REQUIRE(t.site() == Site::wrist);
  }
  SECTION("empty rejection") {
    REQUIRE_THROWS_AS(make_trace(250.0, 0.0, {}), EmptySamples);
  }
  SECTION("rate validation") {
    REQUIRE_THROWS_AS(make_trace(0.0, 0.0, {1.0}), NonPositiveRate);
    REQUIRE_THROWS_AS(make_trace(-10.0, 0.0, {1.0}), NonPositiveRate);
  }
  SECTION("non-finite sample carries its index") {
    try {
      make_trace(250.0, 0.0, {0.0, std::nan(""), 0.0});
      FAIL("expected NonFiniteSample");
    } catch (const NonFiniteSample& e) {
      REQUIRE(e.index() == 1);
    }
  }
  SECTION("accessors round-trip all fields") {
    const std::vector<double> samples{0.5, -1.25, 3.75};
    const Trace t = make_trace(125.0, 2.5, samples, Site::ankle);
    REQUIRE(t.sample_rate() == 125.0);
    REQUIRE(t.start_time() == 2.5);
    REQUIRE(t.site() == Site::ankle);
    REQUIRE(t.samples() == samples);
  }
}

TEST_CASE("segment arithmetic", "[trace]") {
  std::vector<double> ramp(2500);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  const Trace t = make_trace(250.0, 0.0, ramp);

  SECTION("two-second window at 250 Hz") {
    const Trace s = segment(t, 2.0, 4.0);
    REQUIRE(s.size() == 500);
    REQUIRE(s.start_time() == Approx(2.0));
    REQUIRE(s.samples().front() == Approx(500.0));
  }
  SECTION("window past the end is out of range") {
    REQUIRE_THROWS_AS(segment(t, t.end_time(), t.end_time() + 1.0), OutOfRange);
  }
  SECTION("full-span segment is the identity") {
    const Trace s = segment(t, 0.0, t.duration());
    REQUIRE(s.samples() == t.samples());
    REQUIRE(s.start_time() == t.start_time());
  }
  SECTION("windows between samples are empty") {
    REQUIRE_THROWS_AS(segment(t, 2.0011, 2.0012), EmptyWindow);
  }
  SECTION("concatenation identity across random split points") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> pick(0.0, t.duration());
    for (int rep = 0; rep < 25; ++rep) {
      double a = pick(gen), b = pick(gen), c = pick(gen);
      std::vector<double> cuts{a, b, c};
      std::sort(cuts.begin(), cuts.end());
      if (cuts[0] + 0.05 > cuts[1] || cuts[1] + 0.05 > cuts[2]) continue;
      const Trace left = segment(t, cuts[0], cuts[1]);
      const Trace right = segment(t, cuts[1], cuts[2]);
      const Trace whole = segment(t, cuts[0], cuts[2]);
      std::vector<double> joined = left.samples();
      joined.insert(joined.end(), right.samples().begin(), right.samples().end());
      REQUIRE(joined == whole.samples());
    }
  }
}

TEST_CASE("basic_stats closed forms", "[trace]") {
  SECTION("constant") {
    const BasicStats s = basic_stats(make_trace(10.0, 0.0, {1.0, 1.0, 1.0}));
    REQUIRE(s.mean == Approx(1.0));
    REQUIRE(s.stddev == Approx(0.0));
  }
  SECTION("two-point population sd") {
    const BasicStats s = basic_stats(make_trace(10.0, 0.0, {0.9, 1.1}));
    REQUIRE(s.mean == Approx(1.0));
    REQUIRE(s.stddev == Approx(0.1));
    REQUIRE(s.min == Approx(0.9));
    REQUIRE(s.max == Approx(1.1));
  }
  SECTION("one million standard-normal draws match the generating distribution") {
    Rng rng(20240917);
    std::vector<double> x(1'000'000);
    for (double& v : x) v = rng.gaussian();
    const BasicStats s = basic_stats(make_trace(250.0, 0.0, std::move(x)));
    REQUIRE(std::abs(s.mean) < 0.005);
    REQUIRE(std::abs(s.stddev - 1.0) < 0.005);
  }
  SECTION("invariant under reordering") {
    Rng rng(5);
    std::vector<double> x(4096);
    for (double& v : x) v = rng.gaussian(2.0, 3.0);
    const BasicStats a = basic_stats(make_trace(100.0, 0.0, x));
    std::mt19937 gen(99);
    std::shuffle(x.begin(), x.end(), gen);
    const BasicStats b = basic_stats(make_trace(100.0, 0.0, x));
    REQUIRE(a.mean == Approx(b.mean).epsilon(1e-12));
    REQUIRE(a.stddev == Approx(b.stddev).epsilon(1e-12));
    REQUIRE(a.min == b.min);
    REQUIRE(a.max == b.max);
  }
}
