#include <doctest.h>

#include "support/test_util.hpp"
#include "tama/core.hpp"
#include "tama/error.hpp"

using namespace tama;

TEST_CASE("interval_length counts both endpoints") {
  CHECK(interval_length({10, 20}) == 11);
  CHECK(interval_length({5, 5}) == 1);
  CHECK(interval_length({0, 99}) == 100);
}

TEST_CASE("interval_overlap") {
  CHECK(interval_overlap({10, 20}, {15, 25}) == 6);
  CHECK(interval_overlap({0, 4}, {5, 9}) == 0);
  CHECK(interval_overlap({3, 3}, {0, 9}) == 1);
}

TEST_CASE("interval_overlap is symmetric and bounded") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto a = make_interval(static_cast<std::size_t>(rng.uniform_int(0, 60)),
                                 static_cast<std::size_t>(rng.uniform_int(0, 60)));
    const auto b = make_interval(static_cast<std::size_t>(rng.uniform_int(0, 60)),
                                 static_cast<std::size_t>(rng.uniform_int(0, 60)));
    std::size_t brute = 0;
    for (std::size_t t = 0; t <= 60; ++t) brute += (t >= a.start && t <= a.end && t >= b.start && t <= b.end);
    CHECK(interval_overlap(a, b) == brute);
    CHECK(interval_overlap(a, b) == interval_overlap(b, a));
    CHECK(interval_overlap(a, b) <= std::min(interval_length(a), interval_length(b)));
  }
}

TEST_CASE("labels_to_intervals examples") {
  using V = std::vector<AnomalyInterval>;
  CHECK(labels_to_intervals(LabelSeries({false, true, true, false, true})) == V{{1, 2}, {4, 4}});
  CHECK(labels_to_intervals(LabelSeries(std::vector<bool>(5, false))).empty());
  CHECK(labels_to_intervals(LabelSeries(std::vector<bool>(5, true))) == V{{0, 4}});
}

TEST_CASE("labels_to_intervals round trips random flags") {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 1000));
    const double density = rng.uniform();
    std::vector<bool> flags(n);
    for (std::size_t t = 0; t < n; ++t) flags[t] = rng.bernoulli(density);
    const auto runs = labels_to_intervals(LabelSeries(flags));
    for (std::size_t i = 1; i < runs.size(); ++i) CHECK(runs[i].start > runs[i - 1].end + 1);
    CHECK(intervals_to_labels(runs, n) == LabelSeries(flags));
  }
}

TEST_CASE("intervals_to_labels rejects out-of-range intervals") {
  const std::vector<AnomalyInterval> bad{{3, 10}};
  CHECK_THROWS_AS((void)intervals_to_labels(bad, 10), ValidationError);
}

TEST_CASE("TimeSeries invariants") {
  CHECK_THROWS_AS(TimeSeries({}), ValidationError);
  CHECK_THROWS_AS(TimeSeries({1.0, std::nan("")}), ValidationError);
  CHECK_THROWS_AS(TimeSeries({1.0, INFINITY}), ValidationError);
  CHECK_THROWS_AS(TimeSeries({1.0}, "x", 0), ValidationError);
  const TimeSeries s({1, 2, 3}, "abc", 7);
  CHECK(s.size() == 3);
  CHECK(s.name() == "abc");
  CHECK(s.period_hint() == 7);
}

TEST_CASE("anomaly type names round trip") {
  for (const auto kind : kAllAnomalyTypes) CHECK(anomaly_type_from_string(to_string(kind)) == kind);
  CHECK_FALSE(anomaly_type_from_string("global"));
  CHECK(make_interval(9, 2) == AnomalyInterval{2, 9});
}
