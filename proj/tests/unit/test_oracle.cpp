#include <doctest.h>

#include <nlohmann/json.hpp>

#include "tama/error.hpp"
#include "tama/oracle.hpp"
#include "tama/respparse.hpp"

using namespace tama;

namespace {

OracleTruth truth_with(std::size_t length, std::vector<std::pair<AnomalyInterval, AnomalyType>> anomalies) {
  std::vector<bool> flags(length, false);
  TypeMap types(length);
  for (const auto& [iv, kind] : anomalies) {
    for (auto t = iv.start; t <= iv.end; ++t) {
      flags[t] = true;
      types[t] = kind;
    }
  }
  return {LabelSeries(flags), types};
}

ChatRequest request_for(const RequestMeta& meta) {
  ChatRequest r;
  r.parts = {TextPart{"prompt"}, make_meta_part(meta)};
  return r;
}

nlohmann::json respond(const RequestMeta& meta, const OracleTruth& truth, const OracleFidelity& f) {
  return nlohmann::json::parse(oracle_respond(request_for(meta), truth, f).text);
}

}  // namespace

TEST_CASE("perfect oracle echoes truth in window-local indices") {
  const auto truth = truth_with(1000, {{{350, 370}, AnomalyType::Shapelet}});
  const auto j = respond({"analyze", "s", 1, 300, 300, ""}, truth, OracleFidelity::perfect());
  CHECK(j["abnormal_index"] == "[(50, 70)/4/shapelet]");
  CHECK(j.contains("abnormal_description"));
  CHECK(j.contains("abnormal_type_description"));
}

TEST_CASE("perfect oracle with no overlap returns an empty list") {
  const auto truth = truth_with(1000, {{{350, 370}, AnomalyType::Trend}});
  CHECK(respond({"analyze", "s", 0, 0, 300, ""}, truth, OracleFidelity::perfect())["abnormal_index"] == "[]");
}

TEST_CASE("truth crossing a window edge is clipped") {
  const auto truth = truth_with(1000, {{{280, 320}, AnomalyType::Trend}});
  CHECK(respond({"analyze", "s", 0, 0, 300, ""}, truth, OracleFidelity::perfect())["abnormal_index"] ==
        "[(280, 299)/4/trend]");
  CHECK(respond({"analyze", "s", 1, 300, 300, ""}, truth, OracleFidelity::perfect())["abnormal_index"] ==
        "[(0, 20)/4/trend]");
}

TEST_CASE("untyped truth falls back on length") {
  OracleTruth truth{LabelSeries(std::vector<bool>(20, false)), {}};
  auto flags = truth.labels.flags();
  flags[3] = true;
  flags[10] = flags[11] = true;
  truth.labels = LabelSeries(flags);
  CHECK(respond({"analyze", "s", 0, 0, 20, ""}, truth, OracleFidelity::perfect())["abnormal_index"] ==
        "[(3)/4/global, (10, 11)/4/shapelet]");
}

TEST_CASE("reference stage returns a normal pattern") {
  const auto truth = truth_with(100, {});
  const auto text = oracle_respond(request_for({"reference", "s", 0, 0, 50, ""}), truth, {}).text;
  CHECK_FALSE(parse_normal_pattern(text).empty());
}

TEST_CASE("noisy oracle is deterministic and stays near the truth") {
  const auto truth = truth_with(3000, {{{1000, 1040}, AnomalyType::Seasonal}});
  const auto f = OracleFidelity::noisy(7, 5, 0.5);
  for (std::size_t start = 0; start + 300 <= 3000; start += 150) {
    const RequestMeta meta{"analyze", "s", start / 150, start, 300, ""};
    const auto a = oracle_respond(request_for(meta), truth, f).text;
    CHECK(a == oracle_respond(request_for(meta), truth, f).text);
    for (const auto& d : parse_analysis(a, 300).detections) {
      CHECK(d.confidence >= 1);
      if (d.confidence >= 3) {
        CHECK(d.interval.start + start + 5 >= 1000);
        CHECK(d.interval.end + start <= 1045);
      } else {
        CHECK(interval_length(d.interval) <= 11);
      }
    }
  }
  const auto other = OracleFidelity::noisy(8, 5, 0.5);
  bool any_differs = false;
  for (std::size_t start = 0; start + 300 <= 3000; start += 150) {
    const RequestMeta meta{"analyze", "s", 0, start, 300, ""};
    any_differs = any_differs || oracle_respond(request_for(meta), truth, f).text !=
                                     oracle_respond(request_for(meta), truth, other).text;
  }
  CHECK(any_differs);
}

TEST_CASE("noisy jitter is consistent across overlapping windows") {
  const auto truth = truth_with(3000, {{{1000, 1040}, AnomalyType::Trend}});
  const auto f = OracleFidelity::noisy(3, 5, 0.0);
  const auto a = parse_analysis(oracle_respond(request_for({"analyze", "s", 0, 900, 300, ""}), truth, f).text, 300);
  const auto b = parse_analysis(oracle_respond(request_for({"analyze", "s", 1, 950, 300, ""}), truth, f).text, 300);
  REQUIRE(a.detections.size() == 1);
  REQUIRE(b.detections.size() == 1);
  CHECK(a.detections[0].interval.start + 900 == b.detections[0].interval.start + 950);
  CHECK(a.detections[0].interval.end + 900 == b.detections[0].interval.end + 950);
}

TEST_CASE("reflection behaviours") {
  const auto truth = truth_with(1000, {{{350, 370}, AnomalyType::Shapelet}});
  const std::string prior = "[(10, 20)/2/trend, (50, 70)/4/shapelet]";
  const RequestMeta meta{"reflect", "s", 1, 300, 300, prior};
  auto f = OracleFidelity::perfect();
  CHECK(respond(meta, truth, f)["corrected_abnormal_index"] == prior);
  f.reflection = OracleFidelity::Reflection::truth;
  CHECK(respond(meta, truth, f)["corrected_abnormal_index"] == "[(50, 70)/4/shapelet]");
  f.reflection = OracleFidelity::Reflection::drop_spurious;
  CHECK(respond(meta, truth, f)["corrected_abnormal_index"] == "[(50, 70)/4/shapelet]");
}

TEST_CASE("oracle errors") {
  const auto truth = truth_with(100, {});
  ChatRequest no_meta;
  no_meta.parts = {TextPart{"x"}};
  CHECK_THROWS_AS((void)oracle_respond(no_meta, truth, {}), ValidationError);
  CHECK_THROWS_AS((void)oracle_respond(request_for({"analyze", "s", 0, 90, 20, ""}), truth, {}), ValidationError);
  CHECK_THROWS_AS((void)oracle_respond(request_for({"dance", "s", 0, 0, 20, ""}), truth, {}), ValidationError);
  OracleBackend backend({});
  backend.add_series("known", truth);
  CHECK_NOTHROW((void)backend.complete(request_for({"analyze", "known", 0, 0, 20, ""})));
  CHECK_THROWS_AS((void)backend.complete(request_for({"analyze", "other", 0, 0, 20, ""})), ValidationError);
}
