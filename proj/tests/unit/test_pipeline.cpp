#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>

#include "support/test_util.hpp"
#include "tama/error.hpp"
#include "tama/oracle.hpp"
#include "tama/pipeline.hpp"
#include "tama/response_cache.hpp"
#include "tama/synthgen.hpp"

using namespace tama;

namespace {

/// Backend driven by a callback, counting calls per (stage, window).
class ScriptedBackend final : public ChatBackend {
 public:
  using Script = std::function<std::string(const RequestMeta&, const ChatRequest&)>;
  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  ChatResponse complete(const ChatRequest& request) override {
    const auto meta = find_meta(request);
    REQUIRE(meta);
    {
      std::lock_guard lock(mutex_);
      ++calls[{meta->stage, meta->window_index}];
      ++total;
    }
    return {script_(*meta, request), std::nullopt, "scripted"};
  }
  [[nodiscard]] std::string id() const override { return "scripted"; }

  std::map<std::pair<std::string, std::size_t>, int> calls;
  int total = 0;

 private:
  Script script_;
  std::mutex mutex_;
};

std::string analysis(const std::string& list) {
  return nlohmann::json{{"abnormal_index", list}, {"abnormal_description", "d"}, {"abnormal_type_description", "t"}}
      .dump();
}

TimeSeries sine(std::size_t length, std::size_t period = 100) {
  std::vector<double> v(length);
  for (std::size_t t = 0; t < length; ++t) v[t] = std::sin(0.0628318 * static_cast<double>(t));
  return TimeSeries(v, "sine", period);
}

PipelineConfig small_config() {
  PipelineConfig cfg;
  cfg.plot.width_px = 400;
  cfg.plot.height_px = 200;
  cfg.plot.scale = 1;
  return cfg;
}

}  // namespace

TEST_CASE("sizing") {
  PipelineConfig cfg;
  auto s = resolve_sizing(cfg, 3000, 100);
  CHECK(s.width == 300);
  CHECK(s.stride == 150);
  cfg.window = 200;
  s = resolve_sizing(cfg, 3000, 100);
  CHECK(s.width == 200);
  CHECK(s.stride == 100);
  cfg.stride = 50;
  CHECK(resolve_sizing(cfg, 3000, 100).stride == 50);
  cfg.stride = 200;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("windows are returned in order and reflection is gated") {
  auto cfg = small_config();
  cfg.n_r = 0;
  cfg.max_parallel = 4;
  ScriptedBackend backend([](const RequestMeta& meta, const ChatRequest&) {
    if (meta.stage == "analyze") return analysis(meta.window_index % 2 == 0 ? "[(10, 20)/3/trend]" : "[]");
    return nlohmann::json{{"corrected_abnormal_index", meta.prior}}.dump();
  });
  const auto result = run(sine(1500), cfg, backend);
  REQUIRE(result.windows.size() == 9);
  CHECK(result.reference.skipped);
  for (std::size_t k = 0; k < result.windows.size(); ++k) {
    const auto& w = result.windows[k];
    CHECK(w.window_index == k);
    CHECK(w.window_start == result.plan.starts[k]);
    CHECK(backend.calls[{"analyze", k}] == 1);
    if (k % 2 == 0) {
      CHECK(w.reflected);
      CHECK(backend.calls[{"reflect", k}] == 1);
      CHECK(w.detections == w.pre_reflection);
    } else {
      CHECK(w.detections.empty());
      CHECK(backend.calls.count({"reflect", k}) == 0);
    }
  }
  CHECK(backend.calls.count({"reference", 0}) == 0);
}

TEST_CASE("reflection disabled makes one call per window") {
  auto cfg = small_config();
  cfg.n_r = 0;
  cfg.reflection = false;
  ScriptedBackend backend([](const RequestMeta&, const ChatRequest&) { return analysis("[(1, 2)/4/global]"); });
  const auto result = run(sine(1000), cfg, backend);
  CHECK(backend.total == static_cast<int>(result.windows.size()));
  for (const auto& w : result.windows) CHECK_FALSE(w.reflected);
}

TEST_CASE("reflection request carries zoom images and the window image") {
  auto cfg = small_config();
  cfg.n_r = 0;
  std::size_t images = 0;
  std::vector<std::string> sunk;
  ScriptedBackend backend([&](const RequestMeta& meta, const ChatRequest& req) {
    if (meta.stage == "analyze") return analysis(meta.window_index == 0 ? "[(1, 2)/4/global, (50, 60)/2/trend]" : "[]");
    for (const auto& p : req.parts) images += std::holds_alternative<ImagePart>(p) ? 1 : 0;
    return nlohmann::json{{"corrected_abnormal_index", "[(50, 60)/2/trend]"}}.dump();
  });
  const auto result = run(sine(600), cfg, backend, {}, [&](const std::string& id, const RenderedImage&) {
    sunk.push_back(id);
  });
  CHECK(images == 3);
  REQUIRE(result.windows[0].detections.size() == 1);
  CHECK(result.windows[0].detections[0].interval == AnomalyInterval{50, 60});
  CHECK(result.windows[0].pre_reflection.size() == 2);
  CHECK(std::count(sunk.begin(), sunk.end(), "0_zoom_1") == 1);
  CHECK(std::count(sunk.begin(), sunk.end(), "0") == 1);
}

TEST_CASE("reference learning uses the training split") {
  auto cfg = small_config();
  cfg.n_r = 3;
  std::size_t reference_images = 0;
  ScriptedBackend backend([&](const RequestMeta& meta, const ChatRequest& req) {
    if (meta.stage == "reference") {
      for (const auto& p : req.parts) reference_images += std::holds_alternative<ImagePart>(p) ? 1 : 0;
      return nlohmann::json{{"normal_pattern", "a smooth sine"}}.dump();
    }
    const auto& text = std::get<TextPart>(req.parts.front()).text;
    CHECK(text.find("a smooth sine") != std::string::npos);
    return analysis("[]");
  });
  ReferenceSource source;
  source.train_split = 900;
  const auto result = run(sine(3000), cfg, backend, source);
  CHECK(reference_images == 3);
  CHECK_FALSE(result.reference.skipped);
  CHECK(result.reference.normal_pattern == "a smooth sine");
  CHECK(result.reference.source_image_ids.size() == 3);
}

TEST_CASE("malformed reference response surfaces the raw text") {
  auto cfg = small_config();
  cfg.parse_retries = 0;
  ScriptedBackend backend([](const RequestMeta&, const ChatRequest&) { return std::string("no json here"); });
  ReferenceSource source;
  source.train_split = 900;
  try {
    (void)run(sine(3000), cfg, backend, source);
    FAIL("expected an error");
  } catch (const ResponseParseError& e) {
    CHECK(e.raw() == "no json here");
  }
}

TEST_CASE("unparseable windows are retried then marked failed") {
  auto cfg = small_config();
  cfg.n_r = 0;
  cfg.parse_retries = 1;
  ScriptedBackend backend([](const RequestMeta& meta, const ChatRequest& req) {
    if (meta.window_index == 1) return std::string("garbage");
    // Window 2 succeeds on the retry, which carries the nudge text.
    if (meta.window_index == 2 && req.parts.size() == 3) return std::string("garbage");
    return analysis("[]");
  });
  const auto result = run(sine(900), cfg, backend);
  CHECK(result.windows[1].failed);
  CHECK(result.windows[1].raw_response == "garbage");
  CHECK(result.windows[1].detections.empty());
  CHECK(backend.calls[{"analyze", 1}] == 2);
  CHECK_FALSE(result.windows[2].failed);
  CHECK(backend.calls[{"analyze", 2}] == 2);
  CHECK_FALSE(result.windows[0].failed);
}

TEST_CASE("failed reflection keeps the prior detections") {
  auto cfg = small_config();
  cfg.n_r = 0;
  ScriptedBackend backend([](const RequestMeta& meta, const ChatRequest&) {
    if (meta.stage == "reflect") throw GatewayError("boom", false, 500);
    return analysis("[(5, 9)/3/shapelet]");
  });
  const auto result = run(sine(600), cfg, backend);
  for (const auto& w : result.windows) {
    CHECK(w.detections.size() == 1);
    CHECK_FALSE(w.reflected);
    CHECK(w.reflection_error.find("boom") != std::string::npos);
  }
}

TEST_CASE("strict replay on an empty cache fails fast") {
  testutil::TempDir dir("pipeline");
  auto cfg = small_config();
  cfg.n_r = 0;
  cfg.max_parallel = 1;
  CachingBackend replay(std::make_shared<ResponseCache>(dir.path()), nullptr, CacheMode::strict_replay);
  std::size_t rendered = 0;
  CHECK_THROWS_AS((void)run(sine(3000), cfg, replay, {}, [&](const std::string&, const RenderedImage&) { ++rendered; }),
                  ReplayMissError);
  CHECK(rendered == 1);
}

TEST_CASE("perfect oracle reproduces the truth intervals") {
  synth::SuiteConfig suite;
  suite.count = 1;
  const auto member = synth::make_suite(suite).front();
  const auto data = synth::generate(member.config, member.name);
  OracleBackend backend(OracleFidelity::perfect());
  backend.add_series(member.name, {data.labels, data.types});
  auto cfg = small_config();
  ReferenceSource source;
  source.train_split = member.train_split;
  const auto result = run(data.series, cfg, backend, source);
  std::vector<bool> covered(data.series.size(), false);
  for (const auto& w : result.windows) {
    for (const auto& d : w.detections) {
      CHECK(d.confidence == 4);
      for (auto t = d.interval.start; t <= d.interval.end; ++t) covered[w.window_start + t] = true;
    }
  }
  CHECK(covered == data.labels.flags());
}
