#include "tama/cli.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

#include "tama/error.hpp"
#include "tama/ingest.hpp"
#include "tama/response_cache.hpp"

namespace tama::cli {
namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError(fmt::format("{}: expected {}, got '{}'", key, expected, value));
}

bool to_bool(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(key, raw, "a boolean");
}

template <typename T>
T to_number(const std::string& key, const std::string& raw) {
  const auto v = trim(raw);
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc() || ptr != end) {
    bad_value(key, raw, std::is_integral_v<T> ? "an integer" : "a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) bad_value(key, raw, "a finite number");
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& raw) {
  if (!trim(raw).empty() && trim(raw).front() == '-') bad_value(key, raw, "a non-negative integer");
  return to_number<std::size_t>(key, raw);
}

std::optional<std::size_t> to_optional_size(const std::string& key, const std::string& raw) {
  const auto v = trim(raw);
  if (v.empty() || v == "auto") return std::nullopt;
  return to_size(key, v);
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::string item;
  for (const char c : raw) {
    if (c == ',') {
      if (!trim(item).empty()) out.push_back(trim(item));
      item.clear();
    } else {
      item += c;
    }
  }
  if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

std::vector<double> to_alpha_grid(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& item : split_list(raw)) {
    const auto a = to_number<double>(key, item);
    if (a < 0.0 || a > 1.0) bad_value(key, item, "alphas in [0, 1]");
    out.push_back(a);
  }
  if (out.empty()) bad_value(key, raw, "at least one alpha");
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }
std::string opt(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "auto"; }
std::string yes(bool b) { return b ? "true" : "false"; }

struct Setting {
  std::string key;
  bool affects_requests;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string_view fidelity_name(OracleFidelity::Level l) { return l == OracleFidelity::Level::noisy ? "noisy" : "perfect"; }

std::string_view reflection_name(OracleFidelity::Reflection r) {
  switch (r) {
    case OracleFidelity::Reflection::truth:
      return "truth";
    case OracleFidelity::Reflection::drop_spurious:
      return "drop_spurious";
    case OracleFidelity::Reflection::echo:
      break;
  }
  return "echo";
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      {"backend", false,
       [](RunConfig& c, const std::string& v) {
         if (v != "oracle" && v != "http") bad_value("backend", v, "oracle or http");
         c.backend = v;
       },
       [](const RunConfig& c) { return c.backend; }},
      {"cache", false,
       [](RunConfig& c, const std::string& v) {
         if (v != "off" && !cache_mode_from_string(v)) bad_value("cache", v, "off, record, read_through or replay");
         c.cache = v;
       },
       [](const RunConfig& c) { return c.cache; }},
      {"manifest", false, [](RunConfig& c, const std::string& v) { c.manifest = v; },
       [](const RunConfig& c) { return c.manifest.empty() ? std::string() : fs::absolute(c.manifest).string(); }},
      {"output_dir", false, [](RunConfig& c, const std::string& v) { c.output_dir = v; },
       [](const RunConfig& c) { return c.output_dir.string(); }},
      {"cache_dir", false, [](RunConfig& c, const std::string& v) { c.cache_dir = v; },
       [](const RunConfig& c) { return resolve_cache_dir(c).string(); }},

      {"base_url", false, [](RunConfig& c, const std::string& v) { c.http.base_url = v; },
       [](const RunConfig& c) { return c.http.base_url; }},
      {"api_key_env", false, [](RunConfig& c, const std::string& v) { c.http.api_key_env = v; },
       [](const RunConfig& c) { return c.http.api_key_env; }},
      {"max_attempts", false,
       [](RunConfig& c, const std::string& v) { c.http.max_attempts = to_size("max_attempts", v); },
       [](const RunConfig& c) { return std::to_string(c.http.max_attempts); }},
      {"timeout_s", false,
       [](RunConfig& c, const std::string& v) { c.http.timeout = std::chrono::seconds(to_size("timeout_s", v)); },
       [](const RunConfig& c) { return std::to_string(c.http.timeout.count()); }},
      {"max_in_flight", false,
       [](RunConfig& c, const std::string& v) { c.http.max_in_flight = to_size("max_in_flight", v); },
       [](const RunConfig& c) { return std::to_string(c.http.max_in_flight); }},
      {"image_detail", false, [](RunConfig& c, const std::string& v) { c.http.image_detail = v; },
       [](const RunConfig& c) { return c.http.image_detail; }},

      {"model", true, [](RunConfig& c, const std::string& v) { c.pipeline.model = v; },
       [](const RunConfig& c) { return c.pipeline.model; }},
      {"temperature", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.temperature = to_number<double>("temperature", v); },
       [](const RunConfig& c) { return num(c.pipeline.temperature); }},
      {"top_p", true, [](RunConfig& c, const std::string& v) { c.pipeline.top_p = to_number<double>("top_p", v); },
       [](const RunConfig& c) { return num(c.pipeline.top_p); }},
      {"json_mode", true, [](RunConfig& c, const std::string& v) { c.pipeline.json_mode = to_bool("json_mode", v); },
       [](const RunConfig& c) { return yes(c.pipeline.json_mode); }},
      {"n_r", true, [](RunConfig& c, const std::string& v) { c.pipeline.n_r = to_size("n_r", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.n_r); }},
      {"window", true, [](RunConfig& c, const std::string& v) { c.pipeline.window = to_optional_size("window", v); },
       [](const RunConfig& c) { return opt(c.pipeline.window); }},
      {"stride", true, [](RunConfig& c, const std::string& v) { c.pipeline.stride = to_optional_size("stride", v); },
       [](const RunConfig& c) { return opt(c.pipeline.stride); }},
      {"window_periods", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.window_periods = to_size("window_periods", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.window_periods); }},
      {"overlap", true, [](RunConfig& c, const std::string& v) { c.pipeline.overlap = to_number<double>("overlap", v); },
       [](const RunConfig& c) { return num(c.pipeline.overlap); }},
      {"reflection", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.reflection = to_bool("reflection", v); },
       [](const RunConfig& c) { return yes(c.pipeline.reflection); }},
      {"reflection_resend_reference_images", true,
       [](RunConfig& c, const std::string& v) {
         c.pipeline.reflection_resend_reference_images = to_bool("reflection_resend_reference_images", v);
       },
       [](const RunConfig& c) { return yes(c.pipeline.reflection_resend_reference_images); }},
      {"zoom_margin", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.zoom_margin = to_number<double>("zoom_margin", v); },
       [](const RunConfig& c) { return num(c.pipeline.zoom_margin); }},
      {"parse_retries", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.parse_retries = to_size("parse_retries", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.parse_retries); }},
      {"max_parallel", false,
       [](RunConfig& c, const std::string& v) { c.pipeline.max_parallel = to_size("max_parallel", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.max_parallel); }},
      {"seed", true, [](RunConfig& c, const std::string& v) { c.pipeline.seed = to_number<std::uint64_t>("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.seed); }},
      {"prompt_dir", true, [](RunConfig& c, const std::string& v) { c.prompt_dir = v; },
       [](const RunConfig& c) { return c.prompt_dir.string(); }},
      {"reference_files", true,
       [](RunConfig& c, const std::string& v) {
         c.reference_files.clear();
         for (const auto& item : split_list(v)) c.reference_files.emplace_back(item);
       },
       [](const RunConfig& c) {
         std::vector<std::string> items;
         for (const auto& p : c.reference_files) items.push_back(p.string());
         return join(items);
       }},

      {"plot_width", true, [](RunConfig& c, const std::string& v) { c.pipeline.plot.width_px = to_size("plot_width", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.plot.width_px); }},
      {"plot_height", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.plot.height_px = to_size("plot_height", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.plot.height_px); }},
      {"plot_grid", true, [](RunConfig& c, const std::string& v) { c.pipeline.plot.grid = to_bool("plot_grid", v); },
       [](const RunConfig& c) { return yes(c.pipeline.plot.grid); }},
      {"plot_x_ticks", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.plot.x_tick_count = to_size("plot_x_ticks", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.plot.x_tick_count); }},
      {"plot_y_ticks", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.plot.y_tick_target = to_size("plot_y_ticks", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.plot.y_tick_target); }},
      {"plot_scale", true, [](RunConfig& c, const std::string& v) { c.pipeline.plot.scale = to_size("plot_scale", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.plot.scale); }},
      {"plot_line_width", true,
       [](RunConfig& c, const std::string& v) { c.pipeline.plot.line_width = to_size("plot_line_width", v); },
       [](const RunConfig& c) { return std::to_string(c.pipeline.plot.line_width); }},

      {"c0", false, [](RunConfig& c, const std::string& v) { c.c0 = to_number<double>("c0", v); },
       [](const RunConfig& c) { return num(c.c0); }},
      {"alpha_grid", false, [](RunConfig& c, const std::string& v) { c.alpha_grid = to_alpha_grid("alpha_grid", v); },
       [](const RunConfig& c) {
         std::vector<std::string> items;
         for (const double a : c.alpha_grid) items.push_back(num(a));
         return join(items);
       }},
      {"vote", false,
       [](RunConfig& c, const std::string& v) {
         if (v == "confidence") c.vote = VoteMode::confidence_weighted;
         else if (v == "count") c.vote = VoteMode::raw_count;
         else bad_value("vote", v, "confidence or count");
       },
       [](const RunConfig& c) { return std::string(c.vote == VoteMode::raw_count ? "count" : "confidence"); }},
      {"parallel_series", false,
       [](RunConfig& c, const std::string& v) { c.parallel_series = to_size("parallel_series", v); },
       [](const RunConfig& c) { return std::to_string(c.parallel_series); }},
      {"write_images", false, [](RunConfig& c, const std::string& v) { c.write_images = to_bool("write_images", v); },
       [](const RunConfig& c) { return yes(c.write_images); }},

      {"oracle_fidelity", false,
       [](RunConfig& c, const std::string& v) {
         if (v == "perfect") c.oracle.level = OracleFidelity::Level::perfect;
         else if (v == "noisy") c.oracle.level = OracleFidelity::Level::noisy;
         else bad_value("oracle_fidelity", v, "perfect or noisy");
       },
       [](const RunConfig& c) { return std::string(fidelity_name(c.oracle.level)); }},
      {"oracle_seed", false,
       [](RunConfig& c, const std::string& v) { c.oracle.seed = to_number<std::uint64_t>("oracle_seed", v); },
       [](const RunConfig& c) { return std::to_string(c.oracle.seed); }},
      {"oracle_jitter", false,
       [](RunConfig& c, const std::string& v) { c.oracle.jitter = to_size("oracle_jitter", v); },
       [](const RunConfig& c) { return std::to_string(c.oracle.jitter); }},
      {"oracle_fp_rate", false,
       [](RunConfig& c, const std::string& v) {
         const auto p = to_number<double>("oracle_fp_rate", v);
         if (p < 0.0 || p > 1.0) bad_value("oracle_fp_rate", v, "a probability");
         c.oracle.fp_rate = p;
       },
       [](const RunConfig& c) { return num(c.oracle.fp_rate); }},
      {"oracle_reflection", false,
       [](RunConfig& c, const std::string& v) {
         if (v == "echo") c.oracle.reflection = OracleFidelity::Reflection::echo;
         else if (v == "truth") c.oracle.reflection = OracleFidelity::Reflection::truth;
         else if (v == "drop_spurious") c.oracle.reflection = OracleFidelity::Reflection::drop_spurious;
         else bad_value("oracle_reflection", v, "echo, truth or drop_spurious");
       },
       [](const RunConfig& c) { return std::string(reflection_name(c.oracle.reflection)); }},
  };
  return table;
}

const Setting& find_setting(const std::string& key) {
  for (const auto& s : settings()) {
    if (s.key == key) return s;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

std::string yaml_scalar_text(const YAML::Node& node, const std::string& key) {
  if (node.IsNull()) return {};
  if (node.IsScalar()) return node.Scalar();
  if (node.IsSequence()) {
    std::vector<std::string> items;
    for (const auto& item : node) {
      if (!item.IsScalar()) throw ConfigError(key + ": list items must be scalars");
      items.push_back(item.Scalar());
    }
    return join(items);
  }
  throw ConfigError(key + ": nested mappings are not supported; the config is flat");
}

struct Backends {
  std::shared_ptr<ChatBackend> active;
  std::shared_ptr<CachingBackend> cache;
};

Backends make_backend(const RunConfig& cfg, const std::vector<ingest::LoadedSeries>& loaded,
                      std::shared_ptr<ChatBackend> override_backend) {
  std::shared_ptr<ChatBackend> inner = std::move(override_backend);
  const auto mode = cfg.cache == "off" ? std::nullopt : cache_mode_from_string(cfg.cache);
  const bool replay = mode == CacheMode::strict_replay;
  if (!inner && !replay) {
    if (cfg.backend == "http") {
      inner = std::make_shared<HttpBackend>(cfg.http);
    } else {
      auto oracle = std::make_shared<OracleBackend>(cfg.oracle);
      for (const auto& s : loaded) {
        if (s.labels) oracle->add_series(s.series.name(), {*s.labels, s.types.value_or(TypeMap{})});
      }
      inner = oracle;
    }
  }
  if (!mode) return {inner, nullptr};
  auto cache = std::make_shared<ResponseCache>(resolve_cache_dir(cfg));
  auto caching = std::make_shared<CachingBackend>(cache, inner, *mode);
  return {caching, caching};
}

SeriesStatus detect_one(const RunConfig& cfg, const PipelineConfig& pcfg, const ingest::LoadedSeries& loaded,
                        const std::vector<TimeSeries>& external, ChatBackend& backend) {
  const auto& series = loaded.series;
  SeriesStatus status;
  status.name = series.name();
  const auto dir = cfg.output_dir / series_dir_name(series.name());
  fs::create_directories(dir);

  ReferenceSource source;
  source.train_split = loaded.entry.train_split;
  if (!source.train_split) source.external = external;

  ImageSink sink;
  if (cfg.write_images) {
    sink = [&dir](const std::string& id, const RenderedImage& img) {
      report::write_file(dir / (id + ".png"),
                         std::string_view(reinterpret_cast<const char*>(img.png.data()), img.png.size()));
    };
  }
  const auto run = tama::run(series, pcfg, backend, source, sink);
  const auto result = aggregate(run.windows, series.size(), cfg.c0, cfg.vote);
  report::write_file(dir / "z_raw.json", report::dump(report::z_raw_json(run, pipeline_snapshot(cfg))));
  report::write_file(dir / "result.json", report::dump(report::result_json(series.name(), result)));

  status.ok = true;
  status.windows = run.windows.size();
  for (const auto& w : run.windows) {
    status.failed_windows += w.failed ? 1 : 0;
    status.detections += w.detections.size();
  }
  return status;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& s : settings()) keys.push_back(s.key);
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_setting(key).set(cfg, value);
}

RunConfig load_config(const std::optional<fs::path>& file, const std::vector<Override>& overrides) {
  RunConfig cfg;
  if (file) {
    YAML::Node root;
    try {
      root = YAML::LoadFile(file->string());
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("{}: {}", file->string(), e.what()));
    }
    if (!root.IsNull() && !root.IsMap()) throw ConfigError(file->string() + ": expected a mapping of keys");
    for (const auto& kv : root) {
      const auto key = kv.first.as<std::string>();
      apply_setting(cfg, key, yaml_scalar_text(kv.second, key));
    }
  }
  for (const auto& [key, value] : overrides) apply_setting(cfg, key, value);
  if (!cfg.prompt_dir.empty()) cfg.pipeline.prompts = load_prompts(cfg.prompt_dir);
  cfg.pipeline.validate();
  if (cfg.parallel_series == 0) throw ConfigError("parallel_series must be positive");
  if (cfg.http.max_attempts == 0) throw ConfigError("max_attempts must be positive");
  if (cfg.http.max_in_flight == 0 || cfg.http.max_in_flight > 1024) {
    throw ConfigError("max_in_flight must be in [1, 1024]");
  }
  return cfg;
}

std::vector<Override> snapshot(const RunConfig& cfg) {
  std::vector<Override> out;
  for (const auto& s : settings()) out.emplace_back(s.key, s.get(cfg));
  return out;
}

std::string snapshot_yaml(const RunConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const auto& [key, value] : snapshot(cfg)) {
    out << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << value;
  }
  out << YAML::EndMap;
  return std::string("# Effective configuration of this run. Reload with --config.\n") + out.c_str() + "\n";
}

report::Json pipeline_snapshot(const RunConfig& cfg) {
  report::Json j = report::Json::object();
  for (const auto& s : settings()) {
    if (s.affects_requests) j[s.key] = s.get(cfg);
  }
  return j;
}

fs::path resolve_cache_dir(const RunConfig& cfg) {
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  if (const char* env = std::getenv("TAMA_CACHE_DIR"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir / "cache";
}

std::string series_dir_name(const std::string& name) {
  std::string out = name;
  for (auto& c : out) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    if (!keep) c = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

DetectOutcome run_detect(const RunConfig& cfg, std::shared_ptr<ChatBackend> backend) {
  if (cfg.manifest.empty()) throw ConfigError("no manifest given");
  const auto manifest = ingest::load_manifest(cfg.manifest);
  fs::create_directories(cfg.output_dir);
  report::write_file(cfg.output_dir / "config.yaml", snapshot_yaml(cfg));

  DetectOutcome outcome;
  const auto n = manifest.entries.size();
  std::vector<std::optional<ingest::LoadedSeries>> loaded(n);
  outcome.series.resize(n);
  std::vector<ingest::LoadedSeries> usable;
  for (std::size_t i = 0; i < n; ++i) {
    outcome.series[i].name = manifest.entries[i].name;
    try {
      loaded[i] = ingest::load_entry(manifest.entries[i]);
      usable.push_back(*loaded[i]);
    } catch (const ValidationError& e) {
      outcome.series[i].error = e.what();
    }
  }

  std::vector<TimeSeries> external;
  for (const auto& path : cfg.reference_files) external.push_back(ingest::load_series(path));

  const bool overridden = backend != nullptr;
  const auto backends = make_backend(cfg, usable, std::move(backend));

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  const auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= n) return;
      if (!loaded[i]) continue;
      {
        std::lock_guard lock(fatal_mutex);
        if (fatal) return;
      }
      if (!overridden && cfg.backend == "oracle" && !loaded[i]->labels && cfg.cache != "replay") {
        outcome.series[i].error = "the oracle backend needs labels for every series";
        continue;
      }
      try {
        spdlog::info("detect: {}", loaded[i]->series.name());
        outcome.series[i] = detect_one(cfg, cfg.pipeline, *loaded[i], external, *backends.active);
      } catch (const ConfigError&) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        return;
      } catch (const std::exception& e) {
        outcome.series[i].error = e.what();
        spdlog::error("{}: {}", loaded[i]->series.name(), e.what());
      }
    }
  };
  const auto threads = std::min(cfg.parallel_series, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  report::Json summary;
  summary["schema"] = "tama.summary/1";
  report::Json list = report::Json::array();
  std::size_t failed = 0;
  for (const auto& s : outcome.series) {
    failed += s.ok ? 0 : 1;
    report::Json sj;
    sj["name"] = s.name;
    sj["status"] = s.ok ? "ok" : "failed";
    if (!s.ok) sj["error"] = s.error;
    sj["windows"] = s.windows;
    sj["failed_windows"] = s.failed_windows;
    sj["detections"] = s.detections;
    list.push_back(std::move(sj));
  }
  summary["series"] = std::move(list);
  summary["failed_series"] = failed;
  report::write_file(cfg.output_dir / "summary.json", report::dump(summary));

  if (backends.cache) {
    outcome.live_calls = backends.cache->live_calls();
    outcome.cache_hits = backends.cache->hits();
  }
  outcome.exit_code = failed > 0 ? kExitPartial : kExitOk;
  return outcome;
}

EvalOutcome run_eval(const EvalOptions& options) {
  EvalOutcome outcome;
  const auto config_path = options.results_dir / "config.yaml";
  std::optional<RunConfig> recorded;
  if (fs::exists(config_path)) recorded = load_config(config_path);

  auto manifest_path = options.manifest;
  if (!manifest_path && recorded) manifest_path = recorded->manifest;
  if (!manifest_path || manifest_path->empty()) throw ConfigError("no manifest given and none recorded in the run");
  const auto manifest = ingest::load_manifest(*manifest_path);

  std::vector<double> alphas = options.alpha_grid.value_or(recorded ? recorded->alpha_grid : default_alpha_grid());
  outcome.output_dir = options.output_dir.value_or(options.results_dir / "eval");
  double c0_used = options.c0.value_or(recorded ? recorded->c0 : 1.0);

  for (const auto& entry : manifest.entries) {
    const auto result_path = options.results_dir / series_dir_name(entry.name) / "result.json";
    try {
      if (!fs::exists(result_path)) throw ValidationError("missing result " + result_path.string());
      const auto stored = report::parse_result(report::read_json(result_path));
      const auto loaded = ingest::load_entry(entry);
      if (!loaded.labels) throw ValidationError("no labels for series '" + entry.name + "'");
      if (stored.confidence.size() != loaded.series.size()) {
        throw ValidationError("result length differs from the series length for '" + entry.name + "'");
      }
      EvalInput input;
      input.truth = *loaded.labels;
      input.truth_types = loaded.types.value_or(TypeMap{});
      input.scores.assign(stored.confidence.begin(), stored.confidence.end());
      input.c0 = options.c0.value_or(stored.c0);
      input.pred_types = stored.classes;
      outcome.series.push_back({entry.name, evaluate(input, alphas)});
    } catch (const ValidationError& e) {
      outcome.problems.emplace_back(e.what());
      spdlog::error("eval: {}", e.what());
    }
  }

  report::write_file(outcome.output_dir / "report.json",
                     report::dump(report::eval_json(outcome.series, c0_used, alphas)));
  report::write_file(outcome.output_dir / "report.txt", report::eval_text(outcome.series));
  report::write_file(outcome.output_dir / "pat.csv", report::pat_csv(outcome.series));
  outcome.exit_code = outcome.problems.empty() ? kExitOk : kExitPartial;
  return outcome;
}

fs::path run_gen_synth(const GenSynthOptions& options) {
  std::vector<synth::SuiteMember> members;
  auto suite = options.suite;
  if (options.spec) {
    YAML::Node root;
    try {
      root = YAML::LoadFile(options.spec->string());
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("{}: {}", options.spec->string(), e.what()));
    }
    try {
      if (root["series"]) {
        for (const auto& node : root["series"]) {
          synth::SuiteMember m;
          m.name = node["name"].as<std::string>();
          m.config.length = node["length"].as<std::size_t>(m.config.length);
          m.config.base_period = node["base_period"].as<std::size_t>(m.config.base_period);
          m.config.noise_sigma = node["noise_sigma"].as<double>(m.config.noise_sigma);
          m.config.seed = node["seed"].as<std::uint64_t>(m.config.seed);
          m.train_split = node["train_split"].as<std::size_t>(0);
          for (const auto& inj : node["injections"]) {
            synth::AnomalySpec spec;
            const auto kind = inj["kind"].as<std::string>();
            const auto parsed = anomaly_type_from_string(kind);
            if (!parsed) throw ConfigError(fmt::format("series '{}': unknown anomaly kind '{}'", m.name, kind));
            spec.kind = *parsed;
            const auto start = inj["start"].as<std::size_t>();
            spec.interval = {start, inj["end"].as<std::size_t>(start)};
            spec.magnitude = inj["magnitude"].as<double>();
            m.config.injections.push_back(spec);
          }
          members.push_back(std::move(m));
        }
      } else {
        for (const auto& kv : root) {
          const auto key = kv.first.as<std::string>();
          const auto& v = kv.second;
          if (key == "count") suite.count = v.as<std::size_t>();
          else if (key == "length") suite.length = v.as<std::size_t>();
          else if (key == "base_period") suite.base_period = v.as<std::size_t>();
          else if (key == "noise_sigma") suite.noise_sigma = v.as<double>();
          else if (key == "seed") suite.seed = v.as<std::uint64_t>();
          else if (key == "train_fraction") suite.train_fraction = v.as<double>();
          else if (key == "point_magnitude") suite.point_magnitude = v.as<double>();
          else if (key == "seasonal_length") suite.seasonal_length = v.as<std::size_t>();
          else if (key == "seasonal_magnitude") suite.seasonal_magnitude = v.as<double>();
          else if (key == "trend_length") suite.trend_length = v.as<std::size_t>();
          else if (key == "trend_magnitude") suite.trend_magnitude = v.as<double>();
          else if (key == "name_prefix") suite.name_prefix = v.as<std::string>();
          else throw ConfigError("unknown synthetic spec key '" + key + "'");
        }
      }
    } catch (const YAML::Exception& e) {
      throw ConfigError(fmt::format("{}: {}", options.spec->string(), e.what()));
    }
  }
  if (members.empty()) members = synth::make_suite(suite);

  // Validate everything before writing anything.
  for (const auto& m : members) {
    try {
      synth::validate(m.config);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("series '{}': {}", m.name, e.what()));
    }
  }
  ingest::DatasetManifest manifest;
  for (const auto& m : members) {
    auto entry = synth::write_series(m, options.output_dir);
    if (m.train_split == 0) entry.train_split.reset();
    manifest.entries.push_back(std::move(entry));
  }
  const auto path = options.output_dir / "manifest.yaml";
  ingest::write_manifest(manifest, path);
  return path;
}

std::size_t run_render(const RunConfig& cfg, const TimeSeries& series, const fs::path& output_dir) {
  cfg.pipeline.validate();
  const auto norm = normalize(series);
  const auto sizing = resolve_sizing(cfg.pipeline, norm.size(), series.period_hint());
  const auto seg = make_windows(norm, sizing.width, sizing.stride);
  for (const auto& w : seg.windows) {
    const auto img = render_window(w, cfg.pipeline.plot);
    report::write_file(output_dir / fmt::format("{}.png", w.index),
                       std::string_view(reinterpret_cast<const char*>(img.png.data()), img.png.size()));
  }
  return seg.windows.size();
}

}  // namespace tama::cli
