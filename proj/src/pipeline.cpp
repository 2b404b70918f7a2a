#include "tama/pipeline.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "tama/error.hpp"
#include "tama/random.hpp"
#include "tama/respparse.hpp"

namespace tama {
namespace {

constexpr std::string_view kParseNudge =
    "The previous answer could not be parsed ({}). Reply with one JSON object that follows the "
    "requested format exactly.";

ChatRequest base_request(const PipelineConfig& cfg) {
  ChatRequest req;
  req.temperature = cfg.temperature;
  req.top_p = cfg.top_p;
  req.force_structured_output = cfg.json_mode;
  req.model_name = cfg.model;
  return req;
}

/// Calls the backend, retrying with a corrective note while `parse` throws
/// ResponseParseError. Returns the parsed value and the raw text.
template <typename Parse>
auto call_parsed(ChatBackend& backend, ChatRequest request, std::size_t retries, Parse parse) {
  for (std::size_t attempt = 0;; ++attempt) {
    const auto response = backend.complete(request);
    try {
      return std::make_pair(parse(response.text), response.text);
    } catch (const ResponseParseError& e) {
      if (attempt >= retries) throw;
      spdlog::debug("unparseable response ({}); retrying", e.what());
      // Keep the metadata part last.
      const auto at = request.parts.empty() ? request.parts.end() : std::prev(request.parts.end());
      request.parts.insert(at, TextPart{fmt::format(kParseNudge, e.what())});
    }
  }
}

std::string image_guide(std::size_t references, const std::vector<Detection>& prior, std::size_t window_length) {
  std::string text;
  if (references > 0) text += fmt::format("The first {} images are normal references. ", references);
  text += fmt::format("The next {} images are zoomed views of the predicted intervals", prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    text += fmt::format("{} ({}, {})", i == 0 ? "" : ",", prior[i].interval.start, prior[i].interval.end);
  }
  text += fmt::format(". The last image is the whole slice. All images use slice indices 0 to {}.",
                      window_length - 1);
  return text;
}

std::vector<std::size_t> pick(std::size_t available, std::size_t wanted, std::uint64_t seed) {
  std::vector<std::size_t> idx(available);
  for (std::size_t i = 0; i < available; ++i) idx[i] = i;
  Rng rng(seed);
  const auto take = std::min(wanted, available);
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(available) - 1));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Reference windows for a series, already normalized.
std::vector<Window> reference_windows(const Segmentation& seg, const ReferenceSource& source,
                                      const PipelineConfig& cfg, const std::string& series) {
  const auto seed = mix64(cfg.seed, fnv1a(series));
  std::vector<Window> pool;
  if (source.train_split) {
    for (const auto& w : seg.windows) {
      if (w.start + w.values.size() <= *source.train_split) pool.push_back(w);
    }
  } else {
    for (const auto& ext : source.external) {
      const auto norm = normalize(ext);
      if (norm.size() <= seg.plan.width) {
        pool.push_back({pool.size(), 0, std::vector<double>(norm.values().begin(), norm.values().end())});
        continue;
      }
      for (auto w : make_windows(norm, seg.plan.width, seg.plan.stride).windows) {
        w.index = pool.size();
        pool.push_back(std::move(w));
      }
    }
  }
  if (pool.size() < cfg.n_r) {
    spdlog::warn("{}: only {} reference windows available, {} requested", series, pool.size(), cfg.n_r);
  }
  std::vector<Window> out;
  for (const auto i : pick(pool.size(), cfg.n_r, seed)) out.push_back(pool[i]);
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (window && *window == 0) throw ConfigError("window must be positive");
  if (stride && *stride == 0) throw ConfigError("stride must be positive");
  if (window && stride && *stride >= *window) throw ConfigError("stride must be smaller than the window");
  if (!(overlap > 0.0 && overlap < 1.0)) throw ConfigError("overlap ratio must be in (0, 1)");
  if (window_periods == 0) throw ConfigError("window_periods must be positive");
  if (!(zoom_margin >= 0.0)) throw ConfigError("zoom_margin must be non-negative");
  if (max_parallel == 0) throw ConfigError("max_parallel must be positive");
  tama::validate(plot);
  ChatRequest probe = base_request(*this);
  probe.parts.emplace_back(TextPart{"probe"});
  probe.validate();
}

WindowSizing resolve_sizing(const PipelineConfig& cfg, std::size_t length, std::optional<std::size_t> period_hint) {
  auto sizing = default_sizing(length, period_hint, cfg.overlap, cfg.window_periods);
  if (cfg.window) {
    sizing.width = std::clamp<std::size_t>(*cfg.window, 2, length);
    const auto stride = std::llround(static_cast<double>(sizing.width) * cfg.overlap);
    sizing.stride = std::clamp<std::size_t>(static_cast<std::size_t>(stride), 1, sizing.width - 1);
  }
  if (cfg.stride) sizing.stride = *cfg.stride;
  return sizing;
}

ReferenceSummary skipped_reference() {
  return {"No normal reference is available. Judge the slice on its own.", {}, true};
}

ReferenceSummary learn_references(std::span<const RenderedImage> images, std::vector<std::string> image_ids,
                                  ChatBackend& backend, const PipelineConfig& cfg, const std::string& series) {
  if (images.empty()) throw ValidationError("reference learning needs at least one image");
  auto req = base_request(cfg);
  req.parts.emplace_back(TextPart{cfg.prompts.reference});
  for (const auto& img : images) req.parts.emplace_back(ImagePart{img.png});
  req.parts.emplace_back(make_meta_part({"reference", series, 0, 0, 0, {}}));
  auto [pattern, raw] = call_parsed(backend, std::move(req), cfg.parse_retries,
                                    [](const std::string& text) { return parse_normal_pattern(text); });
  return {std::move(pattern), std::move(image_ids), false};
}

WindowAnalysis analyze_window(const Window& window, const RenderedImage& image, const ReferenceSummary& summary,
                              ChatBackend& backend, const PipelineConfig& cfg, const std::string& series) {
  const auto len = window.values.size();
  WindowAnalysis out;
  out.window_index = window.index;
  out.window_start = window.start;
  out.window_length = len;

  auto req = base_request(cfg);
  req.parts.emplace_back(TextPart{fill_template(cfg.prompts.analyze, {{"normal_pattern", summary.normal_pattern},
                                                                      {"window_length", std::to_string(len)},
                                                                      {"window_last", std::to_string(len - 1)}})});
  req.parts.emplace_back(ImagePart{image.png});
  req.parts.emplace_back(make_meta_part({"analyze", series, window.index, window.start, len, {}}));
  try {
    auto [fields, raw] = call_parsed(backend, std::move(req), cfg.parse_retries,
                                     [len](const std::string& text) { return parse_analysis(text, len); });
    out.detections = std::move(fields.detections);
    out.abnormal_description = std::move(fields.abnormal_description);
    out.abnormal_type_description = std::move(fields.abnormal_type_description);
    out.diagnostics = std::move(fields.diagnostics);
    out.raw_response = std::move(raw);
  } catch (const ReplayMissError&) {
    throw;
  } catch (const ResponseParseError& e) {
    out.failed = true;
    out.error = e.what();
    out.raw_response = e.raw();
  } catch (const GatewayError& e) {
    out.failed = true;
    out.error = e.what();
  }
  if (out.failed) spdlog::warn("{}: window {} failed: {}", series, window.index, out.error);
  return out;
}

WindowAnalysis reflect(const Window& window, const WindowAnalysis& prior, const RenderedImage& image,
                       const ReferenceSummary& summary, std::span<const RenderedImage> reference_images,
                       ChatBackend& backend, const PipelineConfig& cfg, const std::string& series,
                       const ImageSink& sink) {
  if (prior.detections.empty()) return prior;
  const auto len = window.values.size();
  const TimeSeries local(window.values, series);
  const auto prior_list = serialize_index_list(prior.detections);
  const auto refs = cfg.reflection_resend_reference_images ? reference_images.size() : 0;

  auto req = base_request(cfg);
  req.parts.emplace_back(TextPart{fill_template(
      cfg.prompts.reflect, {{"normal_pattern", summary.normal_pattern},
                            {"image_guide", image_guide(refs, prior.detections, len)},
                            {"prior_prediction", prior_list},
                            {"prior_description", prior.abnormal_description}})});
  for (std::size_t i = 0; i < refs; ++i) req.parts.emplace_back(ImagePart{reference_images[i].png});
  for (std::size_t i = 0; i < prior.detections.size(); ++i) {
    auto zoom = render_zoom(local, prior.detections[i].interval, cfg.zoom_margin, cfg.plot);
    if (sink) sink(fmt::format("{}_zoom_{}", window.index, i), zoom);
    req.parts.emplace_back(ImagePart{std::move(zoom.png)});
  }
  req.parts.emplace_back(ImagePart{image.png});
  req.parts.emplace_back(make_meta_part({"reflect", series, window.index, window.start, len, prior_list}));

  WindowAnalysis out = prior;
  try {
    auto [fields, raw] = call_parsed(backend, std::move(req), cfg.parse_retries,
                                     [len](const std::string& text) { return parse_analysis(text, len); });
    out.reflected = true;
    out.pre_reflection = prior.detections;
    out.detections = std::move(fields.detections);
    if (!fields.abnormal_description.empty()) out.abnormal_description = std::move(fields.abnormal_description);
    if (!fields.abnormal_type_description.empty()) {
      out.abnormal_type_description = std::move(fields.abnormal_type_description);
    }
    for (auto& d : fields.diagnostics) out.diagnostics.push_back("reflect: " + d);
    out.reflection_raw = std::move(raw);
  } catch (const ReplayMissError&) {
    throw;
  } catch (const ResponseParseError& e) {
    out.reflection_error = e.what();
    out.reflection_raw = e.raw();
  } catch (const GatewayError& e) {
    out.reflection_error = e.what();
  }
  if (!out.reflection_error.empty()) {
    spdlog::warn("{}: reflection of window {} failed, keeping prior: {}", series, window.index, out.reflection_error);
  }
  return out;
}

PipelineRun run(const TimeSeries& series, const PipelineConfig& cfg, ChatBackend& backend,
                const ReferenceSource& source, const ImageSink& sink) {
  cfg.validate();
  const auto& name = series.name();
  const auto norm = normalize(series);
  const auto sizing = resolve_sizing(cfg, norm.size(), series.period_hint());
  const auto seg = make_windows(norm, sizing.width, sizing.stride);

  std::mutex sink_mutex;
  const ImageSink emit = [&](const std::string& id, const RenderedImage& img) {
    if (!sink) return;
    std::lock_guard lock(sink_mutex);
    sink(id, img);
  };

  PipelineRun out;
  out.series = name;
  out.length = norm.size();
  out.plan = seg.plan;

  std::vector<RenderedImage> reference_images;
  if (cfg.n_r == 0) {
    out.reference = skipped_reference();
  } else {
    const auto refs = reference_windows(seg, source, cfg, name);
    if (refs.empty()) {
      spdlog::warn("{}: no reference source; skipping reference learning", name);
      out.reference = skipped_reference();
    } else {
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < refs.size(); ++i) {
        reference_images.push_back(render_window(refs[i], cfg.plot));
        ids.push_back(fmt::format("ref_{}", i));
        emit(ids.back(), reference_images.back());
      }
      out.reference = learn_references(reference_images, std::move(ids), backend, cfg, name);
    }
  }

  out.windows.resize(seg.windows.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    while (!stop.load()) {
      const auto k = next.fetch_add(1);
      if (k >= seg.windows.size()) return;
      try {
        const auto& w = seg.windows[k];
        const auto image = render_window(w, cfg.plot);
        emit(std::to_string(k), image);
        auto analysis = analyze_window(w, image, out.reference, backend, cfg, name);
        if (cfg.reflection && !analysis.failed && !analysis.detections.empty()) {
          analysis = reflect(w, analysis, image, out.reference, reference_images, backend, cfg, name, emit);
        }
        out.windows[k] = std::move(analysis);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop.store(true);
      }
    }
  };

  const auto threads = std::min(cfg.max_parallel, seg.windows.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace tama
