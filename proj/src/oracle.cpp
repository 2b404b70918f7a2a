#include "tama/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <nlohmann/json.hpp>

#include "tama/error.hpp"
#include "tama/random.hpp"
#include "tama/respparse.hpp"

namespace tama {
namespace {

constexpr std::string_view kNormalPattern =
    "The reference slices show a smooth, stable oscillation with a consistent period and amplitude. "
    "Peaks and troughs repeat at regular intervals with similar heights, there is no visible trend "
    "and the mean stays constant across every slice. Small high-frequency fluctuations are present "
    "but remain well inside the regular envelope. Differences at the beginning and end of a slice "
    "come from truncation rather than from anomalies.";

AnomalyType truth_kind(const OracleTruth& truth, const AnomalyInterval& iv) {
  if (iv.start < truth.types.size() && truth.types[iv.start]) return *truth.types[iv.start];
  return iv.start == iv.end ? AnomalyType::Point : AnomalyType::Shapelet;
}

std::uint64_t series_seed(const OracleFidelity& fidelity, std::string_view series) {
  return mix64(fidelity.seed, fnv1a(series));
}

std::vector<Detection> window_detections(const OracleTruth& truth, const RequestMeta& meta,
                                         const OracleFidelity& fidelity) {
  const auto n = truth.labels.size();
  const auto first = meta.window_start;
  const auto last = meta.window_start + meta.window_length - 1;
  const bool noisy = fidelity.level == OracleFidelity::Level::noisy;
  const auto jitter = static_cast<std::int64_t>(fidelity.jitter);
  const auto base_seed = series_seed(fidelity, meta.series);

  std::vector<Detection> out;
  for (const auto& iv : labels_to_intervals(truth.labels)) {
    auto seen = iv;
    int confidence = 4;
    if (noisy) {
      Rng rng(mix64(base_seed, mix64(iv.start, iv.end)));
      const auto s = static_cast<std::int64_t>(iv.start) + rng.uniform_int(-jitter, jitter);
      const auto e = static_cast<std::int64_t>(iv.end) + rng.uniform_int(-jitter, jitter);
      const auto hi = static_cast<std::int64_t>(n) - 1;
      seen = make_interval(static_cast<std::size_t>(std::clamp<std::int64_t>(s, 0, hi)),
                           static_cast<std::size_t>(std::clamp<std::int64_t>(e, 0, hi)));
      confidence = static_cast<int>(rng.uniform_int(3, 4));
    }
    const auto lo = std::max(seen.start, first);
    const auto up = std::min(seen.end, last);
    if (lo > up) continue;
    out.push_back({{lo - first, up - first}, confidence, truth_kind(truth, iv), {}});
  }

  if (noisy && fidelity.fp_rate > 0.0) {
    Rng rng(mix64(base_seed, mix64(0x5eedf00dULL, first)));
    if (rng.bernoulli(fidelity.fp_rate)) {
      const auto len = std::min<std::int64_t>(rng.uniform_int(1, 2 * jitter + 1),
                                              static_cast<std::int64_t>(meta.window_length));
      const auto start = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(meta.window_length) - len));
      const auto kind = kAllAnomalyTypes[static_cast<std::size_t>(rng.uniform_int(0, 3))];
      const auto confidence = static_cast<int>(rng.uniform_int(1, 2));
      out.push_back({{start, start + static_cast<std::size_t>(len) - 1}, confidence, kind, {}});
    }
  }
  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return std::tie(a.interval.start, a.interval.end) < std::tie(b.interval.start, b.interval.end);
  });
  return out;
}

std::string describe(const std::vector<Detection>& detections) {
  if (detections.empty()) return "The slice follows the normal reference pattern; no abnormality found.";
  std::string text = "The slice deviates from the normal reference pattern:";
  for (const auto& d : detections) {
    text += fmt::format(" {} anomaly over local indices {}-{};", to_string(d.kind), d.interval.start,
                        d.interval.end);
  }
  return text;
}

}  // namespace

ChatResponse oracle_respond(const ChatRequest& request, const OracleTruth& truth,
                            const OracleFidelity& fidelity) {
  const auto meta = find_meta(request);
  if (!meta) throw ValidationError("oracle request carries no window metadata");

  nlohmann::ordered_json body;
  if (meta->stage == "reference") {
    body["normal_pattern"] = kNormalPattern;
    return {body.dump(), std::nullopt, "oracle"};
  }

  if (meta->window_length == 0 || meta->window_start + meta->window_length > truth.labels.size()) {
    throw ValidationError(fmt::format("oracle: window [{}, +{}) outside series '{}' of length {}",
                                      meta->window_start, meta->window_length, meta->series,
                                      truth.labels.size()));
  }

  if (meta->stage == "analyze") {
    const auto detections = window_detections(truth, *meta, fidelity);
    body["abnormal_index"] = serialize_index_list(detections);
    body["abnormal_description"] = describe(detections);
    body["abnormal_type_description"] =
        detections.empty() ? "No abnormality to classify." : "Types follow the reference taxonomy.";
    return {body.dump(), std::nullopt, "oracle"};
  }

  if (meta->stage == "reflect") {
    std::string corrected;
    switch (fidelity.reflection) {
      case OracleFidelity::Reflection::echo:
        corrected = meta->prior;
        break;
      case OracleFidelity::Reflection::truth:
        corrected = serialize_index_list(window_detections(truth, *meta, fidelity));
        break;
      case OracleFidelity::Reflection::drop_spurious: {
        auto prior = parse_index_list(meta->prior, meta->window_length).detections;
        const auto intervals = labels_to_intervals(truth.labels);
        std::erase_if(prior, [&](const Detection& d) {
          const AnomalyInterval global{d.interval.start + meta->window_start,
                                       d.interval.end + meta->window_start};
          return std::none_of(intervals.begin(), intervals.end(),
                              [&](const AnomalyInterval& iv) { return interval_overlap(iv, global) > 0; });
        });
        corrected = serialize_index_list(prior);
        break;
      }
    }
    body["corrected_abnormal_index"] = corrected;
    body["abnormal_description"] = "Checked every prior detection against the zoomed views.";
    return {body.dump(), std::nullopt, "oracle"};
  }

  throw ValidationError("oracle: unknown stage '" + meta->stage + "'");
}

void OracleBackend::add_series(const std::string& name, OracleTruth truth) {
  std::lock_guard lock(mutex_);
  truth_[name] = std::move(truth);
}

ChatResponse OracleBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto meta = find_meta(request);
  if (!meta) throw ValidationError("oracle request carries no window metadata");
  const OracleTruth* truth = nullptr;
  {
    std::lock_guard lock(mutex_);
    const auto it = truth_.find(meta->series);
    if (it == truth_.end()) throw ValidationError("oracle has no ground truth for series '" + meta->series + "'");
    truth = &it->second;
  }
  return oracle_respond(request, *truth, fidelity_);
}

}  // namespace tama
