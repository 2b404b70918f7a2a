#include "tama/synthgen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "tama/error.hpp"
#include "tama/random.hpp"

namespace tama::synth {
namespace fs = std::filesystem;

namespace {

std::string describe(const AnomalySpec& spec) {
  return fmt::format("{} ({}, {})", to_string(spec.kind), spec.interval.start, spec.interval.end);
}

}  // namespace

void validate(const GeneratorConfig& config) {
  if (config.length == 0) throw ValidationError("generator length must be positive");
  if (config.base_period == 0) throw ValidationError("generator base_period must be positive");
  if (!(config.noise_sigma >= 0.0) || !std::isfinite(config.noise_sigma)) {
    throw ValidationError("generator noise_sigma must be a non-negative number");
  }
  for (const auto& spec : config.injections) {
    if (spec.kind == AnomalyType::Shapelet) {
      throw ValidationError("shapelet injections are not generated: " + describe(spec));
    }
    if (spec.interval.start > spec.interval.end || spec.interval.end >= config.length) {
      throw ValidationError(fmt::format("injection {} outside [0, {}]", describe(spec),
                                        config.length - 1));
    }
    if (spec.kind == AnomalyType::Point && spec.interval.start != spec.interval.end) {
      throw ValidationError("point injection must have length 1: " + describe(spec));
    }
    if (!std::isfinite(spec.magnitude)) {
      throw ValidationError("injection magnitude must be finite: " + describe(spec));
    }
  }
  for (std::size_t i = 0; i < config.injections.size(); ++i) {
    for (std::size_t j = i + 1; j < config.injections.size(); ++j) {
      if (interval_overlap(config.injections[i].interval, config.injections[j].interval) > 0) {
        throw ValidationError(fmt::format("injections overlap: {} and {}",
                                          describe(config.injections[i]),
                                          describe(config.injections[j])));
      }
    }
  }
}

SyntheticSeries generate(const GeneratorConfig& config, std::string name) {
  validate(config);
  const auto n = config.length;
  const auto period = static_cast<double>(config.base_period);

  std::vector<double> values(n);
  for (std::size_t t = 0; t < n; ++t) {
    // Seasonal injections speed up the phase inside their interval and keep
    // the accumulated offset afterwards, so the signal stays continuous.
    double phase = static_cast<double>(t);
    for (const auto& spec : config.injections) {
      if (spec.kind != AnomalyType::Seasonal || t <= spec.interval.start) continue;
      const auto inside = std::min(t - spec.interval.start, interval_length(spec.interval));
      phase += (spec.magnitude - 1.0) * static_cast<double>(inside);
    }
    values[t] = std::sin(2.0 * std::numbers::pi * phase / period);
  }

  if (config.noise_sigma > 0.0) {
    Rng rng(config.seed);
    for (auto& v : values) v += config.noise_sigma * rng.normal();
  }

  std::vector<bool> flags(n, false);
  TypeMap types(n);
  for (const auto& spec : config.injections) {
    const auto [s, e] = spec.interval;
    switch (spec.kind) {
      case AnomalyType::Point:
        values[s] += spec.magnitude;
        break;
      case AnomalyType::Trend:
        for (std::size_t t = s; t < n; ++t) {
          const double ramp = t >= e || e == s
                                  ? 1.0
                                  : static_cast<double>(t - s) / static_cast<double>(e - s);
          values[t] += spec.magnitude * ramp;
        }
        break;
      case AnomalyType::Seasonal:
      case AnomalyType::Shapelet:
        break;
    }
    for (auto t = s; t <= e; ++t) {
      flags[t] = true;
      types[t] = spec.kind;
    }
  }
  return {TimeSeries(std::move(values), std::move(name), config.base_period),
          LabelSeries(std::move(flags)), std::move(types)};
}

std::vector<SuiteMember> make_suite(const SuiteConfig& suite) {
  if (suite.count == 0) throw ValidationError("suite count must be positive");
  if (!(suite.train_fraction >= 0.0 && suite.train_fraction < 1.0)) {
    throw ValidationError("train_fraction must be in [0, 1)");
  }
  const auto train_split =
      static_cast<std::size_t>(std::floor(static_cast<double>(suite.length) * suite.train_fraction));
  const auto region = suite.length - train_split;
  const auto slot = region / 3;
  const auto gap = suite.base_period / 2;
  const std::size_t longest = std::max<std::size_t>({1, suite.seasonal_length, suite.trend_length});
  if (suite.seasonal_length == 0 || suite.trend_length == 0 || slot < longest + 2 * gap + 1) {
    throw ValidationError(fmt::format(
        "suite: test region of {} samples cannot hold three anomalies of lengths 1, {}, {}", region,
        suite.seasonal_length, suite.trend_length));
  }

  std::vector<SuiteMember> members;
  members.reserve(suite.count);
  for (std::size_t i = 0; i < suite.count; ++i) {
    const auto series_seed = mix64(suite.seed, i);
    Rng rng(series_seed);

    std::array<AnomalyType, 3> order = {AnomalyType::Point, AnomalyType::Seasonal,
                                        AnomalyType::Trend};
    for (std::size_t k = order.size() - 1; k > 0; --k) {
      std::swap(order[k], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k)))]);
    }

    GeneratorConfig config;
    config.length = suite.length;
    config.base_period = suite.base_period;
    config.noise_sigma = suite.noise_sigma;
    config.seed = mix64(series_seed, 1);
    for (std::size_t k = 0; k < order.size(); ++k) {
      AnomalySpec spec;
      spec.kind = order[k];
      std::size_t len = 1;
      switch (spec.kind) {
        case AnomalyType::Point:
          spec.magnitude = rng.bernoulli(0.5) ? suite.point_magnitude : -suite.point_magnitude;
          break;
        case AnomalyType::Seasonal:
          len = suite.seasonal_length;
          spec.magnitude = suite.seasonal_magnitude;
          break;
        default:
          len = suite.trend_length;
          spec.magnitude = rng.bernoulli(0.5) ? suite.trend_magnitude : -suite.trend_magnitude;
          break;
      }
      const auto slot_start = train_split + k * slot + gap;
      const auto latest = train_split + (k + 1) * slot - gap - len;
      const auto start = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(slot_start), static_cast<std::int64_t>(latest)));
      spec.interval = {start, start + len - 1};
      config.injections.push_back(spec);
    }
    validate(config);
    members.push_back({fmt::format("{}{:02}", suite.name_prefix, i), train_split, std::move(config)});
  }
  return members;
}

ingest::ManifestEntry write_series(const SuiteMember& member, const fs::path& dir) {
  fs::create_directories(dir);
  const auto data = generate(member.config, member.name);
  const auto series_path = dir / (member.name + ".series.txt");
  const auto label_path = dir / (member.name + ".labels.txt");
  const auto type_path = dir / (member.name + ".types.txt");
  const auto meta_path = dir / (member.name + ".meta.json");

  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(series_path);
    for (double v : data.series.values()) out << fmt::format("{}\n", v);
  }
  {
    auto labels = open(label_path);
    auto types = open(type_path);
    for (const auto& spec : member.config.injections) {
      labels << spec.interval.start << ' ' << spec.interval.end << '\n';
      types << spec.interval.start << ' ' << spec.interval.end << ' ' << to_string(spec.kind) << '\n';
    }
  }
  {
    nlohmann::ordered_json meta;
    meta["name"] = member.name;
    meta["length"] = member.config.length;
    meta["base_period"] = member.config.base_period;
    meta["noise_sigma"] = member.config.noise_sigma;
    meta["seed"] = member.config.seed;
    meta["noise_algorithm"] = kNoiseAlgorithm;
    meta["train_split"] = member.train_split;
    auto& inj = meta["injections"] = nlohmann::ordered_json::array();
    for (const auto& spec : member.config.injections) {
      inj.push_back({{"kind", to_string(spec.kind)},
                     {"start", spec.interval.start},
                     {"end", spec.interval.end},
                     {"magnitude", spec.magnitude}});
    }
    open(meta_path) << meta.dump(2) << '\n';
  }

  ingest::ManifestEntry entry;
  entry.name = member.name;
  entry.series_path = series_path;
  entry.label_path = label_path;
  entry.type_path = type_path;
  entry.train_split = member.train_split;
  entry.period_hint = member.config.base_period;
  return entry;
}

}  // namespace tama::synth
