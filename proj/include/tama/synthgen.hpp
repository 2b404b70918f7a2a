#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tama/core.hpp"
#include "tama/ingest.hpp"

namespace tama::synth {

/// Name of the noise algorithm, recorded in dataset metadata so that
/// fixtures stay comparable across releases.
inline constexpr std::string_view kNoiseAlgorithm = "mt19937_64+box-muller";

struct AnomalySpec {
  AnomalyType kind = AnomalyType::Point;
  AnomalyInterval interval;
  /// Point: additive spike. Seasonal: frequency multiplier. Trend: final offset.
  double magnitude = 0.0;
};

struct GeneratorConfig {
  std::size_t length = 7200;
  std::size_t base_period = 100;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;
  std::vector<AnomalySpec> injections;
};

struct SyntheticSeries {
  TimeSeries series;
  LabelSeries labels;
  TypeMap types;
};

/// Throws ValidationError naming the offending injection(s).
void validate(const GeneratorConfig& config);

/// Sine of period `base_period` plus seeded Gaussian noise, with the
/// requested anomalies injected. Labels are true exactly on the injected
/// intervals.
[[nodiscard]] SyntheticSeries generate(const GeneratorConfig& config, std::string name = "synthetic");

/// Parameters for a batch of series with one anomaly of each generated type,
/// placed at random after an anomaly-free training prefix.
struct SuiteConfig {
  std::size_t count = 10;
  std::size_t length = 3000;
  std::size_t base_period = 100;
  double noise_sigma = 0.05;
  std::uint64_t seed = 2024;
  /// Fraction of each series kept anomaly-free for reference sampling.
  double train_fraction = 0.3;
  double point_magnitude = 3.0;
  std::size_t seasonal_length = 200;
  double seasonal_magnitude = 2.0;
  std::size_t trend_length = 150;
  double trend_magnitude = 2.0;
  std::string name_prefix = "synth_";
};

struct SuiteMember {
  std::string name;
  std::size_t train_split = 0;
  GeneratorConfig config;
};

[[nodiscard]] std::vector<SuiteMember> make_suite(const SuiteConfig& suite);

/// Writes `<name>.series.txt`, `<name>.labels.txt`, `<name>.types.txt` and
/// `<name>.meta.json` into `dir` and returns the manifest entry for them.
ingest::ManifestEntry write_series(const SuiteMember& member, const std::filesystem::path& dir);

}  // namespace tama::synth
