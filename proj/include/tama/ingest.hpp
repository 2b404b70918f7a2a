#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tama/core.hpp"

namespace tama::ingest {

/// Reads a one-value-per-line file, or one column of a delimited file.
/// Comma or whitespace delimiters are detected per file; blank lines and
/// lines starting with '#' are skipped.
[[nodiscard]] TimeSeries load_series(const std::filesystem::path& path,
                                     std::optional<std::size_t> column = std::nullopt);

/// Splits a delimited multi-column file into one series per column,
/// named "<file>:<col>".
[[nodiscard]] std::vector<TimeSeries> split_channels(const std::filesystem::path& path);

/// Reads either per-point 0/1 flags (one per line) or inclusive
/// "start end" interval pairs, and returns exactly `length` flags.
[[nodiscard]] LabelSeries load_labels(const std::filesystem::path& path, std::size_t length);

/// Reads "start end type" lines into a per-point type map.
[[nodiscard]] TypeMap load_type_map(const std::filesystem::path& path, std::size_t length);

struct ManifestEntry {
  std::string name;
  std::filesystem::path series_path;
  std::optional<std::filesystem::path> label_path;
  std::optional<std::filesystem::path> type_path;
  std::optional<std::size_t> train_split;
  std::optional<std::size_t> period_hint;
  std::optional<std::size_t> column;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

/// Loads a YAML manifest. Relative paths resolve against the manifest's
/// directory; every referenced file must exist and names must be unique.
[[nodiscard]] DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// A manifest entry with its files loaded.
struct LoadedSeries {
  ManifestEntry entry;
  TimeSeries series;
  std::optional<LabelSeries> labels;
  std::optional<TypeMap> types;
};

[[nodiscard]] LoadedSeries load_entry(const ManifestEntry& entry);

}  // namespace tama::ingest
