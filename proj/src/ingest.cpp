#include "tama/ingest.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tama/error.hpp"

namespace tama::ingest {
namespace fs = std::filesystem;

namespace {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Row> read_rows(const fs::path& path) {
  const auto text = read_file(path);
  const bool comma = text.find(',') != std::string::npos;
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    Row row{line_no, {}};
    if (comma) {
      std::string_view rest = body;
      while (true) {
        const auto pos = rest.find(',');
        row.cells.push_back(trim(rest.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        rest.remove_prefix(pos + 1);
      }
    } else {
      std::istringstream cells(body);
      std::string cell;
      while (cells >> cell) row.cells.push_back(cell);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": file is empty");
  return rows;
}

double parse_double(const std::string& cell, const fs::path& path, std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw IngestError(path.string(), line, "non-numeric value '" + cell + "'");
  }
  if (!std::isfinite(value)) {
    throw IngestError(path.string(), line, "non-finite value '" + cell + "'");
  }
  return value;
}

std::optional<long long> parse_int(const std::string& cell) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return value;
}

std::size_t parse_index(const std::string& cell, std::size_t length, const fs::path& path,
                        std::size_t line) {
  const auto value = parse_int(cell);
  if (!value) throw IngestError(path.string(), line, "expected an integer, got '" + cell + "'");
  if (*value < 0 || static_cast<unsigned long long>(*value) >= length) {
    throw IngestError(path.string(), line,
                      "index " + cell + " outside [0, " + std::to_string(length - 1) + "]");
  }
  return static_cast<std::size_t>(*value);
}

}  // namespace

TimeSeries load_series(const fs::path& path, std::optional<std::size_t> column) {
  const auto rows = read_rows(path);
  const auto col = column.value_or(0);
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& row : rows) {
    if (col >= row.cells.size()) {
      throw IngestError(path.string(), row.line, "missing column " + std::to_string(col));
    }
    values.push_back(parse_double(row.cells[col], path, row.line));
  }
  return TimeSeries(std::move(values), path.stem().string());
}

std::vector<TimeSeries> split_channels(const fs::path& path) {
  const auto rows = read_rows(path);
  const auto width = rows.front().cells.size();
  std::vector<std::vector<double>> columns(width);
  for (auto& c : columns) c.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.cells.size() != width) {
      throw IngestError(path.string(), row.line,
                        "ragged row: expected " + std::to_string(width) + " columns, got " +
                            std::to_string(row.cells.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      columns[c].push_back(parse_double(row.cells[c], path, row.line));
    }
  }
  std::vector<TimeSeries> out;
  out.reserve(width);
  const auto file = path.filename().string();
  for (std::size_t c = 0; c < width; ++c) {
    out.emplace_back(std::move(columns[c]), file + ":" + std::to_string(c));
  }
  return out;
}

LabelSeries load_labels(const fs::path& path, std::size_t length) {
  if (length == 0) throw ValidationError("label length must be positive");
  std::vector<Row> rows;
  try {
    rows = read_rows(path);
  } catch (const IngestError&) {
    throw;
  } catch (const ValidationError&) {
    // An empty interval-form file means "no anomalies".
    if (fs::exists(path)) return LabelSeries(std::vector<bool>(length, false));
    throw;
  }

  const bool interval_form = rows.front().cells.size() >= 2;
  if (!interval_form) {
    std::vector<bool> flags;
    flags.reserve(rows.size());
    for (const auto& row : rows) {
      if (row.cells.size() != 1) {
        throw IngestError(path.string(), row.line, "expected a single 0/1 flag");
      }
      const auto& cell = row.cells.front();
      if (cell == "0") {
        flags.push_back(false);
      } else if (cell == "1") {
        flags.push_back(true);
      } else {
        throw IngestError(path.string(), row.line, "expected 0 or 1, got '" + cell + "'");
      }
    }
    if (flags.size() != length) {
      throw ValidationError(path.string() + ": " + std::to_string(flags.size()) +
                            " flags for a series of length " + std::to_string(length));
    }
    return LabelSeries(std::move(flags));
  }

  std::vector<AnomalyInterval> intervals;
  for (const auto& row : rows) {
    if (row.cells.size() != 2) {
      throw IngestError(path.string(), row.line, "expected 'start end'");
    }
    const auto a = parse_index(row.cells[0], length, path, row.line);
    const auto b = parse_index(row.cells[1], length, path, row.line);
    if (a > b) throw IngestError(path.string(), row.line, "start after end");
    intervals.push_back({a, b});
  }
  return intervals_to_labels(intervals, length);
}

TypeMap load_type_map(const fs::path& path, std::size_t length) {
  TypeMap types(length);
  std::vector<Row> rows;
  try {
    rows = read_rows(path);
  } catch (const IngestError&) {
    throw;
  } catch (const ValidationError&) {
    if (fs::exists(path)) return types;
    throw;
  }
  for (const auto& row : rows) {
    if (row.cells.size() != 3) {
      throw IngestError(path.string(), row.line, "expected 'start end type'");
    }
    const auto a = parse_index(row.cells[0], length, path, row.line);
    const auto b = parse_index(row.cells[1], length, path, row.line);
    const auto kind = anomaly_type_from_string(row.cells[2]);
    if (!kind) throw IngestError(path.string(), row.line, "unknown type '" + row.cells[2] + "'");
    if (a > b) throw IngestError(path.string(), row.line, "start after end");
    for (auto t = a; t <= b; ++t) types[t] = *kind;
  }
  return types;
}

namespace {

std::optional<std::size_t> optional_index(const YAML::Node& node, const char* key) {
  if (!node[key] || node[key].IsNull()) return std::nullopt;
  const auto value = node[key].as<long long>();
  if (value < 0) throw ValidationError(std::string("manifest field '") + key + "' is negative");
  return static_cast<std::size_t>(value);
}

std::optional<fs::path> optional_path(const YAML::Node& node, const char* key, const fs::path& base) {
  if (!node[key] || node[key].IsNull()) return std::nullopt;
  fs::path p = node[key].as<std::string>();
  return p.is_relative() ? base / p : p;
}

void require_exists(const fs::path& p, const std::string& name) {
  if (!fs::exists(p)) {
    throw ValidationError("manifest entry '" + name + "': missing file " + p.string());
  }
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("manifest not found: " + path.string());
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  const auto entries = root["entries"];
  if (!entries || !entries.IsSequence()) {
    throw ValidationError("manifest " + path.string() + " has no 'entries' list");
  }
  DatasetManifest manifest;
  std::set<std::string> names;
  try {
    for (const auto& node : entries) {
      ManifestEntry e;
      if (!node["series"]) throw ValidationError("manifest entry without 'series'");
      e.series_path = *optional_path(node, "series", base);
      e.name = node["name"] ? node["name"].as<std::string>() : e.series_path.stem().string();
      e.label_path = optional_path(node, "labels", base);
      e.type_path = optional_path(node, "types", base);
      e.train_split = optional_index(node, "train_split");
      e.period_hint = optional_index(node, "period_hint");
      e.column = optional_index(node, "column");
      if (e.period_hint && *e.period_hint == 0) {
        throw ValidationError("manifest entry '" + e.name + "': period_hint must be positive");
      }
      require_exists(e.series_path, e.name);
      if (e.label_path) require_exists(*e.label_path, e.name);
      if (e.type_path) require_exists(*e.type_path, e.name);
      if (!names.insert(e.name).second) {
        throw ValidationError("duplicate manifest entry name '" + e.name + "'");
      }
      manifest.entries.push_back(std::move(e));
    }
  } catch (const YAML::Exception& e) {
    throw ValidationError("manifest " + path.string() + ": " + e.what());
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const auto base = path.parent_path();
  auto rel = [&](const fs::path& p) { return p.lexically_relative(base).generic_string(); };
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "entries" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : manifest.entries) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << e.name;
    out << YAML::Key << "series" << YAML::Value << rel(e.series_path);
    if (e.label_path) out << YAML::Key << "labels" << YAML::Value << rel(*e.label_path);
    if (e.type_path) out << YAML::Key << "types" << YAML::Value << rel(*e.type_path);
    if (e.train_split) out << YAML::Key << "train_split" << YAML::Value << *e.train_split;
    if (e.period_hint) out << YAML::Key << "period_hint" << YAML::Value << *e.period_hint;
    if (e.column) out << YAML::Key << "column" << YAML::Value << *e.column;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot write " + path.string());
  file << out.c_str() << '\n';
}

LoadedSeries load_entry(const ManifestEntry& entry) {
  auto raw = load_series(entry.series_path, entry.column);
  TimeSeries series(std::vector<double>(raw.values().begin(), raw.values().end()), entry.name,
                    entry.period_hint);
  std::optional<LabelSeries> labels;
  std::optional<TypeMap> types;
  if (entry.label_path) labels = load_labels(*entry.label_path, series.size());
  if (entry.type_path) types = load_type_map(*entry.type_path, series.size());
  if (entry.train_split && *entry.train_split > series.size()) {
    throw ValidationError("manifest entry '" + entry.name + "': train_split beyond series length");
  }
  return {entry, std::move(series), std::move(labels), std::move(types)};
}

}  // namespace tama::ingest
