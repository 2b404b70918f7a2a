#include "tama/respparse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "tama/error.hpp"

namespace tama {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_quote(char c) { return c == '"' || c == '\''; }

std::string_view strip_quotes(std::string_view s) {
  s = trim(s);
  while (!s.empty() && is_quote(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_quote(s.back())) s.remove_suffix(1);
  return trim(s);
}

class IndexListParser {
 public:
  IndexListParser(std::string_view text, std::size_t window_length, const LabelMap& labels)
      : text_(text), window_length_(window_length), labels_(labels) {}

  IndexListResult run() {
    skip_ws();
    const bool bracketed = consume('[');
    if (!bracketed) note("missing opening '['");
    std::size_t entry = 0;
    while (true) {
      skip_ws();
      if (eof()) {
        if (bracketed) note("missing closing ']'");
        break;
      }
      if (peek() == ']') {
        ++pos_;
        skip_ws();
        if (!eof()) note(fmt::format("ignored trailing text '{}'", snippet(pos_, text_.size())));
        break;
      }
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      ++entry;
      const auto begin = pos_;
      std::string why;
      if (!parse_entry(entry, why)) {
        pos_ = begin;
        skip_to_separator();
        note(fmt::format("entry {}: {} in '{}'; skipped", entry, why, snippet(begin, pos_)));
      }
    }
    return std::move(result_);
  }

 private:
  bool parse_entry(std::size_t entry, std::string& why) {
    if (!consume('(')) return fail(why, "expected '('");
    const auto first = parse_int();
    if (!first) return fail(why, "expected an index");
    auto second = first;
    if (consume(',')) {
      second = parse_int();
      if (!second) return fail(why, "expected an end index");
    }
    if (!consume(')')) return fail(why, "expected ')'");
    if (!consume('/')) return fail(why, "expected '/' before the confidence");
    const auto confidence = parse_int();
    if (!confidence) return fail(why, "expected an integer confidence");
    if (!consume('/')) return fail(why, "expected '/' before the type");

    const auto label_begin = pos_;
    while (!eof() && peek() != ',' && peek() != ']') ++pos_;
    const auto label = strip_quotes(text_.substr(label_begin, pos_ - label_begin));
    if (label.empty()) return fail(why, "missing anomaly type");

    if (*confidence < 1 || *confidence > 4) {
      note(fmt::format("entry {}: confidence {} outside 1-4; dropped", entry, *confidence));
      return true;
    }
    const auto kind = labels_.lookup(label);
    if (!kind) {
      note(fmt::format("entry {}: unknown anomaly type '{}'; dropped", entry, label));
      return true;
    }
    if (window_length_ == 0) {
      note(fmt::format("entry {}: empty window; dropped", entry));
      return true;
    }

    auto start = clamp_index(*first, entry);
    auto end = clamp_index(*second, entry);
    if (start > end) {
      note(fmt::format("entry {}: start {} after end {}; swapped", entry, start, end));
      std::swap(start, end);
    }
    result_.detections.push_back({{start, end}, static_cast<int>(*confidence), *kind, {}});
    return true;
  }

  std::size_t clamp_index(long long value, std::size_t entry) {
    const auto last = static_cast<long long>(window_length_ - 1);
    if (value < 0 || value > last) {
      const auto clamped = std::clamp(value, 0LL, last);
      note(fmt::format("entry {}: index {} outside [0, {}]; clamped to {}", entry, value, last, clamped));
      value = clamped;
    }
    return static_cast<std::size_t>(value);
  }

  std::optional<long long> parse_int() {
    skip_ws();
    bool negative = false;
    if (!eof() && (peek() == '-' || peek() == '+')) {
      negative = peek() == '-';
      ++pos_;
    }
    if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) return std::nullopt;
    long long value = 0;
    constexpr long long kCap = 1'000'000'000'000'000LL;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      value = std::min(kCap, value * 10 + (peek() - '0'));
      ++pos_;
    }
    return negative ? -value : value;
  }

  void skip_to_separator() {
    int depth = 0;
    while (!eof()) {
      const char c = peek();
      if (c == '(') {
        ++depth;
      } else if (c == ')') {
        depth = std::max(0, depth - 1);
      } else if (depth == 0 && (c == ',' || c == ']')) {
        return;
      }
      ++pos_;
    }
  }

  static bool fail(std::string& why, const char* reason) {
    why = reason;
    return false;
  }

  bool consume(char c) {
    skip_ws();
    if (!eof() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (!eof() && (std::isspace(static_cast<unsigned char>(peek())) || is_quote(peek()))) ++pos_;
  }

  std::string snippet(std::size_t from, std::size_t to) const {
    auto s = text_.substr(from, std::min<std::size_t>(to - from, 60));
    return std::string(s);
  }

  [[nodiscard]] bool eof() const { return pos_ >= text_.size(); }
  [[nodiscard]] char peek() const { return text_[pos_]; }
  void note(std::string message) { result_.diagnostics.push_back(std::move(message)); }

  std::string_view text_;
  std::size_t window_length_;
  const LabelMap& labels_;
  std::size_t pos_ = 0;
  IndexListResult result_;
};

std::string_view strip_fence(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return text;
  const auto body_start = text.find('\n', open);
  if (body_start == std::string_view::npos) return text;
  const auto close = text.find("```", body_start);
  if (close == std::string_view::npos) return text;
  return text.substr(body_start + 1, close - body_start - 1);
}

nlohmann::json parse_object(std::string_view text) {
  auto j = nlohmann::json::parse(strip_fence(text), nullptr, false);
  if (j.is_discarded()) throw ResponseParseError("response is not valid JSON", std::string(text));
  if (!j.is_object()) throw ResponseParseError("response is not a JSON object", std::string(text));
  return j;
}

std::string field_text(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  return j[key].is_string() ? j[key].get<std::string>() : j[key].dump();
}

}  // namespace

LabelMap::LabelMap() {
  set("global", AnomalyType::Point);
  set("contextual", AnomalyType::Point);
  set("point", AnomalyType::Point);
  set("frequency", AnomalyType::Seasonal);
  set("seasonal", AnomalyType::Seasonal);
  set("trend", AnomalyType::Trend);
  set("shapelet", AnomalyType::Shapelet);
}

void LabelMap::set(std::string_view label, AnomalyType kind) { map_[lower(trim(label))] = kind; }

std::optional<AnomalyType> LabelMap::lookup(std::string_view label) const {
  const auto it = map_.find(lower(trim(label)));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

const LabelMap& default_label_map() {
  static const LabelMap map;
  return map;
}

std::optional<AnomalyType> normalize_label(std::string_view label) {
  return default_label_map().lookup(label);
}

std::string_view prompt_label(AnomalyType kind) noexcept {
  switch (kind) {
    case AnomalyType::Point:
      return "global";
    case AnomalyType::Shapelet:
      return "shapelet";
    case AnomalyType::Seasonal:
      return "frequency";
    case AnomalyType::Trend:
      return "trend";
  }
  return "global";
}

IndexListResult parse_index_list(std::string_view text, std::size_t window_length, const LabelMap& labels) {
  return IndexListParser(text, window_length, labels).run();
}

std::string serialize_index_list(std::span<const Detection> detections) {
  std::string out = "[";
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    if (i > 0) out += ", ";
    if (d.interval.start == d.interval.end) {
      out += fmt::format("({})/{}/{}", d.interval.start, d.confidence, prompt_label(d.kind));
    } else {
      out += fmt::format("({}, {})/{}/{}", d.interval.start, d.interval.end, d.confidence,
                         prompt_label(d.kind));
    }
  }
  out += "]";
  return out;
}

AnalysisFields parse_analysis(std::string_view text, std::size_t window_length, const LabelMap& labels) {
  const auto j = parse_object(text);
  AnalysisFields fields;
  for (const char* key : {"corrected_abnormal_index", "abnormal_index"}) {
    if (j.contains(key)) {
      fields.index_key = key;
      break;
    }
  }
  if (fields.index_key.empty()) {
    throw ResponseParseError("response has no abnormal_index field", std::string(text));
  }

  const auto& value = j[fields.index_key];
  std::string list;
  if (value.is_string()) {
    list = value.get<std::string>();
  } else if (value.is_array()) {
    // Some models return the entries as a JSON array of strings.
    list = "[";
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i > 0) list += ", ";
      list += value[i].is_string() ? value[i].get<std::string>() : value[i].dump();
    }
    list += "]";
  } else if (value.is_null()) {
    list = "[]";
    fields.diagnostics.emplace_back(fields.index_key + " is null; treated as []");
  } else {
    list = value.dump();
  }

  auto parsed = parse_index_list(list, window_length, labels);
  fields.detections = std::move(parsed.detections);
  fields.diagnostics.insert(fields.diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  fields.abnormal_description = field_text(j, "abnormal_description");
  fields.abnormal_type_description = field_text(j, "abnormal_type_description");
  return fields;
}

std::string parse_normal_pattern(std::string_view text) {
  const auto j = parse_object(text);
  const auto pattern = field_text(j, "normal_pattern");
  if (trim(pattern).empty()) {
    throw ResponseParseError("response has no normal_pattern field", std::string(text));
  }
  return pattern;
}

}  // namespace tama
