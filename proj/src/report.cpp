#include "tama/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "tama/error.hpp"

namespace tama::report {
namespace {

Json interval_json(const AnomalyInterval& iv) { return Json::array({iv.start, iv.end}); }

Json prf_json(const Prf& p) {
  Json j;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  return j;
}

template <typename T, typename Encode>
Json run_length(const std::vector<T>& values, Encode encode) {
  Json out = Json::array();
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    out.push_back(Json::array({encode(values[i]), j - i}));
    i = j;
  }
  return out;
}

template <typename T, typename Decode>
std::vector<T> run_length_decode(const nlohmann::json& runs, Decode decode) {
  std::vector<T> out;
  for (const auto& run : runs) {
    const auto value = decode(run.at(0));
    out.insert(out.end(), run.at(1).get<std::size_t>(), value);
  }
  return out;
}

Json optional_type(const std::optional<AnomalyType>& t) { return t ? Json(to_string(*t)) : Json(nullptr); }

AnomalyType type_from_json(const nlohmann::json& j) {
  const auto t = anomaly_type_from_string(j.get<std::string>());
  if (!t) throw ValidationError("unknown anomaly type '" + j.get<std::string>() + "'");
  return *t;
}

}  // namespace

Json detection_json(const Detection& d) {
  Json j;
  j["start"] = d.interval.start;
  j["end"] = d.interval.end;
  j["confidence"] = d.confidence;
  j["type"] = to_string(d.kind);
  return j;
}

Detection detection_from_json(const nlohmann::json& j) {
  Detection d;
  d.interval = {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
  d.confidence = j.at("confidence").get<int>();
  d.kind = type_from_json(j.at("type"));
  return d;
}

Json z_raw_json(const PipelineRun& run, const Json& config) {
  Json j;
  j["schema"] = kZRawSchema;
  j["series"] = run.series;
  j["length"] = run.length;
  j["config"] = config;
  j["plan"] = {{"width", run.plan.width}, {"stride", run.plan.stride}, {"starts", run.plan.starts}};
  j["reference"] = {{"skipped", run.reference.skipped},
                    {"images", run.reference.source_image_ids},
                    {"normal_pattern", run.reference.normal_pattern}};
  Json windows = Json::array();
  for (const auto& w : run.windows) {
    Json wj;
    wj["index"] = w.window_index;
    wj["start"] = w.window_start;
    wj["length"] = w.window_length;
    wj["failed"] = w.failed;
    if (w.failed) wj["error"] = w.error;
    Json dets = Json::array();
    for (const auto& d : w.detections) dets.push_back(detection_json(d));
    wj["detections"] = std::move(dets);
    wj["abnormal_description"] = w.abnormal_description;
    wj["abnormal_type_description"] = w.abnormal_type_description;
    wj["raw_response"] = w.raw_response;
    wj["diagnostics"] = w.diagnostics;
    if (w.reflected || !w.reflection_error.empty()) {
      Json r;
      r["applied"] = w.reflected;
      Json prior = Json::array();
      for (const auto& d : w.pre_reflection) prior.push_back(detection_json(d));
      r["prior_detections"] = std::move(prior);
      r["raw_response"] = w.reflection_raw;
      if (!w.reflection_error.empty()) r["error"] = w.reflection_error;
      wj["reflection"] = std::move(r);
    }
    windows.push_back(std::move(wj));
  }
  j["windows"] = std::move(windows);
  return j;
}

std::vector<WindowAnalysis> analyses_from_z_raw(const nlohmann::json& j) {
  if (j.value("schema", "") != kZRawSchema) throw ValidationError("not a Z_raw document");
  std::vector<WindowAnalysis> out;
  for (const auto& wj : j.at("windows")) {
    WindowAnalysis w;
    w.window_index = wj.at("index").get<std::size_t>();
    w.window_start = wj.at("start").get<std::size_t>();
    w.window_length = wj.at("length").get<std::size_t>();
    w.failed = wj.value("failed", false);
    w.error = wj.value("error", "");
    for (const auto& d : wj.at("detections")) w.detections.push_back(detection_from_json(d));
    w.abnormal_description = wj.value("abnormal_description", "");
    w.abnormal_type_description = wj.value("abnormal_type_description", "");
    w.raw_response = wj.value("raw_response", "");
    w.diagnostics = wj.value("diagnostics", std::vector<std::string>{});
    if (wj.contains("reflection")) {
      const auto& r = wj["reflection"];
      w.reflected = r.value("applied", false);
      for (const auto& d : r.at("prior_detections")) w.pre_reflection.push_back(detection_from_json(d));
      w.reflection_raw = r.value("raw_response", "");
      w.reflection_error = r.value("error", "");
    }
    out.push_back(std::move(w));
  }
  return out;
}

Json result_json(const std::string& series, const FinalResult& result) {
  Json j;
  j["schema"] = kResultSchema;
  j["series"] = series;
  j["length"] = result.confidence.size();
  j["c0"] = result.c0;
  Json intervals = Json::array();
  for (const auto& iv : labels_to_intervals(LabelSeries(result.anomaly_points))) intervals.push_back(interval_json(iv));
  j["anomaly_intervals"] = std::move(intervals);
  j["confidence_rle"] = run_length(result.confidence, [](int v) { return Json(v); });
  j["class_rle"] = run_length(result.classes, optional_type);
  Json prov = Json::array();
  for (const auto& p : result.provenance) {
    Json pj;
    pj["window"] = p.window_index;
    pj["local"] = interval_json(p.local);
    pj["global"] = interval_json(p.global);
    pj["confidence"] = p.confidence;
    pj["type"] = to_string(p.kind);
    pj["explanation"] = p.explanation;
    prov.push_back(std::move(pj));
  }
  j["provenance"] = std::move(prov);
  return j;
}

StoredResult parse_result(const nlohmann::json& j) {
  if (j.value("schema", "") != kResultSchema) throw ValidationError("not a result document");
  StoredResult r;
  r.series = j.at("series").get<std::string>();
  r.c0 = j.at("c0").get<double>();
  r.confidence = run_length_decode<int>(j.at("confidence_rle"), [](const nlohmann::json& v) { return v.get<int>(); });
  r.classes = run_length_decode<std::optional<AnomalyType>>(
      j.at("class_rle"), [](const nlohmann::json& v) -> std::optional<AnomalyType> {
        if (v.is_null()) return std::nullopt;
        return type_from_json(v);
      });
  const auto length = j.at("length").get<std::size_t>();
  if (r.confidence.size() != length || r.classes.size() != length) {
    throw ValidationError("result sequences do not match the recorded length");
  }
  r.anomaly_points = threshold(r.confidence, r.c0);
  return r;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  s.max = values.front();
  for (const double v : values) {
    sum += v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

std::vector<std::pair<std::string, double>> headline(const EvalReport& r) {
  return {{"pa_precision", r.pa.precision}, {"pa_recall", r.pa.recall}, {"pa_f1", r.pa.f1},
          {"raw_precision", r.raw.precision}, {"raw_recall", r.raw.recall}, {"raw_f1", r.raw.f1},
          {"auc_pr", r.auc_pr}, {"auc_roc", r.auc_roc}, {"auc_pr_raw", r.auc_pr_raw},
          {"auc_roc_raw", r.auc_roc_raw}};
}

Json eval_json(std::span<const SeriesEval> series, double c0, std::span<const double> alphas) {
  Json j;
  j["schema"] = kEvalSchema;
  j["c0"] = c0;
  j["alpha_grid"] = std::vector<double>(alphas.begin(), alphas.end());

  Json per_series = Json::array();
  std::map<std::string, std::vector<double>> columns;
  std::map<std::string, std::vector<double>> type_columns;
  for (const auto& s : series) {
    Json sj;
    sj["name"] = s.name;
    sj["pa"] = prf_json(s.report.pa);
    sj["raw"] = prf_json(s.report.raw);
    sj["auc_pr"] = s.report.auc_pr;
    sj["auc_roc"] = s.report.auc_roc;
    sj["auc_pr_raw"] = s.report.auc_pr_raw;
    sj["auc_roc_raw"] = s.report.auc_roc_raw;
    Json types = Json::object();
    for (const auto& [kind, p] : s.report.per_type) {
      types[std::string(to_string(kind))] = prf_json(p);
      type_columns[std::string(to_string(kind))].push_back(p.f1);
    }
    sj["per_type"] = std::move(types);
    Json pat = Json::array();
    for (const auto& p : s.report.pat_curve) {
      pat.push_back({{"alpha", p.alpha},
                     {"precision", p.prf.precision},
                     {"recall", p.prf.recall},
                     {"f1", p.prf.f1},
                     {"auc_pr", p.auc_pr},
                     {"auc_roc", p.auc_roc}});
    }
    sj["pat"] = std::move(pat);
    per_series.push_back(std::move(sj));
    for (const auto& [key, value] : headline(s.report)) columns[key].push_back(value);
  }
  j["series"] = std::move(per_series);

  Json agg;
  if (!series.empty()) {
    for (const auto& [key, value] : headline(series.front().report)) {
      (void)value;
      const auto s = summarize(columns[key]);
      agg[key] = {{"mean", s.mean}, {"std", s.std}, {"max", s.max}};
    }
  }
  j["aggregate"] = std::move(agg);
  Json type_agg = Json::object();
  for (const auto& [key, values] : type_columns) {
    const auto s = summarize(values);
    type_agg[key] = {{"series", values.size()}, {"f1_mean", s.mean}, {"f1_std", s.std}, {"f1_max", s.max}};
  }
  j["per_type_aggregate"] = std::move(type_agg);
  return j;
}

std::string eval_text(std::span<const SeriesEval> series) {
  std::size_t name_width = 6;
  for (const auto& s : series) name_width = std::max(name_width, s.name.size());
  const std::vector<std::string> cols = {"PA-P", "PA-R", "PA-F1", "F1", "AUC-PR", "AUC-ROC", "AUC-PR*", "AUC-ROC*"};
  const auto row = [&](const std::string& name, const std::vector<double>& values) {
    std::string line = fmt::format("{:<{}}", name, name_width);
    for (const double v : values) line += fmt::format(" {:>9.4f}", v);
    return line + "\n";
  };
  const auto pick = [](const EvalReport& r) {
    return std::vector<double>{r.pa.precision, r.pa.recall, r.pa.f1, r.raw.f1,
                               r.auc_pr, r.auc_roc, r.auc_pr_raw, r.auc_roc_raw};
  };

  std::string out = fmt::format("{:<{}}", "series", name_width);
  for (const auto& c : cols) out += fmt::format(" {:>9}", c);
  out += "\n";
  std::vector<std::vector<double>> columns(cols.size());
  for (const auto& s : series) {
    const auto values = pick(s.report);
    for (std::size_t i = 0; i < values.size(); ++i) columns[i].push_back(values[i]);
    out += row(s.name, values);
  }
  if (!series.empty()) {
    std::vector<double> mean, std, max;
    for (const auto& c : columns) {
      const auto s = summarize(c);
      mean.push_back(s.mean);
      std.push_back(s.std);
      max.push_back(s.max);
    }
    out += row("mean", mean);
    out += row("std", std);
    out += row("max", max);
  }
  out += "\nPA: point-adjusted at alpha = 0. F1: unadjusted. *: AUC without point adjustment.\n";
  return out;
}

std::string pat_csv(std::span<const SeriesEval> series) {
  std::string out = "series,alpha,precision,recall,f1,auc_pr,auc_roc\n";
  for (const auto& s : series) {
    for (const auto& p : s.report.pat_curve) {
      out += fmt::format("{},{},{},{},{},{},{}\n", s.name, p.alpha, p.prf.precision, p.prf.recall, p.prf.f1,
                         p.auc_pr, p.auc_roc);
    }
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto j = nlohmann::json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError(path.string() + " is not valid JSON");
  return j;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tama::report
