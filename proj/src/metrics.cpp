#include "tama/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

#include "tama/error.hpp"

namespace tama {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError(fmt::format("alpha {} outside [0, 1]", alpha));
}

bool adjusts(std::size_t overlap, std::size_t length, double alpha) {
  return static_cast<double>(overlap) > alpha * static_cast<double>(length);
}

/// Interval id owning each point, or -1. Rejects overlapping or out-of-range truth.
std::vector<long> owners(std::span<const AnomalyInterval> truth, std::size_t length) {
  std::vector<long> owner(length, -1);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& iv = truth[i];
    if (iv.start > iv.end || iv.end >= length) {
      throw ValidationError(fmt::format("truth interval ({}, {}) outside [0, {}]", iv.start, iv.end,
                                        static_cast<long long>(length) - 1));
    }
    for (auto t = iv.start; t <= iv.end; ++t) {
      if (owner[t] >= 0) throw ValidationError(fmt::format("truth intervals overlap at index {}", t));
      owner[t] = static_cast<long>(i);
    }
  }
  return owner;
}

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
};

struct Sweep {
  std::vector<Counts> points;  // empty prediction first
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Sweep sweep(std::span<const double> scores, std::span<const AnomalyInterval> truth, PaMode mode) {
  if (mode.alpha) check_alpha(*mode.alpha);
  const auto n = scores.size();
  const auto owner = owners(truth, n);

  Sweep out;
  for (const auto& iv : truth) out.positives += interval_length(iv);
  out.negatives = n - out.positives;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<std::size_t> hit(truth.size(), 0);
  std::vector<std::size_t> credit(truth.size(), 0);
  Counts c;
  out.points.push_back(c);
  std::size_t i = 0;
  while (i < n) {
    const double v = scores[order[i]];
    for (; i < n && scores[order[i]] == v; ++i) {
      const auto o = owner[order[i]];
      if (o < 0) {
        ++c.fp;
        continue;
      }
      const auto k = static_cast<std::size_t>(o);
      ++hit[k];
      const auto len = interval_length(truth[k]);
      const auto now = mode.alpha && adjusts(hit[k], len, *mode.alpha) ? len : hit[k];
      c.tp += now - credit[k];
      credit[k] = now;
    }
    out.points.push_back(c);
  }
  return out;
}

}  // namespace

PointMask point_adjust(std::span<const AnomalyInterval> truth, const PointMask& pred, double alpha) {
  check_alpha(alpha);
  PointMask out = pred;
  for (const auto& iv : truth) {
    if (iv.start > iv.end || iv.end >= pred.size()) {
      throw ValidationError(fmt::format("truth interval ({}, {}) outside the prediction", iv.start, iv.end));
    }
    std::size_t overlap = 0;
    for (auto t = iv.start; t <= iv.end; ++t) overlap += pred[t] ? 1 : 0;
    if (adjusts(overlap, interval_length(iv), alpha)) {
      for (auto t = iv.start; t <= iv.end; ++t) out[t] = true;
    }
  }
  return out;
}

Prf prf_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf r;
  r.precision = tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double sum = r.precision + r.recall;
  r.f1 = sum == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / sum;
  return r;
}

Prf prf(std::span<const AnomalyInterval> truth, const PointMask& pred) {
  const auto truth_mask = intervals_to_labels(truth, pred.size());
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t] && truth_mask[t]) ++tp;
    else if (pred[t]) ++fp;
    else if (truth_mask[t]) ++fn;
  }
  return prf_counts(tp, fp, fn);
}

std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const AnomalyInterval> truth,
                                 PaMode mode) {
  const auto s = sweep(scores, truth, mode);
  std::vector<CurvePoint> out;
  out.reserve(s.points.size());
  for (const auto& c : s.points) {
    const auto r = prf_counts(c.tp, c.fp, s.positives - c.tp);
    out.push_back({r.recall, r.precision});
  }
  return out;
}

std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const AnomalyInterval> truth,
                                  PaMode mode) {
  const auto s = sweep(scores, truth, mode);
  std::vector<CurvePoint> out;
  out.reserve(s.points.size());
  for (const auto& c : s.points) {
    const double fpr = s.negatives == 0 ? 0.0 : static_cast<double>(c.fp) / static_cast<double>(s.negatives);
    const double tpr = s.positives == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(s.positives);
    out.push_back({fpr, tpr});
  }
  return out;
}

double auc_pr(std::span<const double> scores, std::span<const AnomalyInterval> truth, PaMode mode) {
  // The sweep grows the prediction, so recall never decreases and ties in
  // recall have non-increasing precision: the sequence is already sorted.
  const auto curve = pr_curve(scores, truth, mode);
  CurvePoint prev{0.0, 1.0};
  double area = 0.0;
  for (const auto& p : curve) {
    area += (p.x - prev.x) * (p.y + prev.y) / 2.0;
    prev = p;
  }
  return area;
}

double auc_roc(std::span<const double> scores, std::span<const AnomalyInterval> truth, PaMode mode) {
  const auto s = sweep(scores, truth, mode);
  if (s.positives == 0 || s.negatives == 0) return 0.5;
  // Integer trapezoids keep the raw-mode result equal to the Mann-Whitney statistic.
  unsigned long long twice_area = 0;
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    const auto dfp = s.points[i].fp - s.points[i - 1].fp;
    twice_area += static_cast<unsigned long long>(dfp) * (s.points[i].tp + s.points[i - 1].tp);
  }
  return static_cast<double>(twice_area) /
         (2.0 * static_cast<double>(s.positives) * static_cast<double>(s.negatives));
}

std::map<AnomalyType, Prf> per_type_f1(const TypeMap& type_truth, const PointMask& pred,
                                       const TypeMap& pred_types) {
  if (type_truth.size() != pred.size() || pred_types.size() != pred.size()) {
    throw ValidationError("per-type evaluation needs type maps of the prediction length");
  }
  std::map<AnomalyType, Prf> out;
  for (const auto kind : kAllAnomalyTypes) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t t = 0; t < pred.size(); ++t) {
      const bool is_truth = type_truth[t] == kind;
      const bool is_pred = pred[t] && pred_types[t] == kind;
      if (is_truth && is_pred) ++tp;
      else if (is_pred) ++fp;
      else if (is_truth) ++fn;
    }
    if (tp + fp + fn == 0) continue;
    out[kind] = prf_counts(tp, fp, fn);
  }
  return out;
}

std::vector<PatPoint> pat_sweep(std::span<const double> scores, std::span<const AnomalyInterval> truth,
                                std::span<const double> alphas, double c0) {
  PointMask pred(scores.size());
  for (std::size_t t = 0; t < scores.size(); ++t) pred[t] = scores[t] >= c0;
  std::vector<PatPoint> out;
  for (const double alpha : alphas) {
    PatPoint p;
    p.alpha = alpha;
    p.prf = prf(truth, point_adjust(truth, pred, alpha));
    p.auc_pr = auc_pr(scores, truth, PaMode::adjusted(alpha));
    p.auc_roc = auc_roc(scores, truth, PaMode::adjusted(alpha));
    out.push_back(p);
  }
  return out;
}

EvalReport evaluate(const EvalInput& input, std::span<const double> alphas) {
  const auto n = input.truth.size();
  if (input.scores.size() != n) {
    throw ValidationError(fmt::format("score length {} differs from label length {}", input.scores.size(), n));
  }
  const auto truth = labels_to_intervals(input.truth);
  PointMask pred(n);
  for (std::size_t t = 0; t < n; ++t) pred[t] = input.scores[t] >= input.c0;

  EvalReport r;
  r.pa = prf(truth, point_adjust(truth, pred, 0.0));
  r.raw = prf(truth, pred);
  r.auc_pr = auc_pr(input.scores, truth, PaMode::adjusted(0.0));
  r.auc_roc = auc_roc(input.scores, truth, PaMode::adjusted(0.0));
  r.auc_pr_raw = auc_pr(input.scores, truth, PaMode::raw());
  r.auc_roc_raw = auc_roc(input.scores, truth, PaMode::raw());
  if (!input.truth_types.empty()) {
    const auto pred_types = input.pred_types.empty() ? TypeMap(n) : input.pred_types;
    r.per_type = per_type_f1(input.truth_types, pred, pred_types);
  }
  r.pat_curve = pat_sweep(input.scores, truth, alphas, input.c0);
  return r;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

}  // namespace tama
