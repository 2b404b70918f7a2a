#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tama/core.hpp"

namespace tama {

using PointMask = std::vector<bool>;

/// Whether predictions are point-adjusted before counting.
struct PaMode {
  std::optional<double> alpha;  // nullopt: raw

  static PaMode raw() { return {}; }
  static PaMode adjusted(double alpha) { return {alpha}; }
};

/// pred plus every point of each truth interval I with |I ∩ pred| > alpha * L(I).
/// alpha = 0 adjusts on any overlap, alpha = 1 returns pred unchanged.
/// Throws ValidationError for alpha outside [0, 1] or intervals outside pred.
[[nodiscard]] PointMask point_adjust(std::span<const AnomalyInterval> truth, const PointMask& pred,
                                     double alpha);

struct Prf {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 0.0;
};

/// Per-point precision, recall and harmonic-mean F1. Precision is 1 with no
/// predictions, recall is 1 with no truth, F1 is 0 when P + R = 0.
[[nodiscard]] Prf prf_counts(std::size_t tp, std::size_t fp, std::size_t fn);
[[nodiscard]] Prf prf(std::span<const AnomalyInterval> truth, const PointMask& pred);

struct CurvePoint {
  double x = 0.0;  // recall (PR) or false-positive rate (ROC)
  double y = 0.0;  // precision (PR) or true-positive rate (ROC)
};

/// Operating points of the threshold sweep {t : score_t >= v} over every
/// distinct score v, plus the empty prediction, in order of growing
/// prediction. Truth intervals must be disjoint and lie within the scores.
[[nodiscard]] std::vector<CurvePoint> pr_curve(std::span<const double> scores,
                                               std::span<const AnomalyInterval> truth, PaMode mode);
[[nodiscard]] std::vector<CurvePoint> roc_curve(std::span<const double> scores,
                                                std::span<const AnomalyInterval> truth, PaMode mode);

/// Trapezoidal area under the PR curve with an (R = 0, P = 1) anchor.
[[nodiscard]] double auc_pr(std::span<const double> scores, std::span<const AnomalyInterval> truth,
                            PaMode mode);
/// Trapezoidal area under the ROC curve; 0.5 when either class is empty.
[[nodiscard]] double auc_roc(std::span<const double> scores, std::span<const AnomalyInterval> truth,
                             PaMode mode);

/// Unadjusted per-type scores: positives of type k are truth points typed k,
/// predicted positives are predicted points classified k. Types absent from
/// both sides are omitted.
[[nodiscard]] std::map<AnomalyType, Prf> per_type_f1(const TypeMap& type_truth, const PointMask& pred,
                                                     const TypeMap& pred_types);

struct PatPoint {
  double alpha = 0.0;
  Prf prf;
  double auc_pr = 0.0;
  double auc_roc = 0.0;
};

/// Metrics at each alpha: P/R/F1 of {score >= c0} and both AUCs in adjusted(alpha) mode.
[[nodiscard]] std::vector<PatPoint> pat_sweep(std::span<const double> scores,
                                              std::span<const AnomalyInterval> truth,
                                              std::span<const double> alphas, double c0);

struct EvalReport {
  Prf pa;   // alpha = 0
  Prf raw;  // no adjustment
  double auc_pr = 0.0;
  double auc_roc = 0.0;
  double auc_pr_raw = 0.0;
  double auc_roc_raw = 0.0;
  std::map<AnomalyType, Prf> per_type;
  std::vector<PatPoint> pat_curve;
};

struct EvalInput {
  LabelSeries truth;
  TypeMap truth_types;  // may be empty
  std::vector<double> scores;
  double c0 = 1.0;
  TypeMap pred_types;  // may be empty
};

[[nodiscard]] EvalReport evaluate(const EvalInput& input, std::span<const double> alphas);

[[nodiscard]] std::vector<double> default_alpha_grid();

}  // namespace tama
