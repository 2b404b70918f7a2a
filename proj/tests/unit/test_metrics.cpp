#include <doctest.h>

#include "support/random_cases.hpp"
#include "tama/error.hpp"
#include "tama/metrics.hpp"

using namespace tama;

namespace {

PointMask mask(std::size_t length, std::initializer_list<std::size_t> points) {
  PointMask m(length, false);
  for (auto p : points) m[p] = true;
  return m;
}

PointMask range_mask(std::size_t length, std::size_t a, std::size_t b) {
  PointMask m(length, false);
  for (auto t = a; t <= b; ++t) m[t] = true;
  return m;
}

}  // namespace

TEST_CASE("point adjustment examples") {
  const std::vector<AnomalyInterval> truth{{10, 20}};
  CHECK(point_adjust(truth, mask(30, {15}), 0.0) == range_mask(30, 10, 20));
  const std::vector<AnomalyInterval> first{{0, 9}};
  const auto pred = mask(20, {0, 1, 2});
  CHECK(point_adjust(first, pred, 0.25) == range_mask(20, 0, 9));
  CHECK(point_adjust(first, pred, 0.5) == pred);
  CHECK(point_adjust(first, PointMask(20, false), 0.0) == PointMask(20, false));
  CHECK(point_adjust(first, pred, 1.0) == pred);
  CHECK_THROWS_AS((void)point_adjust(first, pred, 1.5), ValidationError);
}

TEST_CASE("prf examples") {
  const std::vector<AnomalyInterval> truth{{10, 20}};
  const auto exact = prf(truth, range_mask(30, 10, 20));
  CHECK(exact.precision == 1.0);
  CHECK(exact.recall == 1.0);
  CHECK(exact.f1 == 1.0);
  auto extra = range_mask(30, 10, 20);
  extra[5] = true;
  const auto m = prf(truth, extra);
  CHECK(m.precision == doctest::Approx(11.0 / 12.0));
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == doctest::Approx(22.0 / 23.0).epsilon(1e-15));
  const auto none = prf(truth, PointMask(30, false));
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
}

TEST_CASE("auc examples") {
  const std::vector<double> scores{3, 2, 1, 0};
  const std::vector<AnomalyInterval> truth{{0, 0}, {2, 2}};
  CHECK(auc_roc(scores, truth, PaMode::raw()) == doctest::Approx(0.75));
  CHECK(auc_pr(scores, truth, PaMode::raw()) == doctest::Approx(oracle::auc_pr(scores, {{0, 0}, {2, 2}}, -1)));
  const std::vector<double> sep{0.9, 0.1};
  const std::vector<AnomalyInterval> t0{{0, 0}};
  CHECK(auc_roc(sep, t0, PaMode::raw()) == 1.0);
  CHECK(auc_pr(sep, t0, PaMode::raw()) == 1.0);
  const std::vector<double> rev{0.1, 0.9};
  CHECK(auc_roc(rev, t0, PaMode::raw()) == 0.0);
  const std::vector<double> flat(4, 0.0);
  const auto curve = pr_curve(flat, truth, PaMode::raw());
  CHECK(curve.back().y == doctest::Approx(0.5));
  CHECK(auc_roc(flat, truth, PaMode::raw()) == doctest::Approx(0.5));
  CHECK(auc_roc(flat, {}, PaMode::raw()) == 0.5);
}

TEST_CASE("overlapping truth intervals are rejected") {
  const std::vector<double> scores(10, 1.0);
  const std::vector<AnomalyInterval> bad{{1, 4}, {3, 6}};
  CHECK_THROWS_AS((void)auc_pr(scores, bad, PaMode::raw()), ValidationError);
}

TEST_CASE("metrics match brute-force oracles") {
  Rng rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    const auto length = static_cast<std::size_t>(rng.uniform_int(1, 200));
    const auto truth = testutil::random_intervals(rng, length, 10);
    const auto pairs = testutil::to_pairs(truth);
    std::vector<double> scores(length);
    for (auto& s : scores) s = static_cast<double>(rng.uniform_int(0, 8));
    PointMask pred(length);
    for (std::size_t t = 0; t < length; ++t) pred[t] = scores[t] >= 4;
    const double alpha = trial % 3 == 0 ? 0.0 : rng.uniform();
    const auto adjusted = point_adjust(truth, pred, alpha);
    REQUIRE(testutil::to_points(adjusted) == oracle::adjust(pairs, testutil::to_points(pred), alpha));
    const auto fast = prf(truth, adjusted);
    const auto slow = oracle::prf(pairs, testutil::to_points(adjusted));
    CHECK(fast.precision == slow.p);
    CHECK(fast.recall == slow.r);
    CHECK(fast.f1 == slow.f1);
    CHECK(std::abs(auc_pr(scores, truth, PaMode::adjusted(alpha)) - oracle::auc_pr(scores, pairs, alpha)) <= 1e-9);
    CHECK(std::abs(auc_roc(scores, truth, PaMode::adjusted(alpha)) - oracle::auc_roc(scores, pairs, alpha)) <= 1e-9);
    CHECK(std::abs(auc_pr(scores, truth, PaMode::raw()) - oracle::auc_pr(scores, pairs, -1)) <= 1e-9);
    const double roc = auc_roc(scores, truth, PaMode::raw());
    CHECK(std::abs(roc - oracle::auc_roc(scores, pairs, -1)) <= 1e-9);
    CHECK(std::abs(roc - oracle::mann_whitney(scores, oracle::truth_points(pairs))) <= 1e-9);
  }
}

TEST_CASE("adjustment shrinks as alpha grows") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto length = static_cast<std::size_t>(rng.uniform_int(1, 200));
    const auto truth = testutil::random_intervals(rng, length, 10);
    PointMask pred(length);
    for (std::size_t t = 0; t < length; ++t) pred[t] = rng.bernoulli(0.2);
    std::size_t previous = length + 1;
    for (const double a : default_alpha_grid()) {
      const auto adj = point_adjust(truth, pred, a);
      const auto size = static_cast<std::size_t>(std::count(adj.begin(), adj.end(), true));
      CHECK(size <= previous);
      previous = size;
    }
  }
}

TEST_CASE("per-type F1") {
  TypeMap truth(10);
  for (std::size_t t = 2; t <= 4; ++t) truth[t] = AnomalyType::Shapelet;
  truth[8] = AnomalyType::Point;
  const auto pred = mask(10, {2, 3, 4, 8});
  auto exact = per_type_f1(truth, pred, truth);
  CHECK(exact.size() == 2);
  CHECK(exact[AnomalyType::Shapelet].f1 == 1.0);
  CHECK(exact[AnomalyType::Point].f1 == 1.0);
  CHECK_FALSE(exact.count(AnomalyType::Trend));

  TypeMap wrong(10);
  for (std::size_t t = 2; t <= 4; ++t) wrong[t] = AnomalyType::Trend;
  wrong[8] = AnomalyType::Point;
  const auto mis = per_type_f1(truth, pred, wrong);
  CHECK(mis.at(AnomalyType::Shapelet).f1 == 0.0);
  CHECK(mis.at(AnomalyType::Trend).f1 == 0.0);
}

TEST_CASE("pat sweep endpoints match full adjustment and raw") {
  const std::vector<double> scores{0, 4, 0, 0, 0, 0, 4, 0, 0, 0};
  const std::vector<AnomalyInterval> truth{{1, 4}};
  const std::vector<double> alphas{0.0, 1.0};
  const auto curve = pat_sweep(scores, truth, alphas, 1.0);
  REQUIRE(curve.size() == 2);
  PointMask pred(10);
  for (std::size_t t = 0; t < 10; ++t) pred[t] = scores[t] >= 1.0;
  CHECK(curve[0].prf.f1 == prf(truth, point_adjust(truth, pred, 0.0)).f1);
  CHECK(curve[1].prf.f1 == prf(truth, pred).f1);
  CHECK(curve[1].auc_pr == auc_pr(scores, truth, PaMode::raw()));
  CHECK(curve[0].prf.f1 > curve[1].prf.f1);
}

TEST_CASE("evaluate") {
  EvalInput in;
  in.truth = LabelSeries({false, true, true, false});
  in.scores = {0, 3, 0, 0};
  const auto r = evaluate(in, default_alpha_grid());
  CHECK(r.pa.f1 == 1.0);
  CHECK(r.raw.recall == 0.5);
  CHECK(r.pat_curve.size() == 11);
  CHECK(r.per_type.empty());
}
