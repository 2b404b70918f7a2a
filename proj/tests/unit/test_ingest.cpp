#include <doctest.h>

#include "support/test_util.hpp"
#include "tama/error.hpp"
#include "tama/ingest.hpp"

#include <fmt/format.h>

#include <cmath>

using namespace tama;
using testutil::TempDir;
using testutil::write_text;

TEST_CASE("load_series reads one value per line") {
  TempDir dir("ingest");
  write_text(dir / "a.txt", "1.0\n2.0\n3.0");
  const auto s = ingest::load_series(dir / "a.txt");
  CHECK(std::vector<double>(s.values().begin(), s.values().end()) == std::vector<double>{1, 2, 3});
}

TEST_CASE("load_series selects a column") {
  TempDir dir("ingest");
  write_text(dir / "b.csv", "1,9\n2,8\n");
  const auto s = ingest::load_series(dir / "b.csv", 1);
  CHECK(std::vector<double>(s.values().begin(), s.values().end()) == std::vector<double>{9, 8});
  write_text(dir / "c.txt", "1 9\n2   8\n");
  const auto w = ingest::load_series(dir / "c.txt", 1);
  CHECK(w[1] == 8);
}

TEST_CASE("load_series reports the failing line") {
  TempDir dir("ingest");
  write_text(dir / "bad.txt", "1.0\nabc\n");
  try {
    (void)ingest::load_series(dir / "bad.txt");
    FAIL("expected an error");
  } catch (const IngestError& e) {
    CHECK(e.line() == 2);
  }
  write_text(dir / "empty.txt", "");
  CHECK_THROWS_AS((void)ingest::load_series(dir / "empty.txt"), ValidationError);
  CHECK_THROWS_AS((void)ingest::load_series(dir / "missing.txt"), ValidationError);
  write_text(dir / "nan.txt", "1\nnan\n");
  CHECK_THROWS_AS((void)ingest::load_series(dir / "nan.txt"), ValidationError);
}

TEST_CASE("split_channels") {
  TempDir dir("ingest");
  write_text(dir / "m.csv", "1,10\n2,20\n3,30\n4,40\n5,50\n");
  const auto chans = ingest::split_channels(dir / "m.csv");
  REQUIRE(chans.size() == 2);
  CHECK(chans[0].size() == 5);
  CHECK(chans[1][4] == 50);
  CHECK(chans[1].name() == "m.csv:1");

  write_text(dir / "one.txt", "1\n2\n");
  CHECK(ingest::split_channels(dir / "one.txt").size() == 1);

  write_text(dir / "ragged.csv", "1,2,3\n4,5\n");
  CHECK_THROWS_AS((void)ingest::split_channels(dir / "ragged.csv"), ValidationError);
}

TEST_CASE("split_channels then zip reproduces the matrix") {
  TempDir dir("ingest");
  Rng rng(5);
  std::string text;
  std::vector<std::vector<double>> rows(40, std::vector<double>(3));
  for (auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = std::round(rng.uniform() * 1e6) / 1e3;
      text += fmt::format("{}{}", c ? "," : "", row[c]);
    }
    text += "\n";
  }
  write_text(dir / "mat.csv", text);
  const auto chans = ingest::split_channels(dir / "mat.csv");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(chans[c][r] == rows[r][c]);
  }
}

TEST_CASE("load_labels flag and interval forms") {
  TempDir dir("ingest");
  const LabelSeries expected({false, true, true, false});
  write_text(dir / "flags.txt", "0\n1\n1\n0\n");
  CHECK(ingest::load_labels(dir / "flags.txt", 4) == expected);
  write_text(dir / "iv.txt", "1 2\n");
  CHECK(ingest::load_labels(dir / "iv.txt", 4) == expected);
  write_text(dir / "short.txt", "0\n1\n1\n");
  CHECK_THROWS_AS((void)ingest::load_labels(dir / "short.txt", 4), ValidationError);
  write_text(dir / "oob.txt", "2 4\n");
  CHECK_THROWS_AS((void)ingest::load_labels(dir / "oob.txt", 4), ValidationError);
}

TEST_CASE("flag labels round trip through intervals") {
  TempDir dir("ingest");
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<bool> flags(200);
    std::string text;
    for (auto&& f : flags) {
      f = rng.bernoulli(0.2);
      text += f ? "1\n" : "0\n";
    }
    write_text(dir / "f.txt", text);
    const auto labels = ingest::load_labels(dir / "f.txt", flags.size());
    CHECK(intervals_to_labels(labels_to_intervals(labels), flags.size()) == LabelSeries(flags));
  }
}

TEST_CASE("manifest load, validation and write") {
  TempDir dir("ingest");
  write_text(dir / "s.txt", "1\n2\n3\n4\n");
  write_text(dir / "l.txt", "1 2\n");
  write_text(dir / "t.txt", "1 2 trend\n");
  write_text(dir / "m.yaml",
             "entries:\n  - name: a\n    series: s.txt\n    labels: l.txt\n    types: t.txt\n    train_split: 1\n"
             "    period_hint: 2\n");
  const auto m = ingest::load_manifest(dir / "m.yaml");
  REQUIRE(m.entries.size() == 1);
  const auto loaded = ingest::load_entry(m.entries[0]);
  CHECK(loaded.series.period_hint() == 2);
  CHECK(loaded.labels->flags() == std::vector<bool>{false, true, true, false});
  CHECK((*loaded.types)[1] == AnomalyType::Trend);
  CHECK_FALSE((*loaded.types)[0]);

  ingest::write_manifest(m, dir / "copy.yaml");
  const auto again = ingest::load_manifest(dir / "copy.yaml");
  CHECK(again.entries[0].series_path == m.entries[0].series_path);

  write_text(dir / "dup.yaml", "entries:\n  - {name: a, series: s.txt}\n  - {name: a, series: s.txt}\n");
  CHECK_THROWS_AS((void)ingest::load_manifest(dir / "dup.yaml"), ValidationError);
  write_text(dir / "gone.yaml", "entries:\n  - {name: a, series: nope.txt}\n");
  CHECK_THROWS_AS((void)ingest::load_manifest(dir / "gone.yaml"), ValidationError);
}
