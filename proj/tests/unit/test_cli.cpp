#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "support/test_util.hpp"
#include "tama/cli.hpp"
#include "tama/error.hpp"

using namespace tama;
using testutil::TempDir;
using testutil::write_text;

namespace {

int run_binary(const std::string& args) {
  const auto status = std::system((std::string(TAMA_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path small_dataset(const TempDir& dir, std::size_t count = 2) {
  cli::GenSynthOptions gen;
  gen.output_dir = dir / "data";
  gen.suite.count = count;
  gen.suite.length = 1200;
  gen.suite.seasonal_length = 100;
  gen.suite.trend_length = 80;
  return cli::run_gen_synth(gen);
}

cli::RunConfig fast_config(const TempDir& dir, const std::filesystem::path& manifest) {
  return cli::load_config(std::nullopt, {{"manifest", manifest.string()},
                                         {"output_dir", (dir / "run").string()},
                                         {"plot_width", "400"},
                                         {"plot_height", "200"},
                                         {"plot_scale", "1"},
                                         {"write_images", "false"}});
}

}  // namespace

TEST_CASE("config precedence: defaults, file, overrides") {
  TempDir dir("cli");
  CHECK(cli::load_config(std::nullopt).pipeline.n_r == 3);
  write_text(dir / "c.yaml", "n_r: 5\ntemperature: 0.2\nalpha_grid: [0, 0.5, 1]\n");
  const auto from_file = cli::load_config(dir / "c.yaml");
  CHECK(from_file.pipeline.n_r == 5);
  CHECK(from_file.pipeline.temperature == 0.2);
  CHECK(from_file.alpha_grid == std::vector<double>{0, 0.5, 1});
  const auto overridden = cli::load_config(dir / "c.yaml", {{"n_r", "1"}});
  CHECK(overridden.pipeline.n_r == 1);
  CHECK(overridden.pipeline.temperature == 0.2);
}

TEST_CASE("config errors") {
  TempDir dir("cli");
  write_text(dir / "bad.yaml", "n_rr: 5\n");
  CHECK_THROWS_AS((void)cli::load_config(dir / "bad.yaml"), ConfigError);
  CHECK_THROWS_AS((void)cli::load_config(std::nullopt, {{"temperature", "2"}}), ConfigError);
  CHECK_THROWS_AS((void)cli::load_config(std::nullopt, {{"plot_width", "2400"}}), ConfigError);
  CHECK_THROWS_AS((void)cli::load_config(std::nullopt, {{"overlap", "1"}}), ConfigError);
  CHECK_THROWS_AS((void)cli::load_config(std::nullopt, {{"vote", "maybe"}}), ConfigError);
  write_text(dir / "nested.yaml", "plot:\n  width: 3\n");
  CHECK_THROWS_AS((void)cli::load_config(dir / "nested.yaml"), ConfigError);
}

TEST_CASE("snapshot reloads to the same configuration") {
  TempDir dir("cli");
  auto cfg = cli::load_config(std::nullopt, {{"n_r", "2"}, {"window", "240"}, {"vote", "count"}});
  write_text(dir / "snap.yaml", cli::snapshot_yaml(cfg));
  const auto again = cli::load_config(dir / "snap.yaml");
  CHECK(cli::snapshot(again) == cli::snapshot(cfg));
  CHECK(cli::config_keys().size() == cli::snapshot(cfg).size());
  const auto requested = cli::pipeline_snapshot(cfg);
  CHECK(requested.contains("temperature"));
  CHECK_FALSE(requested.contains("output_dir"));
  CHECK_FALSE(requested.contains("cache"));
}

TEST_CASE("series directory names") {
  CHECK(cli::series_dir_name("a.csv:1") == "a.csv_1");
  CHECK(cli::series_dir_name("..") == "_..");
  CHECK(cli::series_dir_name("x/y") == "x_y");
}

TEST_CASE("gen-synth writes a loadable manifest and validates first") {
  TempDir dir("cli");
  const auto manifest = small_dataset(dir, 3);
  const auto m = ingest::load_manifest(manifest);
  CHECK(m.entries.size() == 3);
  for (const auto& e : m.entries) CHECK(ingest::load_entry(e).labels);

  write_text(dir / "spec.yaml",
             "series:\n  - name: ok\n    length: 500\n    injections:\n      - {kind: point, start: 10, magnitude: 3}\n"
             "  - name: clash\n    length: 500\n    injections:\n"
             "      - {kind: trend, start: 100, end: 150, magnitude: 1}\n"
             "      - {kind: seasonal, start: 140, end: 200, magnitude: 2}\n");
  cli::GenSynthOptions gen;
  gen.output_dir = dir / "bad";
  gen.spec = dir / "spec.yaml";
  try {
    (void)cli::run_gen_synth(gen);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    CHECK(what.find("clash") != std::string::npos);
    CHECK(what.find("100") != std::string::npos);
    CHECK(what.find("140") != std::string::npos);
  }
  CHECK_FALSE(std::filesystem::exists(dir / "bad" / "ok.series.txt"));
}

TEST_CASE("detect and eval with the oracle") {
  TempDir dir("cli");
  const auto manifest = small_dataset(dir);
  auto cfg = fast_config(dir, manifest);
  const auto outcome = cli::run_detect(cfg);
  CHECK(outcome.exit_code == cli::kExitOk);
  REQUIRE(outcome.series.size() == 2);
  CHECK(std::filesystem::exists(dir / "run" / "config.yaml"));
  CHECK(std::filesystem::exists(dir / "run" / "summary.json"));

  cli::EvalOptions eval;
  eval.results_dir = dir / "run";
  eval.alpha_grid = std::vector<double>{0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const auto ev = cli::run_eval(eval);
  CHECK(ev.exit_code == cli::kExitOk);
  REQUIRE(ev.series.size() == 2);
  for (const auto& s : ev.series) CHECK(s.report.pa.f1 == 1.0);
  const auto csv = testutil::read_text(dir / "run" / "eval" / "pat.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 6);
  const auto report = nlohmann::json::parse(testutil::read_text(dir / "run" / "eval" / "report.json"));
  CHECK(report["aggregate"]["pa_f1"]["mean"] == 1.0);
  CHECK(report["aggregate"]["pa_f1"]["std"] == 0.0);
}

TEST_CASE("eval reports missing results") {
  TempDir dir("cli");
  const auto manifest = small_dataset(dir);
  auto cfg = fast_config(dir, manifest);
  (void)cli::run_detect(cfg);
  std::filesystem::remove_all(dir / "run" / "synth_01");
  cli::EvalOptions eval;
  eval.results_dir = dir / "run";
  const auto ev = cli::run_eval(eval);
  CHECK(ev.exit_code == cli::kExitPartial);
  CHECK(ev.series.size() == 1);
  CHECK(ev.problems.size() == 1);
}

TEST_CASE("binary exit codes") {
  TempDir dir("cli");
  const auto manifest = small_dataset(dir, 1);
  const auto out = (dir / "run").string();
  ::unsetenv("TAMA_API_KEY");
  CHECK(run_binary("detect -m " + manifest.string() + " -o " + out + " --backend http") == 2);
  CHECK(run_binary("detect -m " + manifest.string() + " -o " + out + " --set no_such_key=1") == 2);
  CHECK(run_binary("detect -m " + manifest.string() + " -o " + out +
                   " --set plot_width=400 --set plot_height=200 --set plot_scale=1") == 0);
  CHECK(run_binary("eval -r " + out) == 0);
  CHECK(run_binary("cache inspect --cache-dir " + (dir / "cache").string()) == 0);
}
