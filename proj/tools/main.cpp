#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "tama/cli.hpp"
#include "tama/error.hpp"
#include "tama/ingest.hpp"
#include "tama/response_cache.hpp"

namespace fs = std::filesystem;
using namespace tama;

namespace {

std::vector<cli::Override> parse_sets(const std::vector<std::string>& sets) {
  std::vector<cli::Override> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

void print_pat(const cli::EvalOutcome& outcome) {
  fmt::print("{:<24} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}\n", "series", "alpha", "P", "R", "F1", "AUC-PR",
             "AUC-ROC");
  for (const auto& s : outcome.series) {
    for (const auto& p : s.report.pat_curve) {
      fmt::print("{:<24} {:>6.2f} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f}\n", s.name, p.alpha, p.prf.precision,
                 p.prf.recall, p.prf.f1, p.auc_pr, p.auc_roc);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal time series anomaly detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  // Shared by detect and render.
  std::string config_file;
  std::vector<std::string> sets;
  const auto add_config_options = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "Flat YAML configuration file");
    cmd->add_option("--set", sets, "Override one key: key=value (repeatable)");
  };

  auto* detect = app.add_subcommand("detect", "Run the pipeline over a dataset manifest");
  add_config_options(detect);
  std::string manifest, output_dir, backend, cache_mode;
  std::size_t parallel_series = 0;
  detect->add_option("-m,--manifest", manifest, "Dataset manifest (YAML)");
  detect->add_option("-o,--output-dir", output_dir, "Run directory");
  detect->add_option("--backend", backend, "oracle or http");
  detect->add_option("--cache", cache_mode, "off, record, read_through or replay");
  detect->add_option("--parallel-series", parallel_series, "Series processed concurrently");

  std::string results_dir, eval_manifest, alpha_grid, eval_out;
  double c0 = -1.0;
  const auto add_eval_options = [&](CLI::App* cmd) {
    cmd->add_option("-r,--results", results_dir, "Run directory written by detect")->required();
    cmd->add_option("-m,--manifest", eval_manifest, "Manifest (default: the one recorded in the run)");
    cmd->add_option("--alpha-grid", alpha_grid, "Comma-separated point-adjustment thresholds");
    cmd->add_option("--c0", c0, "Confidence threshold (default: the run's)");
    cmd->add_option("-o,--output-dir", eval_out, "Report directory (default: <results>/eval)");
  };
  auto* eval = app.add_subcommand("eval", "Score a run against its labels");
  add_eval_options(eval);
  auto* sweep = app.add_subcommand("sweep-pat", "Print metrics across point-adjustment thresholds");
  add_eval_options(sweep);

  auto* gen = app.add_subcommand("gen-synth", "Generate a labelled synthetic dataset");
  cli::GenSynthOptions gen_opts;
  std::string gen_out, gen_spec;
  gen->add_option("-o,--output-dir", gen_out, "Dataset directory")->required();
  gen->add_option("--spec", gen_spec, "YAML spec: suite keys or an explicit series list");
  gen->add_option("--count", gen_opts.suite.count, "Number of series");
  gen->add_option("--length", gen_opts.suite.length, "Samples per series");
  gen->add_option("--period", gen_opts.suite.base_period, "Samples per sine cycle");
  gen->add_option("--noise", gen_opts.suite.noise_sigma, "Noise standard deviation");
  gen->add_option("--seed", gen_opts.suite.seed, "Dataset seed");

  auto* render = app.add_subcommand("render", "Render the window images of one series");
  add_config_options(render);
  std::string render_series, render_out = "tama_render";
  std::optional<std::size_t> render_column, render_period;
  render->add_option("-s,--series", render_series, "Series file")->required();
  render->add_option("--column", render_column, "Column of a multi-column file");
  render->add_option("--period", render_period, "Samples per cycle, for window sizing");
  render->add_option("-o,--output-dir", render_out, "Image directory");

  auto* cache = app.add_subcommand("cache", "Inspect or purge the response cache");
  std::string cache_action, cache_dir;
  cache->add_option("action", cache_action, "inspect or purge")->required()->check(CLI::IsMember({"inspect", "purge"}));
  cache->add_option("--cache-dir", cache_dir, "Cache directory (default: $TAMA_CACHE_DIR)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (detect->parsed()) {
      auto overrides = parse_sets(sets);
      if (!manifest.empty()) overrides.emplace_back("manifest", manifest);
      if (!output_dir.empty()) overrides.emplace_back("output_dir", output_dir);
      if (!backend.empty()) overrides.emplace_back("backend", backend);
      if (!cache_mode.empty()) overrides.emplace_back("cache", cache_mode);
      if (parallel_series > 0) overrides.emplace_back("parallel_series", std::to_string(parallel_series));
      const auto cfg = cli::load_config(optional_path(config_file), overrides);
      const auto outcome = cli::run_detect(cfg);
      for (const auto& s : outcome.series) {
        if (s.ok) {
          fmt::print("{:<24} ok      windows={} failed_windows={} detections={}\n", s.name, s.windows,
                     s.failed_windows, s.detections);
        } else {
          fmt::print("{:<24} FAILED  {}\n", s.name, s.error);
        }
      }
      if (cfg.cache != "off") fmt::print("cache: {} hits, {} live calls\n", outcome.cache_hits, outcome.live_calls);
      fmt::print("results in {}\n", cfg.output_dir.string());
      return outcome.exit_code;
    }

    if (eval->parsed() || sweep->parsed()) {
      cli::EvalOptions opts;
      opts.results_dir = results_dir;
      opts.manifest = optional_path(eval_manifest);
      if (!alpha_grid.empty()) {
        cli::RunConfig scratch;
        cli::apply_setting(scratch, "alpha_grid", alpha_grid);
        opts.alpha_grid = scratch.alpha_grid;
      }
      if (c0 >= 0.0) opts.c0 = c0;
      opts.output_dir = optional_path(eval_out);
      const auto outcome = cli::run_eval(opts);
      if (sweep->parsed()) {
        print_pat(outcome);
      } else {
        std::cout << tama::report::eval_text(outcome.series);
      }
      for (const auto& p : outcome.problems) fmt::print(stderr, "problem: {}\n", p);
      fmt::print("reports in {}\n", outcome.output_dir.string());
      return outcome.exit_code;
    }

    if (gen->parsed()) {
      gen_opts.output_dir = gen_out;
      gen_opts.spec = optional_path(gen_spec);
      const auto path = cli::run_gen_synth(gen_opts);
      fmt::print("manifest written to {}\n", path.string());
      return cli::kExitOk;
    }

    if (render->parsed()) {
      const auto cfg = cli::load_config(optional_path(config_file), parse_sets(sets));
      auto raw = ingest::load_series(render_series, render_column);
      const TimeSeries series(std::vector<double>(raw.values().begin(), raw.values().end()), raw.name(),
                              render_period);
      const auto n = cli::run_render(cfg, series, render_out);
      fmt::print("{} images written to {}\n", n, render_out);
      return cli::kExitOk;
    }

    if (cache->parsed()) {
      cli::RunConfig cfg;
      cfg.cache_dir = cache_dir;
      const auto dir = cli::resolve_cache_dir(cfg);
      if (cache_dir.empty() && std::getenv("TAMA_CACHE_DIR") == nullptr) {
        throw ConfigError("give --cache-dir or set TAMA_CACHE_DIR");
      }
      ResponseCache store(dir);
      if (cache_action == "purge") {
        fmt::print("removed {} entries from {}\n", store.purge(), dir.string());
      } else {
        const auto entries = store.entries();
        std::uintmax_t bytes = 0;
        for (const auto& e : entries) {
          bytes += e.bytes;
          fmt::print("{}  {:>8}  {}\n", e.key, e.bytes, e.summary);
        }
        fmt::print("{} entries, {} bytes in {}\n", entries.size(), bytes, dir.string());
      }
      return cli::kExitOk;
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return cli::kExitConfig;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return cli::kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return cli::kExitPartial;
  }
  return cli::kExitOk;
}
