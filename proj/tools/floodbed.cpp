// floodbed: run UDP flood test-bed scenarios in simulation or over loopback.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "CLI11.hpp"
#include "floodbed/scenario.hpp"

namespace fb = floodbed;

namespace {

enum Exit { kOk = 0, kConfig = 2, kTransport = 3, kContract = 4 };

struct Overrides {
  std::string scenario = "attack10-mitigation";
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<std::uint16_t> port;
  std::string gamma;
  std::string mitigation;
  std::string out;
};

fb::Scenario build_scenario(const Overrides& o) {
  fb::Scenario s = fb::preset(o.scenario);
  if (!o.config.empty()) s = fb::load_config_file(o.config, s);
  if (o.seed) s.seed = *o.seed;
  if (!o.mode.empty()) s.transport.mode = o.mode == "live" ? fb::TransportMode::Live : fb::TransportMode::Sim;
  if (o.port) s.transport.port = *o.port;
  if (!o.gamma.empty()) s.ids.gamma = fb::parse_gamma(o.gamma);
  if (!o.mitigation.empty()) s.mitigation.enabled = o.mitigation == "on";
  s.validate();
  return s;
}

std::string pct(double v) { return std::isnan(v) ? "n/a" : fmt::format("{:.2f}%", 100.0 * v); }

std::string secs(const std::optional<double>& v) { return v ? fmt::format("{:.3f} s", *v) : "-"; }

void print_summary(const fb::RunResult& r) {
  const auto& rep = r.report;
  const auto& c = rep.confusion;
  auto row = [](const char* key, const std::string& value) { fmt::print("  {:<28} {}\n", key, value); };
  fmt::print("scenario {} (seed {}, {} mode, {:.0f} s)\n", r.scenario.name, r.scenario.seed,
             r.scenario.transport.mode == fb::TransportMode::Sim ? "sim" : "live", fb::to_seconds(r.scenario.duration));
  for (const auto& w : r.model.warnings) fmt::print("  warning: {}\n", w);
  if (!rep.complete) {
    for (const auto& reason : rep.incomplete_reasons) fmt::print("  incomplete: {}\n", reason);
  }
  row("packets emitted", fmt::format("{}", r.stats.emitted));
  row("model trained at", r.stats.trained_at ? fmt::format("{:.3f} s", fb::to_seconds(*r.stats.trained_at)) : "never");
  row("decisions (attack)", fmt::format("{} ({})", rep.decisions, rep.attack_decisions));
  row("TP / FP / TN / FN", fmt::format("{} / {} / {} / {}", c.tp, c.fp, c.tn, c.fn));
  row("accuracy / TPR / TNR", fmt::format("{} / {} / {}", pct(c.accuracy), pct(c.tpr), pct(c.tnr)));
  row("peak queue", fmt::format("{}", rep.peak_queue));
  row("peak processing rate", fmt::format("{:.0f} pkt/s", rep.peak_processing_rate));
  for (std::size_t i = 0; i < rep.drain_times_s.size(); ++i) {
    row(fmt::format("drain time (attack {})", i + 1).c_str(), secs(rep.drain_times_s[i]));
  }
  row("attack decisions after end", fmt::format("{}", rep.attack_decisions_after_attack_end));
  row("activations", fmt::format("{}", rep.activation_times_s.size()));
  row("activation latency", secs(rep.activation_latency_s));
  row("benign collateral", fmt::format("{}", rep.benign_collateral));
  row("flood blocked", fmt::format("{}", rep.flood_blocked));
  if (r.scenario.transport.mode == fb::TransportMode::Live) {
    row("truncated datagrams", fmt::format("{}", rep.truncated_datagrams));
    row("receive buffer", fmt::format("{} bytes", r.stats.effective_rcvbuf));
  }
  if (r.stats.conservation_violations > 0) {
    row("conservation violations", fmt::format("{}", r.stats.conservation_violations));
  }
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--scenario", o.scenario, "Preset to start from")->check(CLI::IsMember(fb::preset_names()));
  cmd->add_option("--config", o.config, "JSON config applied on top of the preset")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--gamma", o.gamma, "Detection threshold, or default / paper-best");
  cmd->add_option("--mitigation", o.mitigation, "Drop-window mitigation")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--out", o.out, "Directory for the manifest, logs and charts");
}

std::vector<double> default_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.2 + 0.005 * i);
  grid.push_back(fb::kBestGamma);
  std::sort(grid.begin(), grid.end());
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UDP flood test-bed: traffic generation, IDS, mitigation and reporting"};
  app.set_version_flag("--version", fb::kVersion);
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Run one scenario");
  add_common(run, run_opts);
  run->add_option("--mode", run_opts.mode, "Transport")->check(CLI::IsMember({"sim", "live"}));
  run->add_option("--port", run_opts.port, "UDP port for live mode");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Skip the summary table");

  Overrides sweep_opts;
  sweep_opts.scenario = "attack10-nomitigation";
  std::vector<double> grid;
  auto* sweep = app.add_subcommand("sweep", "Rerun a scenario over a grid of thresholds (sim mode)");
  add_common(sweep, sweep_opts);
  sweep->add_option("--grid", grid, "Thresholds to evaluate");

  auto* list = app.add_subcommand("presets", "List built-in scenarios");
  bool as_json = false;
  list->add_flag("--json", as_json, "Print each preset's effective config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; every usage error is a config error.
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*list) {
      if (!as_json) {
        for (const auto& name : fb::preset_names()) fmt::print("{}\n", name);
        return kOk;
      }
      // One JSON array so the output parses as a single document.
      std::vector<std::string> docs;
      for (const auto& name : fb::preset_names()) docs.push_back(fb::scenario_json(fb::preset(name)));
      fmt::print("[\n{}\n]\n", fmt::join(docs, ",\n"));
      return kOk;
    }
    if (*run) {
      const fb::Scenario s = build_scenario(run_opts);
      const fb::RunResult r = fb::run_scenario(s);
      if (!run_opts.out.empty()) fb::persist(r, run_opts.out);
      if (!quiet) print_summary(r);
      if (r.stats.conservation_violations > 0) return kContract;
      return kOk;
    }
    if (*sweep) {
      fb::Scenario s = build_scenario(sweep_opts);
      if (s.transport.mode != fb::TransportMode::Sim) throw fb::ConfigError("--mode", "sweeps run in sim mode only");
      if (grid.empty()) grid = default_grid();
      const fb::SweepTable table = fb::sweep_gamma(s, grid);
      fmt::print("{:>8} {:>9} {:>9} {:>9}\n", "gamma", "accuracy", "tpr", "tnr");
      for (const auto& row : table.rows) {
        fmt::print("{:>8.4f} {:>9} {:>9} {:>9}\n", row.gamma, pct(row.confusion.accuracy), pct(row.confusion.tpr),
                   pct(row.confusion.tnr));
      }
      fmt::print("best gamma {:.4f} (accuracy {})\n", table.best_gamma, pct(table.best_accuracy));
      if (!sweep_opts.out.empty()) {
        std::filesystem::create_directories(sweep_opts.out);
        std::FILE* f = std::fopen((std::filesystem::path(sweep_opts.out) / "sweep.csv").c_str(), "w");
        if (f == nullptr) throw fb::ConfigError("--out", "cannot write sweep.csv");
        std::fputs(fb::sweep_csv(table).c_str(), f);
        std::fclose(f);
      }
      return kOk;
    }
  } catch (const fb::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const fb::TransportError& e) {
    fmt::print(stderr, "transport error: {}\n", e.what());
    return kTransport;
  } catch (const fb::ContractViolation& e) {
    fmt::print(stderr, "contract violation: {}\n", e.what());
    return kContract;
  }
  return kOk;
}
