// Scenarios: presets, config files, and the sim / live runners that bind
// generators, transport, server pipeline and reporting together.
#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floodbed/ids.hpp"
#include "floodbed/mitigation.hpp"
#include "floodbed/report.hpp"
#include "floodbed/server.hpp"
#include "floodbed/traffic.hpp"

namespace floodbed {

inline constexpr const char* kVersion = "1.0.0";

enum class TransportMode { Sim, Live };

struct TransportSettings {
  TransportMode mode = TransportMode::Sim;
  SimTime latency = 200us;
  SimTime jitter{0};
  std::uint16_t port = 5555;
  int rcvbuf_bytes = 4 << 20;
  double speed = 1.0;  // live mode: run time advances this many times faster than wall time
};

enum class AttackPlanKind { None, Scheduled, Probabilistic };

struct AttackPlan {
  AttackPlanKind kind = AttackPlanKind::None;
  std::vector<AttackInterval> intervals;  // Scheduled
  SimTime start_jitter{0};                // Scheduled: seeded shift in [0, start_jitter)
  SimTime not_before{0};                  // Probabilistic: first tick eligible to start an attack
};

struct Scenario {
  std::string name = "custom";
  std::vector<DeviceProfile> devices;
  AttackPlan attack;
  SimTime duration = 600s;
  TransportSettings transport;
  ServiceConfig service;
  IdsConfig ids;
  MitigationConfig mitigation;
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<std::string> preset_names();

// Throws ConfigError("scenario", ...) for an unknown name.
Scenario preset(std::string_view name);

// Applies a JSON config (see README) on top of `base`. A "scenario" key
// selects the preset used as base instead. Unknown keys are rejected.
Scenario apply_config(const Scenario& base, std::string_view json_text);
Scenario load_config_file(const std::filesystem::path& path, const Scenario& base);

// Effective configuration in the config-file schema; apply_config() of the
// result reproduces the scenario.
std::string scenario_json(const Scenario& scenario);

// Attack intervals per compromised device, after seeding.
std::map<std::uint32_t, std::vector<AttackInterval>> resolve_attacks(const Scenario& scenario);

struct RunStats {
  std::size_t peak_queue_exact = 0;
  std::size_t conservation_violations = 0;
  std::uint64_t emitted = 0;
  std::uint64_t delivered = 0;
  std::uint64_t transport_dropped = 0;
  std::uint64_t overflowed = 0;
  std::uint64_t scored = 0;
  std::uint64_t processed_normal = 0;
  std::optional<SimTime> trained_at;
  int effective_rcvbuf = 0;
  double wall_seconds = 0.0;
};

struct RunResult {
  Scenario scenario;
  TimelineLog log;
  GroundTruthLog truth;
  Report report;
  RunStats stats;
  AadrnnModel model;
  std::vector<PacketKey> training_members;
};

RunResult run_sim(const Scenario& scenario);
RunResult run_live(const Scenario& scenario);
RunResult run_scenario(const Scenario& scenario);

std::string manifest_json(const RunResult& result);

// manifest.json, report.json, model.json, the CSVs and the charts.
void persist(const RunResult& result, const std::filesystem::path& dir);

struct SweepRow {
  double gamma = 0.0;
  ConfusionCounts confusion;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  double best_gamma = 0.0;
  double best_accuracy = 0.0;
};

// Sim mode only. Each grid point is a full deterministic rerun.
SweepTable sweep_gamma(const Scenario& scenario, std::span<const double> grid);

std::string sweep_csv(const SweepTable& table);

}  // namespace floodbed
