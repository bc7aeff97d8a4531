// Run logs, their CSV persistence, the summary report and SVG charts.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "floodbed/ids.hpp"
#include "floodbed/mitigation.hpp"
#include "floodbed/server.hpp"
#include "floodbed/traffic.hpp"
#include "floodbed/transport.hpp"

namespace floodbed {

/// Everything a run appends to, in the form it is persisted.
struct TimelineLog {
  std::vector<QueueSample> samples;
  std::vector<IdsDecision> decisions;
  std::vector<MitigationEvent> events;
  std::vector<LossRecord> losses;
  std::vector<AttackInterval> attacks;
  SimTime duration{0};
  SimTime sample_period = 100ms;
  std::uint64_t truncated_datagrams = 0;
};

inline constexpr std::size_t kDrainThreshold = 5;

struct Report {
  bool complete = true;
  std::vector<std::string> incomplete_reasons;

  ConfusionCounts confusion;
  std::size_t decisions = 0;
  std::size_t attack_decisions = 0;
  std::size_t attack_decisions_after_attack_end = 0;

  std::size_t peak_queue = 0;  // over samples
  double peak_processing_rate = 0.0;
  std::vector<std::optional<double>> drain_times_s;  // per attack interval; nullopt if never drained

  std::vector<double> activation_times_s;
  std::vector<double> deadline_times_s;
  std::optional<double> first_attack_decision_s;
  std::optional<double> activation_latency_s;  // first activation - first Attack decision
  std::optional<double> onset_to_activation_s;

  std::uint64_t lost_total = 0;
  std::uint64_t benign_collateral = 0;  // telemetry packets flushed or dropped
  std::uint64_t flood_blocked = 0;
  std::uint64_t truncated_datagrams = 0;
};

/// Pure function of the logs. Decisions that reference packets missing from
/// the truth log throw ContractViolation.
Report summarize(const TimelineLog& log, const GroundTruthLog& truth);

std::string report_json(const Report& report);

// CSV file names.
inline constexpr const char* kTimelineCsv = "timeline.csv";
inline constexpr const char* kDecisionsCsv = "decisions.csv";
inline constexpr const char* kBatchesCsv = "batches.csv";
inline constexpr const char* kEventsCsv = "mitigation_events.csv";
inline constexpr const char* kLossesCsv = "losses.csv";
inline constexpr const char* kTruthCsv = "ground_truth.csv";
inline constexpr const char* kRunInfoJson = "run_info.json";

void write_logs(const std::filesystem::path& dir, const TimelineLog& log, const GroundTruthLog& truth);

struct PersistedRun {
  TimelineLog log;
  GroundTruthLog truth;
};

// Inverse of write_logs. Missing or short files throw ConfigError.
PersistedRun read_logs(const std::filesystem::path& dir);

/// queue.svg, rate.svg, delay.svg, decisions.svg. Throws ContractViolation
/// when the log has no samples.
void render_charts(const TimelineLog& log, const std::filesystem::path& dir);

// Chart geometry, shared with tests that map SVG coordinates back to time.
struct ChartFrame {
  double width = 900, height = 320;
  double left = 70, right = 20, top = 40, bottom = 50;
  double plot_width() const { return width - left - right; }
  double plot_height() const { return height - top - bottom; }
};

std::string queue_chart_svg(const TimelineLog& log, const ChartFrame& frame = {});
std::string rate_chart_svg(const TimelineLog& log, const ChartFrame& frame = {});
std::string delay_chart_svg(const TimelineLog& log, const ChartFrame& frame = {});
std::string decisions_chart_svg(const TimelineLog& log, const ChartFrame& frame = {});

}  // namespace floodbed
