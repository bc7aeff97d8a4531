// Benign telemetry and UDP flood generation with ground-truth bookkeeping.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "floodbed/common.hpp"

namespace floodbed {

enum class PacketKind : std::uint8_t { Telemetry = 0, Flood = 1 };

const char* to_string(PacketKind kind);

struct DeviceProfile {
  std::uint32_t device_id = 0;
  SimTime telemetry_period = 1s;
  // Offset of the first telemetry tick. Lets several devices interleave.
  SimTime phase{0};
  bool compromised = false;
  double attack_probability = 0.10;
  SimTime attack_duration = 10s;
  double attack_rate = 1000.0;  // packets per second
  std::size_t attack_payload_size = 1032;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct PacketKey {
  std::uint32_t source = 0;
  std::uint32_t seq = 0;

  friend auto operator<=>(const PacketKey&, const PacketKey&) = default;
};

struct PacketRecord {
  std::uint32_t source = 0;
  std::uint32_t seq = 0;
  SimTime emit_time{0};
  PacketKind kind = PacketKind::Telemetry;
  std::vector<std::uint8_t> payload;  // the full datagram

  std::size_t payload_len() const { return payload.size(); }
  PacketKey key() const { return {source, seq}; }
};

struct TruthEntry {
  std::uint32_t source = 0;
  std::uint32_t seq = 0;
  PacketKind kind = PacketKind::Telemetry;
  SimTime emit_time{0};
};

/// One entry per emitted packet, keyed by (source, seq).
class GroundTruthLog {
 public:
  // Throws ContractViolation on a duplicate key.
  void record(const PacketRecord& packet);
  void record(const TruthEntry& entry);
  void merge(const GroundTruthLog& other);

  const TruthEntry* find(PacketKey key) const;
  const std::vector<TruthEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::optional<SimTime> first_flood_time() const;

 private:
  std::vector<TruthEntry> entries_;
  std::map<PacketKey, std::size_t> index_;
};

struct AttackInterval {
  SimTime start{0};
  SimTime end{0};  // exclusive

  SimTime length() const { return end - start; }
  bool contains(SimTime t) const { return t >= start && t < end; }
  friend bool operator==(const AttackInterval&, const AttackInterval&) = default;
};

// Sorts and merges overlapping or touching intervals.
std::vector<AttackInterval> merge_intervals(std::vector<AttackInterval> intervals);

/// Per telemetry tick in [0, horizon), start an attack of attack_duration with
/// attack_probability. Intervals are merged and capped at the horizon.
std::vector<AttackInterval> attack_schedule(const DeviceProfile& profile, SimTime horizon, Rng& rng);

// Flood packets an interval of the given length holds at the profile's rate,
// and the emit offset of the k-th of them.
std::size_t flood_packet_count(const DeviceProfile& profile, SimTime length);
SimTime flood_emit_offset(const DeviceProfile& profile, std::size_t k);

/// One device: telemetry every period, plus flood packets inside its attack
/// intervals. Emission is a single time-ordered stream with one seq counter.
class DeviceGenerator {
 public:
  DeviceGenerator(DeviceProfile profile, std::vector<AttackInterval> attacks, SimTime end,
                  std::uint64_t seed);

  const DeviceProfile& profile() const { return profile_; }
  const std::vector<AttackInterval>& attacks() const { return attacks_; }

  PacketRecord benign_next(SimTime clock);
  std::vector<PacketRecord> flood_burst(SimTime start);

  // Merged telemetry/flood stream up to (excluding) the end time.
  std::optional<SimTime> next_emit_time() const;
  PacketRecord emit_next();

 private:
  PacketRecord make_flood(SimTime t);
  std::optional<SimTime> next_flood_time() const;

  DeviceProfile profile_;
  std::vector<AttackInterval> attacks_;
  SimTime end_;
  Rng temperature_rng_;
  Rng payload_rng_;
  double temperature_c_;
  std::uint32_t next_seq_ = 0;
  SimTime next_tick_;
  std::size_t attack_index_ = 0;
  std::size_t flood_k_ = 0;
};

}  // namespace floodbed
