#include "floodbed/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "floodbed/wire.hpp"

namespace floodbed {

const char* to_string(PacketKind kind) {
  return kind == PacketKind::Telemetry ? "telemetry" : "flood";
}

void DeviceProfile::validate() const {
  if (telemetry_period <= SimTime{0}) throw ConfigError("telemetry_period_s", "must be > 0");
  if (phase < SimTime{0}) throw ConfigError("phase_s", "must be >= 0");
  if (!(attack_probability >= 0.0 && attack_probability <= 1.0)) {
    throw ConfigError("attack_probability", "must lie in [0, 1]");
  }
  if (attack_duration < SimTime{0}) throw ConfigError("attack_duration_s", "must be >= 0");
  if (compromised && !(attack_rate > 0.0)) throw ConfigError("attack_rate", "must be > 0 for a compromised device");
  if (attack_payload_size < wire::kHeaderSize) {
    throw ConfigError("attack_payload_size", "must be at least the 20-byte header");
  }
}

void GroundTruthLog::record(const PacketRecord& packet) {
  record(TruthEntry{packet.source, packet.seq, packet.kind, packet.emit_time});
}

void GroundTruthLog::record(const TruthEntry& entry) {
  auto [it, inserted] = index_.emplace(PacketKey{entry.source, entry.seq}, entries_.size());
  if (!inserted) throw ContractViolation("duplicate ground-truth key");
  entries_.push_back(entry);
}

void GroundTruthLog::merge(const GroundTruthLog& other) {
  for (const auto& e : other.entries_) record(e);
}

const TruthEntry* GroundTruthLog::find(PacketKey key) const {
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::optional<SimTime> GroundTruthLog::first_flood_time() const {
  std::optional<SimTime> first;
  for (const auto& e : entries_) {
    if (e.kind == PacketKind::Flood && (!first || e.emit_time < *first)) first = e.emit_time;
  }
  return first;
}

std::vector<AttackInterval> merge_intervals(std::vector<AttackInterval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  std::vector<AttackInterval> merged;
  for (const auto& iv : intervals) {
    if (iv.end <= iv.start) continue;
    if (!merged.empty() && iv.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, iv.end);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

std::vector<AttackInterval> attack_schedule(const DeviceProfile& profile, SimTime horizon, Rng& rng) {
  if (!profile.compromised) throw ContractViolation("attack_schedule on a device that is not compromised");
  std::vector<AttackInterval> starts;
  for (SimTime t = profile.phase; t < horizon; t += profile.telemetry_period) {
    if (rng.bernoulli(profile.attack_probability)) {
      starts.push_back({t, std::min(t + profile.attack_duration, horizon)});
    }
  }
  return merge_intervals(std::move(starts));
}

SimTime flood_emit_offset(const DeviceProfile& profile, std::size_t k) {
  return SimTime{std::llround(static_cast<double>(k) * 1e6 / profile.attack_rate)};
}

std::size_t flood_packet_count(const DeviceProfile& profile, SimTime length) {
  if (length <= SimTime{0}) return 0;
  auto n = static_cast<std::size_t>(std::ceil(to_seconds(length) * profile.attack_rate));
  while (flood_emit_offset(profile, n) < length) ++n;
  while (n > 0 && flood_emit_offset(profile, n - 1) >= length) --n;
  return n;
}

DeviceGenerator::DeviceGenerator(DeviceProfile profile, std::vector<AttackInterval> attacks, SimTime end,
                                 std::uint64_t seed)
    : profile_(std::move(profile)),
      attacks_(merge_intervals(std::move(attacks))),
      end_(end),
      temperature_rng_(mix_seed(seed, 2 * profile_.device_id)),
      payload_rng_(mix_seed(seed, 2 * profile_.device_id + 1)),
      next_tick_(profile_.phase) {
  profile_.validate();
  if (!attacks_.empty() && !profile_.compromised) {
    throw ConfigError("attacks", "attack intervals given for a device that is not compromised");
  }
  temperature_c_ = temperature_rng_.uniform(40.0, 55.0);
}

PacketRecord DeviceGenerator::benign_next(SimTime clock) {
  // Bounded random walk, reflected at the sensor range.
  temperature_c_ += temperature_rng_.uniform(-0.5, 0.5);
  if (temperature_c_ < 30.0) temperature_c_ = 60.0 - temperature_c_;
  if (temperature_c_ > 80.0) temperature_c_ = 160.0 - temperature_c_;

  PacketRecord p;
  p.source = profile_.device_id;
  p.seq = next_seq_++;
  p.emit_time = clock;
  p.kind = PacketKind::Telemetry;
  p.payload = wire::encode_telemetry({p.source, p.seq, clock}, static_cast<float>(temperature_c_));
  return p;
}

PacketRecord DeviceGenerator::make_flood(SimTime t) {
  PacketRecord p;
  p.source = profile_.device_id;
  p.seq = next_seq_++;
  p.emit_time = t;
  p.kind = PacketKind::Flood;
  p.payload = wire::encode_flood({p.source, p.seq, t}, profile_.attack_payload_size, payload_rng_);
  return p;
}

std::vector<PacketRecord> DeviceGenerator::flood_burst(SimTime start) {
  std::vector<PacketRecord> out;
  const std::size_t n = flood_packet_count(profile_, profile_.attack_duration);
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(make_flood(start + flood_emit_offset(profile_, k)));
  return out;
}

std::optional<SimTime> DeviceGenerator::next_flood_time() const {
  std::size_t idx = attack_index_;
  std::size_t k = flood_k_;
  while (idx < attacks_.size()) {
    const auto& iv = attacks_[idx];
    if (k < flood_packet_count(profile_, iv.length())) return iv.start + flood_emit_offset(profile_, k);
    ++idx;
    k = 0;
  }
  return std::nullopt;
}

std::optional<SimTime> DeviceGenerator::next_emit_time() const {
  std::optional<SimTime> t;
  if (next_tick_ < end_) t = next_tick_;
  if (auto f = next_flood_time(); f && *f < end_ && (!t || *f < *t)) t = f;
  return t;
}

PacketRecord DeviceGenerator::emit_next() {
  auto tick = next_tick_ < end_ ? std::optional<SimTime>(next_tick_) : std::nullopt;
  auto flood = next_flood_time();
  if (flood && *flood >= end_) flood.reset();
  if (!tick && !flood) throw ContractViolation("generator exhausted");

  // Telemetry wins ties so benign traffic continues during a flood.
  if (tick && (!flood || *tick <= *flood)) {
    next_tick_ += profile_.telemetry_period;
    return benign_next(*tick);
  }
  while (flood_k_ >= flood_packet_count(profile_, attacks_[attack_index_].length())) {
    ++attack_index_;
    flood_k_ = 0;
  }
  ++flood_k_;
  return make_flood(*flood);
}

}  // namespace floodbed
