#include <cmath>
#include <set>

#include "doctest.h"
#include "floodbed/traffic.hpp"
#include "floodbed/wire.hpp"

using namespace floodbed;

TEST_CASE("telemetry datagram round trip") {
  wire::Header h{7, 42, 1'234'567us};
  auto bytes = wire::encode_telemetry(h, 48.25f);
  CHECK(bytes.size() == wire::kTelemetrySize);
  auto back = wire::decode_header(bytes);
  REQUIRE(back);
  CHECK(*back == h);
  CHECK(*wire::decode_temperature(bytes) == doctest::Approx(48.25));
  CHECK(wire::debug_kind(bytes) == 0);
}

TEST_CASE("flood datagram has the configured size and kind byte") {
  Rng rng(3);
  auto bytes = wire::encode_flood({2, 9, 10ms}, 1032, rng);
  CHECK(bytes.size() == 1032);
  CHECK(wire::debug_kind(bytes) == 1);
  CHECK(wire::decode_header(bytes)->seq == 9);
}

TEST_CASE("malformed datagrams are rejected") {
  auto bytes = wire::encode_telemetry({1, 1, 0us}, 40.0f);
  CHECK_FALSE(wire::decode_header(std::span(bytes).first(wire::kHeaderSize - 1)));
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_FALSE(wire::decode_header(bad));
  bad = bytes;
  bad[2] = 9;
  CHECK_FALSE(wire::decode_header(bad));
}

TEST_CASE("benign generator emits one packet per period") {
  DeviceProfile p;
  p.device_id = 1;
  p.phase = 250ms;
  DeviceGenerator g(p, {}, 10s, 5);
  std::vector<PacketRecord> out;
  while (g.next_emit_time()) out.push_back(g.emit_next());
  REQUIRE(out.size() == 10);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].seq == i);
    CHECK(out[i].emit_time == 250ms + SimTime{1s} * static_cast<long>(i));
    CHECK(out[i].kind == PacketKind::Telemetry);
    CHECK(out[i].payload_len() == wire::kTelemetrySize);
    float t = *wire::decode_temperature(out[i].payload);
    CHECK(t >= 30.0f);
    CHECK(t <= 80.0f);
  }
}

TEST_CASE("flood burst: count and spacing") {
  DeviceProfile p;
  p.device_id = 2;
  p.compromised = true;
  DeviceGenerator g(p, {}, 100s, 1);
  auto burst = g.flood_burst(300s);
  // 10 s at 1000 packets/s, one every millisecond.
  REQUIRE(burst.size() == 10000);
  for (std::size_t k = 0; k < burst.size(); ++k) {
    CHECK(burst[k].emit_time == 300s + SimTime{1000} * static_cast<long>(k));
    CHECK(burst[k].payload_len() == 1032);
  }
  CHECK(burst.back().emit_time < 310s);
}

TEST_CASE("flood_packet_count matches rate times length") {
  DeviceProfile p;
  for (double rate : {1.0, 3.0, 7.0, 333.0, 1000.0, 1500.0}) {
    p.attack_rate = rate;
    for (SimTime len : {SimTime{1s}, SimTime{10s}, SimTime{60s}, SimTime{2500ms}}) {
      const double expect = std::ceil(to_seconds(len) * rate - 1e-9);
      CHECK(flood_packet_count(p, len) == static_cast<std::size_t>(expect));
    }
  }
}

TEST_CASE("merged stream interleaves telemetry with a flood, seq strictly increasing") {
  DeviceProfile p;
  p.device_id = 2;
  p.compromised = true;
  p.phase = 500ms;
  DeviceGenerator g(p, {{3s, 5s}}, 8s, 11);
  std::vector<PacketRecord> out;
  while (g.next_emit_time()) out.push_back(g.emit_next());
  std::size_t floods = 0, telemetry = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].seq == i);
    if (i > 0) CHECK(out[i].emit_time >= out[i - 1].emit_time);
    (out[i].kind == PacketKind::Flood ? floods : telemetry)++;
  }
  CHECK(floods == 2000);
  CHECK(telemetry == 8);
}

TEST_CASE("attack_schedule start count is binomial") {
  // 300 ticks at p = 0.1 per device, counted over 30 seeds before merging:
  // the merged count is bounded by starts, the raw count by +-3 sigma.
  DeviceProfile p;
  p.compromised = true;
  p.attack_duration = 1us;  // no overlap, so merged intervals == starts
  const int ticks = 300, seeds = 30;
  long total = 0;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(1000 + s);
    total += static_cast<long>(attack_schedule(p, SimTime{1s} * ticks, rng).size());
  }
  const double n = double(ticks) * seeds, mean = n * 0.1, sd = std::sqrt(n * 0.1 * 0.9);
  CHECK(std::abs(total - mean) <= 3 * sd);
}

TEST_CASE("attack_schedule edge probabilities") {
  DeviceProfile p;
  p.compromised = true;
  Rng rng(1);
  p.attack_probability = 0.0;
  CHECK(attack_schedule(p, 100s, rng).empty());
  p.attack_probability = 1.0;
  auto all = attack_schedule(p, 100s, rng);
  REQUIRE(all.size() == 1);
  CHECK(all[0].start == 0s);
  CHECK(all[0].end == 100s);
  p.compromised = false;
  CHECK_THROWS_AS(attack_schedule(p, 100s, rng), ContractViolation);
}

TEST_CASE("merge_intervals") {
  auto m = merge_intervals({{5s, 7s}, {0s, 2s}, {2s, 3s}, {6s, 9s}, {4s, 4s}});
  REQUIRE(m.size() == 2);
  CHECK(m[0] == AttackInterval{0s, 3s});
  CHECK(m[1] == AttackInterval{5s, 9s});
}

TEST_CASE("ground truth rejects duplicate keys") {
  GroundTruthLog log;
  log.record(TruthEntry{1, 1, PacketKind::Telemetry, 0s});
  CHECK_THROWS_AS(log.record(TruthEntry{1, 1, PacketKind::Flood, 1s}), ContractViolation);
  log.record(TruthEntry{2, 1, PacketKind::Flood, 3s});
  CHECK(log.find({2, 1})->kind == PacketKind::Flood);
  CHECK(log.find({3, 1}) == nullptr);
  CHECK(*log.first_flood_time() == 3s);
}

TEST_CASE("profile validation names the field") {
  DeviceProfile p;
  p.attack_probability = 1.5;
  try {
    p.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "attack_probability");
  }
}
