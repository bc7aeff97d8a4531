#include <algorithm>
#include <atomic>
#include <thread>

#include "floodbed/live_transport.hpp"
#include "floodbed/scenario.hpp"

namespace floodbed {
namespace detail {
std::vector<DeviceGenerator> make_generators(const Scenario& s);
IdsConfig seeded_ids(const Scenario& s);
void collect(RunResult& r, const ServerPipeline& pipeline, const std::vector<DeviceGenerator>& gens,
             std::vector<LossRecord> transport_losses);
}  // namespace detail

RunResult run_live(const Scenario& scenario) {
  scenario.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  RunResult r;
  r.scenario = scenario;
  r.scenario.transport.mode = TransportMode::Live;
  const Scenario& s = r.scenario;

  auto gens = detail::make_generators(s);
  // Generators run on copies; the originals keep the attack intervals for the log.
  std::vector<DeviceGenerator> running = gens;

  WallClock clock(s.transport.speed);
  UdpReceiver receiver({s.transport.port, s.transport.rcvbuf_bytes, 1 << 16}, clock);
  ServerPipeline pipeline(s.service, detail::seeded_ids(s), s.mitigation, receiver);
  receiver.start();

  std::atomic<bool> stop{false};
  std::vector<GroundTruthLog> truths(running.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < running.size(); ++i) {
    threads.emplace_back([&, i] {
      UdpSender sender(s.transport.port);
      auto& gen = running[i];
      while (!stop.load(std::memory_order_relaxed)) {
        auto t = gen.next_emit_time();
        if (!t) break;
        std::this_thread::sleep_until(clock.wall_at(*t));
        PacketRecord p = gen.emit_next();
        truths[i].record(p);
        sender.send(p);
      }
    });
  }

  SimTime next_sample = s.service.sample_period;
  SimTime last{0};
  auto step_to = [&](SimTime t) {
    t = std::max(t, last);
    while (next_sample <= t && next_sample <= s.duration) {
      pipeline.advance(next_sample);
      pipeline.sample_metrics(next_sample);
      next_sample += s.service.sample_period;
    }
    pipeline.advance(t);
    last = t;
  };

  ServerPacket packet;
  for (;;) {
    bool got = false;
    while (receiver.try_pop(packet)) {
      got = true;
      if (packet.arrival > s.duration) continue;
      step_to(packet.arrival);
      pipeline.enqueue(packet, last);
    }
    const SimTime now = clock.now();
    if (now > s.duration) {
      step_to(s.duration);
      break;
    }
    step_to(now);
    if (!got) std::this_thread::sleep_for(std::chrono::microseconds(200));
  }

  stop = true;
  for (auto& t : threads) t.join();
  receiver.stop();
  for (const auto& t : truths) r.truth.merge(t);

  r.stats.delivered = receiver.received();
  r.stats.transport_dropped = receiver.dropped();
  r.log.truncated_datagrams = receiver.truncated();
  r.stats.effective_rcvbuf = receiver.effective_rcvbuf();
  detail::collect(r, pipeline, gens, receiver.losses());
  r.stats.overflowed = receiver.overflowed() + pipeline.buffer().dropped();
  r.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return r;
}

}  // namespace floodbed
