#include "floodbed/transport.hpp"

#include <tuple>

#include "floodbed/wire.hpp"

namespace floodbed {

std::optional<ServerPacket> to_server_packet(std::span<const std::uint8_t> datagram, SimTime arrival) {
  auto header = wire::decode_header(datagram);
  if (!header) return std::nullopt;
  return ServerPacket{header->device_id, header->seq, header->emit_time, arrival,
                      static_cast<std::uint32_t>(datagram.size())};
}

const char* to_string(LossCause cause) {
  switch (cause) {
    case LossCause::Flush: return "flush";
    case LossCause::Drop: return "drop";
    case LossCause::Overflow: return "overflow";
  }
  return "?";
}

bool SimTransport::Later::operator()(const DatagramEvent& a, const DatagramEvent& b) const {
  return std::tuple(a.deliver_time, a.packet.source, a.packet.seq) >
         std::tuple(b.deliver_time, b.packet.source, b.packet.seq);
}

SimTransport::SimTransport(SimTransportConfig cfg) : cfg_(cfg), jitter_rng_(mix_seed(cfg.seed, 0x7a)) {
  if (cfg_.latency < SimTime{0}) throw ConfigError("transport.latency_us", "must be >= 0");
  if (cfg_.jitter < SimTime{0}) throw ConfigError("transport.jitter_us", "must be >= 0");
}

void SimTransport::send(PacketRecord packet) {
  SimTime delay = cfg_.latency;
  if (cfg_.jitter > SimTime{0}) {
    delay += SimTime{static_cast<std::int64_t>(jitter_rng_.uniform() * static_cast<double>(cfg_.jitter.count()))};
  }
  SimTime deliver = packet.emit_time + delay;
  ++sent_;
  events_.push(DatagramEvent{deliver, std::move(packet)});
}

std::optional<SimTime> SimTransport::next_delivery_time() const {
  if (events_.empty()) return std::nullopt;
  return events_.top().deliver_time;
}

std::optional<Datagram> SimTransport::recv() {
  if (events_.empty()) throw ContractViolation("recv on an empty transport");
  // priority_queue::top is const; the event is discarded right after the move.
  auto event = std::move(const_cast<DatagramEvent&>(events_.top()));
  events_.pop();
  if (event.deliver_time < clock_) throw ContractViolation("virtual clock ran backward");
  clock_ = event.deliver_time;
  if (dropping_) {
    ++dropped_;
    losses_.push_back({event.packet.source, event.packet.seq, event.deliver_time, LossCause::Drop});
    return std::nullopt;
  }
  ++delivered_;
  return Datagram{std::move(event.packet.payload), event.deliver_time};
}

}  // namespace floodbed
