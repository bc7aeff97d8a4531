// Datagram carriage from generators to the server.
//
// SimTransport is a virtual-clock priority queue of DatagramEvents.
// The live backend (UdpSender / UdpReceiver) lives in live_transport.hpp.
#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "floodbed/common.hpp"
#include "floodbed/traffic.hpp"

namespace floodbed {

enum class ClockMode { Virtual, Wall };

/// Packet as the server sees it: header fields and length, never the
/// ground-truth kind.
struct ServerPacket {
  std::uint32_t source = 0;
  std::uint32_t seq = 0;
  SimTime emit_time{0};
  SimTime arrival{0};
  std::uint32_t length = 0;

  PacketKey key() const { return {source, seq}; }
};

// nullopt for truncated or malformed datagrams.
std::optional<ServerPacket> to_server_packet(std::span<const std::uint8_t> datagram, SimTime arrival);

enum class LossCause { Flush, Drop, Overflow };

const char* to_string(LossCause cause);

struct LossRecord {
  std::uint32_t source = 0;
  std::uint32_t seq = 0;
  SimTime time{0};
  LossCause cause = LossCause::Drop;
};

/// Hook through which mitigation suppresses delivery at the transport.
class DropControl {
 public:
  virtual ~DropControl() = default;
  virtual void drop_policy(bool enabled) = 0;
  virtual bool dropping() const = 0;
  virtual std::uint64_t dropped() const = 0;
};

struct DatagramEvent {
  SimTime deliver_time{0};
  PacketRecord packet;
};

struct Datagram {
  std::vector<std::uint8_t> bytes;
  SimTime arrival{0};
};

struct SimTransportConfig {
  SimTime latency = 200us;
  SimTime jitter{0};  // uniform extra delay in [0, jitter]
  std::uint64_t seed = 0;
};

class SimTransport final : public DropControl {
 public:
  explicit SimTransport(SimTransportConfig cfg = {});

  void send(PacketRecord packet);

  std::optional<SimTime> next_delivery_time() const;

  // Pops the earliest event. Returns nullopt when the drop policy discarded
  // it; the discard is counted and logged.
  std::optional<Datagram> recv();

  void drop_policy(bool enabled) override { dropping_ = enabled; }
  bool dropping() const override { return dropping_; }
  std::uint64_t dropped() const override { return dropped_; }

  std::uint64_t sent() const { return sent_; }
  std::uint64_t delivered() const { return delivered_; }
  std::size_t in_flight() const { return events_.size(); }
  SimTime now() const { return clock_; }
  const std::vector<LossRecord>& losses() const { return losses_; }

 private:
  struct Later {
    bool operator()(const DatagramEvent& a, const DatagramEvent& b) const;
  };

  SimTransportConfig cfg_;
  Rng jitter_rng_;
  std::priority_queue<DatagramEvent, std::vector<DatagramEvent>, Later> events_;
  SimTime clock_{0};
  bool dropping_ = false;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<LossRecord> losses_;
};

}  // namespace floodbed
