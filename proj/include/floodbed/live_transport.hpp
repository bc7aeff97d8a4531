// Loopback UDP backend. One socket per generator; one receiving thread
// that stamps arrivals and hands them to the consumer through a lock-free
// queue.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/lockfree/queue.hpp>

#include "floodbed/transport.hpp"

namespace floodbed {

/// Monotonic wall clock mapped onto run time, optionally sped up.
class WallClock {
 public:
  explicit WallClock(double speed = 1.0)
      : start_(std::chrono::steady_clock::now()), speed_(speed) {}

  SimTime now() const;
  std::chrono::steady_clock::time_point wall_at(SimTime t) const;
  double speed() const { return speed_; }

 private:
  std::chrono::steady_clock::time_point start_;
  double speed_;
};

class UdpSender {
 public:
  explicit UdpSender(std::uint16_t port);
  ~UdpSender();
  UdpSender(const UdpSender&) = delete;
  UdpSender& operator=(const UdpSender&) = delete;

  void send(const PacketRecord& packet);
  std::uint64_t send_failures() const { return failures_; }

 private:
  int fd_ = -1;
  std::uint64_t failures_ = 0;
};

struct UdpReceiverConfig {
  std::uint16_t port = 5555;
  int rcvbuf_bytes = 4 << 20;
  std::size_t handoff_capacity = 1 << 16;
};

class UdpReceiver final : public DropControl {
 public:
  // Binds immediately; a busy port surfaces as TransportError.
  UdpReceiver(UdpReceiverConfig cfg, const WallClock& clock);
  ~UdpReceiver();
  UdpReceiver(const UdpReceiver&) = delete;
  UdpReceiver& operator=(const UdpReceiver&) = delete;

  void start();
  void stop();

  bool try_pop(ServerPacket& out) { return handoff_.pop(out); }

  void drop_policy(bool enabled) override { dropping_.store(enabled, std::memory_order_release); }
  bool dropping() const override { return dropping_.load(std::memory_order_acquire); }
  std::uint64_t dropped() const override { return dropped_.load(std::memory_order_relaxed); }

  std::uint64_t received() const { return received_.load(std::memory_order_relaxed); }
  std::uint64_t truncated() const { return truncated_.load(std::memory_order_relaxed); }
  std::uint64_t overflowed() const { return overflowed_.load(std::memory_order_relaxed); }
  int effective_rcvbuf() const { return effective_rcvbuf_; }

  // Valid after stop().
  std::vector<LossRecord> losses() const;

 private:
  void loop();

  UdpReceiverConfig cfg_;
  const WallClock& clock_;
  int fd_ = -1;
  int effective_rcvbuf_ = 0;
  boost::lockfree::queue<ServerPacket> handoff_;
  std::atomic<bool> running_{false};
  std::atomic<bool> dropping_{false};
  std::atomic<std::uint64_t> received_{0};
  std::atomic<std::uint64_t> truncated_{0};
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> overflowed_{0};
  std::vector<LossRecord> losses_;  // receiver thread only until stop()
  std::thread thread_;
};

}  // namespace floodbed
