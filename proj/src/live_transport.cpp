#include "floodbed/live_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

namespace floodbed {
namespace {

sockaddr_in loopback(std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return addr;
}

[[noreturn]] void fail(const char* what) {
  throw TransportError(std::string(what) + ": " + std::strerror(errno));
}

}  // namespace

SimTime WallClock::now() const {
  auto elapsed = std::chrono::steady_clock::now() - start_;
  auto us = std::chrono::duration_cast<std::chrono::duration<double, std::micro>>(elapsed).count();
  return SimTime{static_cast<std::int64_t>(us * speed_)};
}

std::chrono::steady_clock::time_point WallClock::wall_at(SimTime t) const {
  auto wall_us = static_cast<double>(t.count()) / speed_;
  return start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double, std::micro>(wall_us));
}

UdpSender::UdpSender(std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) fail("socket");
  auto addr = loopback(port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd_);
    fail("connect");
  }
}

UdpSender::~UdpSender() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSender::send(const PacketRecord& packet) {
  // No ACKs or retries: a failed send is a lost datagram.
  if (::send(fd_, packet.payload.data(), packet.payload.size(), 0) < 0) ++failures_;
}

UdpReceiver::UdpReceiver(UdpReceiverConfig cfg, const WallClock& clock)
    : cfg_(cfg), clock_(clock), handoff_(cfg.handoff_capacity) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) fail("socket");
  int buf = cfg_.rcvbuf_bytes;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
  socklen_t len = sizeof effective_rcvbuf_;
  ::getsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &effective_rcvbuf_, &len);
  timeval tv{0, 20000};
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  auto addr = loopback(cfg_.port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd_);
    fail("bind");
  }
}

UdpReceiver::~UdpReceiver() {
  stop();
  if (fd_ >= 0) ::close(fd_);
}

void UdpReceiver::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] { loop(); });
}

void UdpReceiver::stop() {
  running_.store(false);
  if (thread_.joinable()) thread_.join();
}

std::vector<LossRecord> UdpReceiver::losses() const {
  if (thread_.joinable()) throw ContractViolation("losses() read while the receiver runs");
  return losses_;
}

void UdpReceiver::loop() {
  std::array<std::uint8_t, 2048> buf{};
  while (running_.load(std::memory_order_relaxed)) {
    ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0) continue;  // timeout or interrupt; re-check running_
    SimTime arrival = clock_.now();
    received_.fetch_add(1, std::memory_order_relaxed);
    auto packet = to_server_packet(std::span<const std::uint8_t>(buf.data(), static_cast<std::size_t>(n)), arrival);
    if (!packet) {
      truncated_.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    if (dropping_.load(std::memory_order_acquire)) {
      dropped_.fetch_add(1, std::memory_order_relaxed);
      losses_.push_back({packet->source, packet->seq, arrival, LossCause::Drop});
      continue;
    }
    if (!handoff_.bounded_push(*packet)) {
      overflowed_.fetch_add(1, std::memory_order_relaxed);
      losses_.push_back({packet->source, packet->seq, arrival, LossCause::Overflow});
    }
  }
}

}  // namespace floodbed
