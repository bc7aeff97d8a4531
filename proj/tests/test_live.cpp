// Loopback socket tests. Ports are fixed and high; run serially.
#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "floodbed/live_transport.hpp"
#include "floodbed/wire.hpp"

using namespace floodbed;

namespace {

PacketRecord telemetry(std::uint32_t seq) {
  PacketRecord p;
  p.source = 1;
  p.seq = seq;
  p.payload = wire::encode_telemetry({1, seq, SimTime{seq}}, 50.0f);
  return p;
}

template <typename Pred>
bool wait_for(Pred pred) {
  for (int i = 0; i < 200 && !pred(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  return pred();
}

}  // namespace

TEST_CASE("wall clock scales elapsed time") {
  WallClock fast(50.0);
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(fast.now() >= 1s);
  CHECK(fast.wall_at(5s) - fast.wall_at(0s) == std::chrono::milliseconds(100));
}

TEST_CASE("datagrams cross loopback and arrive stamped in order") {
  WallClock clock;
  UdpReceiver rx({47101, 1 << 20, 1024}, clock);
  rx.start();
  UdpSender tx(47101);
  for (std::uint32_t i = 0; i < 50; ++i) tx.send(telemetry(i));
  CHECK(wait_for([&] { return rx.received() == 50; }));
  std::vector<ServerPacket> got;
  ServerPacket p;
  while (rx.try_pop(p)) got.push_back(p);
  REQUIRE(got.size() == 50);
  for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i].arrival >= got[i - 1].arrival);
  CHECK(got[7].seq == 7);
  CHECK(got[7].length == wire::kTelemetrySize);
  CHECK(rx.effective_rcvbuf() > 0);
  CHECK(tx.send_failures() == 0);
}

TEST_CASE("drop flag and truncated datagrams") {
  WallClock clock;
  UdpReceiver rx({47102, 1 << 20, 1024}, clock);
  rx.start();
  UdpSender tx(47102);
  rx.drop_policy(true);
  for (std::uint32_t i = 0; i < 10; ++i) tx.send(telemetry(i));
  CHECK(wait_for([&] { return rx.dropped() == 10; }));
  rx.drop_policy(false);
  PacketRecord runt = telemetry(99);
  runt.payload.resize(8);
  tx.send(runt);
  CHECK(wait_for([&] { return rx.truncated() == 1; }));
  CHECK_THROWS_AS(rx.losses(), ContractViolation);
  rx.stop();
  auto losses = rx.losses();
  REQUIRE(losses.size() == 10);
  CHECK(losses[0].cause == LossCause::Drop);
}

TEST_CASE("a busy port is a transport error, exit code 3 from the cli") {
  WallClock clock;
  UdpReceiver first({47103, 1 << 20, 1024}, clock);
  CHECK_THROWS_AS(UdpReceiver({47103, 1 << 20, 1024}, clock), TransportError);
  int status = std::system((std::string(FLOODBED_CLI) + " run --mode live --port 47103 >/dev/null 2>&1").c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 3);
}
