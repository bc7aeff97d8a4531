#include <vector>

#include "doctest.h"
#include "floodbed/mitigation.hpp"
#include "floodbed/server.hpp"
#include "oracles.hpp"

using namespace floodbed;

namespace {

struct FakeTransport : DropControl {
  bool on = false;
  std::uint64_t count = 0;
  void drop_policy(bool e) override { on = e; }
  bool dropping() const override { return on; }
  std::uint64_t dropped() const override { return count; }
};

}  // namespace

TEST_CASE("eleven attack labels in a full window activate, ten do not") {
  MitigationState m;
  for (int i = 0; i < 10; ++i) CHECK(m.observe(Label::Normal, 0s) == MitigationAction::None);
  for (int i = 0; i < 9; ++i) CHECK(m.observe(Label::Attack, 0s) == MitigationAction::None);
  // 10 of 20 so far after the next push.
  CHECK(m.observe(Label::Attack, 0s) == MitigationAction::None);
  CHECK(m.attack_count() == 10);
  // Evicts a normal label: 11 of 20.
  CHECK(m.observe(Label::Attack, 5s) == MitigationAction::ActivateDrop);
  CHECK(m.dropping());
  CHECK(*m.deadline() == 35s);
  CHECK(m.window_fill() == 0);
}

TEST_CASE("a window that is not full never activates") {
  MitigationState m;
  for (int i = 0; i < 19; ++i) CHECK(m.observe(Label::Attack, 0s) == MitigationAction::None);
  CHECK(m.observe(Label::Attack, 0s) == MitigationAction::ActivateDrop);
}

TEST_CASE("activation flushes the buffer and engages the transport; deadline restores") {
  MitigationState m;
  InputBuffer buf;
  FakeTransport tr;
  for (std::uint32_t i = 0; i < 7; ++i) buf.push({1, i, 0s, 0s, 24});
  for (int i = 0; i < 20; ++i) m.observe(Label::Attack, 1s);
  auto flushed = m.on_activate(buf, tr, 1s);
  CHECK(flushed.size() == 7);
  CHECK(buf.empty());
  CHECK(buf.flushed() == 7);
  CHECK(tr.on);
  CHECK_THROWS_AS(m.observe(Label::Attack, 2s), ContractViolation);
  CHECK_THROWS_AS(m.on_deadline(tr, 30s), ContractViolation);
  tr.count = 123;
  m.on_deadline(tr, 31s);
  CHECK_FALSE(tr.on);
  CHECK(m.phase() == MitigationState::Phase::Monitoring);
  CHECK(m.dropped_packets() == 123);
  REQUIRE(m.events().size() == 2);
  CHECK(m.events()[0].kind == MitigationEventKind::Activate);
  CHECK(m.events()[0].flushed == 7);
  CHECK(m.events()[1].dropped_since_last == 123);
  CHECK(m.activation_count() == 1);
}

TEST_CASE("on_activate without a decision is a contract violation") {
  MitigationState m;
  InputBuffer buf;
  FakeTransport tr;
  CHECK_THROWS_AS(m.on_activate(buf, tr, 0s), ContractViolation);
}

TEST_CASE("state machine equals the reference monitor on every short trace") {
  // Window 4, every label sequence of length <= 12, with a deadline
  // injected after each activation.
  const std::size_t window = 4;
  for (int len = 0; len <= 12; ++len) {
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
      MitigationConfig cfg;
      cfg.window_size = window;
      cfg.drop_duration = 1s;
      MitigationState m(cfg);
      oracle::Monitor ref{window, {}, false};
      FakeTransport tr;
      InputBuffer buf;
      SimTime t{0};
      for (int i = 0; i < len; ++i) {
        const bool attack = bits & (1u << i);
        const bool fired = m.observe(attack ? Label::Attack : Label::Normal, t) == MitigationAction::ActivateDrop;
        REQUIRE(fired == ref.push(attack));
        if (fired) {
          m.on_activate(buf, tr, t);
          t += 1s;
          m.on_deadline(tr, t);
          ref.deadline();
        }
        REQUIRE(m.window_fill() == ref.labels.size());
        t += 1ms;
      }
    }
  }
}

TEST_CASE("config validation") {
  MitigationConfig c;
  c.window_size = 0;
  CHECK_THROWS_AS(MitigationState{c}, ConfigError);
}
