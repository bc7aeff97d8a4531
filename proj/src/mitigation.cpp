#include "floodbed/mitigation.hpp"

#include "floodbed/server.hpp"

namespace floodbed {

void MitigationConfig::validate() const {
  if (window_size < 1) throw ConfigError("mitigation.window_size", "must be >= 1");
  if (drop_duration < SimTime{0}) throw ConfigError("mitigation.drop_duration_s", "must be >= 0");
}

const char* to_string(MitigationEventKind kind) {
  return kind == MitigationEventKind::Activate ? "activate" : "deadline";
}

MitigationState::MitigationState(MitigationConfig cfg) : cfg_(cfg), ring_(cfg.window_size, Label::Normal) {
  cfg_.validate();
}

std::optional<SimTime> MitigationState::deadline() const {
  if (phase_ != Phase::Dropping) return std::nullopt;
  return deadline_;
}

void MitigationState::clear_window() {
  head_ = 0;
  fill_ = 0;
  attacks_ = 0;
}

MitigationAction MitigationState::observe(Label label, SimTime now) {
  if (phase_ != Phase::Monitoring) throw ContractViolation("observe while dropping");
  const std::size_t n = cfg_.window_size;
  if (fill_ == n) {
    if (ring_[head_] == Label::Attack) --attacks_;
  } else {
    ++fill_;
  }
  ring_[head_] = label;
  if (label == Label::Attack) ++attacks_;
  head_ = (head_ + 1) % n;

  // Strict majority of a full window.
  if (fill_ == n && 2 * attacks_ > n) {
    clear_window();
    phase_ = Phase::Dropping;
    deadline_ = now + cfg_.drop_duration;
    ++activations_;
    return MitigationAction::ActivateDrop;
  }
  return MitigationAction::None;
}

std::vector<ServerPacket> MitigationState::on_activate(InputBuffer& buffer, DropControl& transport, SimTime now) {
  if (phase_ != Phase::Dropping) throw ContractViolation("on_activate without a preceding ActivateDrop");
  auto flushed = buffer.flush();
  transport.drop_policy(true);
  const std::uint64_t dropped_now = transport.dropped();
  events_.push_back({now, MitigationEventKind::Activate, flushed.size(), dropped_now - dropped_mark_});
  dropped_mark_ = dropped_now;
  return flushed;
}

void MitigationState::on_deadline(DropControl& transport, SimTime now) {
  if (phase_ != Phase::Dropping || now < deadline_) throw ContractViolation("on_deadline before the drop deadline");
  transport.drop_policy(false);
  const std::uint64_t dropped_now = transport.dropped();
  const std::uint64_t during = dropped_now - dropped_mark_;
  dropped_total_ += during;
  dropped_mark_ = dropped_now;
  events_.push_back({now, MitigationEventKind::Deadline, 0, during});
  phase_ = Phase::Monitoring;
  clear_window();
}

}  // namespace floodbed
