// Drop-window mitigation.
//
// Monitoring keeps the most recent `window_size` per-packet labels. When the
// window is full and a strict majority are Attack, the IDS input buffer is
// flushed and the transport drops every arrival until `drop_duration` has
// passed; monitoring then restarts with an empty window.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "floodbed/common.hpp"
#include "floodbed/ids.hpp"
#include "floodbed/transport.hpp"

namespace floodbed {

struct MitigationConfig {
  bool enabled = true;
  std::size_t window_size = 20;
  SimTime drop_duration = 30s;

  void validate() const;
};

enum class MitigationAction { None, ActivateDrop };

enum class MitigationEventKind { Activate, Deadline };

const char* to_string(MitigationEventKind kind);

struct MitigationEvent {
  SimTime time{0};
  MitigationEventKind kind = MitigationEventKind::Activate;
  std::uint64_t flushed = 0;
  std::uint64_t dropped_since_last = 0;
};

class InputBuffer;

class MitigationState {
 public:
  enum class Phase { Monitoring, Dropping };

  explicit MitigationState(MitigationConfig cfg = {});

  /// Push one label. Throws ContractViolation while Dropping.
  MitigationAction observe(Label label, SimTime now);

  // Flush the buffer, enable transport drops, log the activation.
  // Returns the flushed packets so the caller can account for them.
  std::vector<ServerPacket> on_activate(InputBuffer& buffer, DropControl& transport, SimTime now);

  // Pre: Dropping and now >= deadline.
  void on_deadline(DropControl& transport, SimTime now);

  Phase phase() const { return phase_; }
  bool dropping() const { return phase_ == Phase::Dropping; }
  std::optional<SimTime> deadline() const;
  std::size_t window_fill() const { return fill_; }
  std::size_t attack_count() const { return attacks_; }
  std::uint64_t activation_count() const { return activations_; }
  std::uint64_t dropped_packets() const { return dropped_total_; }
  const std::vector<MitigationEvent>& events() const { return events_; }
  const MitigationConfig& config() const { return cfg_; }

 private:
  void clear_window();

  MitigationConfig cfg_;
  Phase phase_ = Phase::Monitoring;
  SimTime deadline_{0};
  std::vector<Label> ring_;
  std::size_t head_ = 0;
  std::size_t fill_ = 0;
  std::size_t attacks_ = 0;
  std::uint64_t activations_ = 0;
  std::uint64_t dropped_total_ = 0;
  std::uint64_t dropped_mark_ = 0;  // transport counter at the last event
  std::vector<MitigationEvent> events_;
};

}  // namespace floodbed
