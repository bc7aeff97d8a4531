// Server pipeline: buffer manager, IDS input queue, batch service, packet
// content processing, mitigation hook and queue instrumentation.
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "floodbed/common.hpp"
#include "floodbed/ids.hpp"
#include "floodbed/mitigation.hpp"
#include "floodbed/transport.hpp"

namespace floodbed {

/// FIFO in front of the IDS.
class InputBuffer {
 public:
  explicit InputBuffer(std::size_t capacity = 0);  // 0 = unbounded

  // False (and counted) when a bounded buffer is full.
  bool push(const ServerPacket& packet);
  std::vector<ServerPacket> pop_batch(std::size_t max_count);
  std::vector<ServerPacket> flush();

  std::size_t size() const { return fifo_.size(); }
  bool empty() const { return fifo_.empty(); }
  std::size_t capacity() const { return capacity_; }

  std::uint64_t enqueued() const { return enqueued_; }
  std::uint64_t dequeued() const { return dequeued_; }
  std::uint64_t flushed() const { return flushed_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  std::deque<ServerPacket> fifo_;
  std::size_t capacity_;
  std::uint64_t enqueued_ = 0;
  std::uint64_t dequeued_ = 0;
  std::uint64_t flushed_ = 0;
  std::uint64_t dropped_ = 0;
};

struct ServiceConfig {
  SimTime ids_service_time = 1ms;  // per packet
  std::size_t batch_size = 10;
  SimTime content_processing_time = 100us;  // per packet ruled normal
  std::size_t capacity = 0;                 // 0 = unbounded
  SimTime sample_period = 100ms;

  // Emulated paralysis: above the threshold queue length, service slows
  // by `degradation_factor`.
  bool degradation_enabled = false;
  std::size_t degradation_threshold = 5000;
  double degradation_factor = 2.0;

  void validate() const;
  double service_rate() const { return 1e6 / static_cast<double>(ids_service_time.count()); }
};

struct QueueSample {
  SimTime time{0};
  std::size_t queue_len = 0;
  double processing_rate = 0.0;  // packets/s over the trailing second
  double delay_ms = 0.0;         // mean queueing delay of packets dequeued since the previous sample
  bool mitigation_active = false;

  // Counters for the conservation identity; not part of the CSV.
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;
  std::uint64_t flushed = 0;
  std::uint64_t dropped = 0;
};

struct PipelineCounters {
  std::uint64_t scored = 0;
  std::uint64_t processed_normal = 0;
  std::uint64_t discarded_attack = 0;
  std::uint64_t training_packets = 0;
};

/// Drives one server. Whoever owns the clock calls enqueue() for arrivals
/// and advance() whenever next_event() comes due.
class ServerPipeline {
 public:
  ServerPipeline(ServiceConfig service, IdsConfig ids, MitigationConfig mitigation, DropControl& transport);

  void enqueue(const ServerPacket& packet, SimTime now);

  // Earliest pending internal event: service completion or drop deadline.
  std::optional<SimTime> next_event() const;
  void advance(SimTime now);

  // Samples are appended to timeline(); times must strictly increase.
  QueueSample sample_metrics(SimTime now);

  // Pulls up to batch_size packets in FIFO order and records their
  // queueing delays. Used by the service loop; exposed for tests.
  std::vector<ServerPacket> dequeue_batch(SimTime now);

  const InputBuffer& buffer() const { return buffer_; }
  const Detector& detector() const { return detector_; }
  const MitigationState& mitigation() const { return mitigation_; }
  const PipelineCounters& counters() const { return counters_; }
  const std::vector<QueueSample>& timeline() const { return timeline_; }
  const std::vector<IdsDecision>& decisions() const { return decisions_; }
  const std::vector<LossRecord>& losses() const { return losses_; }
  const std::vector<SimTime>& last_batch_delays() const { return last_delays_; }
  bool idle() const { return phase_ == Phase::Idle; }
  std::size_t peak_queue() const { return peak_queue_; }

 private:
  enum class Phase { Idle, Scoring, Content };

  void start_service(SimTime now);
  void finish_scoring(SimTime now);
  void handle_decision(IdsDecision decision, SimTime now, std::vector<ServerPacket>& forward);
  void activate(SimTime now);

  ServiceConfig service_;
  DropControl& transport_;
  InputBuffer buffer_;
  Detector detector_;
  MitigationState mitigation_;

  Phase phase_ = Phase::Idle;
  SimTime busy_until_{0};
  std::vector<ServerPacket> in_service_;
  std::vector<ServerPacket> awaiting_decision_;
  std::size_t content_pending_ = 0;

  std::deque<SimTime> completions_;  // trailing-second processing rate
  double delay_sum_ms_ = 0.0;
  std::size_t delay_count_ = 0;
  std::vector<SimTime> last_delays_;
  std::size_t peak_queue_ = 0;

  PipelineCounters counters_;
  std::vector<QueueSample> timeline_;
  std::vector<IdsDecision> decisions_;
  std::vector<LossRecord> losses_;
};

}  // namespace floodbed
