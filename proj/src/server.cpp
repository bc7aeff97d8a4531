#include "floodbed/server.hpp"

#include <algorithm>
#include <cmath>

namespace floodbed {

InputBuffer::InputBuffer(std::size_t capacity) : capacity_(capacity) {}

bool InputBuffer::push(const ServerPacket& packet) {
  ++enqueued_;
  if (capacity_ != 0 && fifo_.size() >= capacity_) {
    ++dropped_;
    return false;
  }
  fifo_.push_back(packet);
  return true;
}

std::vector<ServerPacket> InputBuffer::pop_batch(std::size_t max_count) {
  const std::size_t n = std::min(max_count, fifo_.size());
  std::vector<ServerPacket> out(fifo_.begin(), fifo_.begin() + static_cast<std::ptrdiff_t>(n));
  fifo_.erase(fifo_.begin(), fifo_.begin() + static_cast<std::ptrdiff_t>(n));
  dequeued_ += n;
  return out;
}

std::vector<ServerPacket> InputBuffer::flush() {
  std::vector<ServerPacket> out(fifo_.begin(), fifo_.end());
  fifo_.clear();
  flushed_ += out.size();
  return out;
}

void ServiceConfig::validate() const {
  if (batch_size < 1) throw ConfigError("service.batch_size", "must be >= 1");
  if (ids_service_time <= SimTime{0}) throw ConfigError("service.ids_service_time_us", "must be > 0");
  if (content_processing_time < SimTime{0}) throw ConfigError("service.content_processing_time_us", "must be >= 0");
  if (sample_period <= SimTime{0}) throw ConfigError("service.sample_period_ms", "must be > 0");
  if (!(degradation_factor >= 1.0)) throw ConfigError("service.degradation.factor", "must be >= 1");
}

ServerPipeline::ServerPipeline(ServiceConfig service, IdsConfig ids, MitigationConfig mitigation,
                               DropControl& transport)
    : service_(service),
      transport_(transport),
      buffer_(service.capacity),
      detector_([&] {
        ids.batch_size = service.batch_size;
        return ids;
      }()),
      mitigation_(mitigation) {
  service_.validate();
}

void ServerPipeline::enqueue(const ServerPacket& packet, SimTime now) {
  if (mitigation_.dropping()) {
    // Handed off before the drop flag was visible to the receiver.
    losses_.push_back({packet.source, packet.seq, now, LossCause::Drop});
    return;
  }
  if (!buffer_.push(packet)) losses_.push_back({packet.source, packet.seq, now, LossCause::Overflow});
  peak_queue_ = std::max(peak_queue_, buffer_.size());
  if (phase_ == Phase::Idle) start_service(now);
}

std::optional<SimTime> ServerPipeline::next_event() const {
  std::optional<SimTime> t;
  if (phase_ != Phase::Idle) t = busy_until_;
  if (auto d = mitigation_.deadline(); d && (!t || *d < *t)) t = d;
  return t;
}

std::vector<ServerPacket> ServerPipeline::dequeue_batch(SimTime now) {
  auto batch = buffer_.pop_batch(service_.batch_size);
  last_delays_.clear();
  for (const auto& p : batch) {
    SimTime delay = now - p.arrival;
    last_delays_.push_back(delay);
    delay_sum_ms_ += to_millis(delay);
    ++delay_count_;
  }
  return batch;
}

void ServerPipeline::start_service(SimTime now) {
  const std::size_t backlog = buffer_.size();
  in_service_ = dequeue_batch(now);
  if (in_service_.empty()) {
    phase_ = Phase::Idle;
    return;
  }
  double per_packet = static_cast<double>(service_.ids_service_time.count());
  if (service_.degradation_enabled && backlog > service_.degradation_threshold) per_packet *= service_.degradation_factor;
  phase_ = Phase::Scoring;
  busy_until_ = now + SimTime{std::llround(per_packet * static_cast<double>(in_service_.size()))};
}

void ServerPipeline::activate(SimTime now) {
  for (const auto& p : mitigation_.on_activate(buffer_, transport_, now)) {
    losses_.push_back({p.source, p.seq, now, LossCause::Flush});
  }
  detector_.reset();
  for (const auto& p : awaiting_decision_) losses_.push_back({p.source, p.seq, now, LossCause::Flush});
  awaiting_decision_.clear();
}

void ServerPipeline::handle_decision(IdsDecision decision, SimTime now, std::vector<ServerPacket>& forward) {
  const Label label = decision.label;
  if (label == Label::Normal) {
    forward.insert(forward.end(), awaiting_decision_.begin(), awaiting_decision_.end());
  } else {
    counters_.discarded_attack += awaiting_decision_.size();
  }
  const std::size_t members = decision.members.size();
  awaiting_decision_.clear();
  decisions_.push_back(std::move(decision));

  if (!mitigation_.config().enabled || mitigation_.dropping()) return;
  // The batch label stands for each of its member packets.
  for (std::size_t i = 0; i < members; ++i) {
    if (mitigation_.observe(label, now) == MitigationAction::ActivateDrop) {
      activate(now);
      return;
    }
  }
}

void ServerPipeline::finish_scoring(SimTime now) {
  std::vector<ServerPacket> forward;
  auto batch = std::move(in_service_);
  in_service_.clear();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& p = batch[i];
    completions_.push_back(now);
    ++counters_.scored;
    auto outcome = detector_.analyze(p, now);
    if (outcome.in_training) {
      ++counters_.training_packets;
      forward.push_back(p);
      continue;
    }
    awaiting_decision_.push_back(p);
    if (!outcome.decision) continue;
    const bool was_dropping = mitigation_.dropping();
    handle_decision(std::move(*outcome.decision), now, forward);
    if (!was_dropping && mitigation_.dropping()) {
      // The rest of the batch goes with the flushed buffer.
      for (std::size_t j = i + 1; j < batch.size(); ++j) {
        losses_.push_back({batch[j].source, batch[j].seq, now, LossCause::Flush});
      }
      break;
    }
  }

  content_pending_ = forward.size();
  if (content_pending_ > 0 && service_.content_processing_time > SimTime{0}) {
    phase_ = Phase::Content;
    busy_until_ = now + service_.content_processing_time * static_cast<std::int64_t>(content_pending_);
  } else {
    counters_.processed_normal += content_pending_;
    content_pending_ = 0;
    start_service(now);
  }
}

void ServerPipeline::advance(SimTime now) {
  for (;;) {
    auto deadline = mitigation_.deadline();
    const bool service_due = phase_ != Phase::Idle && busy_until_ <= now;
    const bool deadline_due = deadline && *deadline <= now;
    if (!service_due && !deadline_due) return;

    // A deadline wins ties so a decision completing at the same instant is
    // observed by a monitoring state machine.
    if (deadline_due && (!service_due || *deadline <= busy_until_)) {
      mitigation_.on_deadline(transport_, *deadline);
      continue;
    }
    const SimTime t = busy_until_;
    if (phase_ == Phase::Scoring) {
      finish_scoring(t);
    } else {
      counters_.processed_normal += content_pending_;
      content_pending_ = 0;
      start_service(t);
    }
  }
}

QueueSample ServerPipeline::sample_metrics(SimTime now) {
  if (!timeline_.empty() && now <= timeline_.back().time) {
    throw ContractViolation("queue samples must be strictly increasing in time");
  }
  while (!completions_.empty() && completions_.front() <= now - 1s) completions_.pop_front();

  QueueSample s;
  s.time = now;
  s.queue_len = buffer_.size();
  s.processing_rate = static_cast<double>(completions_.size());
  s.delay_ms = delay_count_ == 0 ? 0.0 : delay_sum_ms_ / static_cast<double>(delay_count_);
  s.mitigation_active = mitigation_.dropping();
  s.enqueued = buffer_.enqueued();
  s.dequeued = buffer_.dequeued();
  s.flushed = buffer_.flushed();
  s.dropped = buffer_.dropped();
  delay_sum_ms_ = 0.0;
  delay_count_ = 0;
  timeline_.push_back(s);
  return s;
}

}  // namespace floodbed
