#include "floodbed/features.hpp"

#include <algorithm>

namespace floodbed {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double spacing_metric(SimTime first, SimTime last, std::size_t count, SimTime t_ref) {
  if (count < 2) return 0.0;
  double mean_gap = to_seconds(last - first) / static_cast<double>(count - 1);
  return 1.0 - clamp01(mean_gap / to_seconds(t_ref));
}

}  // namespace

void FeatureConfig::validate() const {
  if (window < 1) throw ConfigError("ids.window", "must be >= 1");
  if (!(max_len > 0)) throw ConfigError("ids.max_len", "must be > 0");
  if (t_ref <= SimTime{0}) throw ConfigError("ids.t_ref_s", "must be > 0");
  if (!(c_ref > 0)) throw ConfigError("ids.c_ref", "must be > 0");
  if (rate_window <= SimTime{0}) throw ConfigError("ids.rate_window_s", "must be > 0");
}

MetricVector extract_metrics(std::span<const WindowPacket> recent, const FeatureConfig& cfg) {
  if (recent.empty()) throw ContractViolation("extract_metrics needs a nonempty window");
  const auto& last = recent.back();
  auto tail = recent.last(std::min(cfg.window, recent.size()));

  double length_sum = 0.0;
  for (const auto& p : tail) length_sum += p.length;

  auto in_rate_window = std::count_if(recent.begin(), recent.end(), [&](const WindowPacket& p) {
    return p.arrival > last.arrival - cfg.rate_window;
  });

  MetricVector x;
  x(0) = clamp01(length_sum / static_cast<double>(tail.size()) / cfg.max_len);
  x(1) = spacing_metric(tail.front().arrival, last.arrival, tail.size(), cfg.t_ref);
  x(2) = clamp01(static_cast<double>(in_rate_window) / cfg.c_ref);
  return x;
}

MetricExtractor::MetricExtractor(FeatureConfig cfg) : cfg_(cfg) { cfg_.validate(); }

MetricVector MetricExtractor::push(const WindowPacket& packet) {
  recent_.push_back(packet);
  length_sum_ += packet.length;
  if (recent_.size() > cfg_.window) {
    length_sum_ -= recent_.front().length;
    recent_.pop_front();
  }
  trailing_.push_back(packet.arrival);
  while (trailing_.front() <= packet.arrival - cfg_.rate_window) trailing_.pop_front();

  MetricVector x;
  x(0) = clamp01(length_sum_ / static_cast<double>(recent_.size()) / cfg_.max_len);
  x(1) = spacing_metric(recent_.front().arrival, packet.arrival, recent_.size(), cfg_.t_ref);
  x(2) = clamp01(static_cast<double>(trailing_.size()) / cfg_.c_ref);
  return x;
}

void MetricExtractor::reset() {
  recent_.clear();
  trailing_.clear();
  length_sum_ = 0.0;
}

}  // namespace floodbed
