// Traffic metric vector x = [x1, x2, x3] over the most recent packets.
//
//   x1  mean datagram length over the last `window` packets / max_len
//   x2  1 - clamp(mean inter-arrival over the last `window` packets / t_ref)
//       (0 for a single packet)
//   x3  packets arriving in the trailing `rate_window` / c_ref, clamped
#pragma once

#include <cstdint>
#include <deque>
#include <span>

#include <Eigen/Core>

#include "floodbed/common.hpp"

namespace floodbed {

template <typename Scalar>
using Metric = Eigen::Matrix<Scalar, 3, 1>;
using MetricVector = Metric<double>;

struct FeatureConfig {
  std::size_t window = 10;
  double max_len = 1500.0;
  SimTime t_ref = 1s;
  double c_ref = 200.0;
  SimTime rate_window = 1s;

  void validate() const;
};

struct WindowPacket {
  std::uint32_t length = 0;
  SimTime arrival{0};
};

// `recent` is in arrival order and ends with the packet being scored.
MetricVector extract_metrics(std::span<const WindowPacket> recent, const FeatureConfig& cfg = {});

/// Incremental form of extract_metrics over an unbounded arrival stream.
class MetricExtractor {
 public:
  explicit MetricExtractor(FeatureConfig cfg = {});

  MetricVector push(const WindowPacket& packet);
  void reset();

 private:
  FeatureConfig cfg_;
  std::deque<WindowPacket> recent_;
  std::deque<SimTime> trailing_;
  double length_sum_ = 0.0;
};

}  // namespace floodbed
