// Anomaly-based IDS: metric extraction, one-shot training on the first
// benign packets, per-packet scoring and batch decisions.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floodbed/aadrnn.hpp"
#include "floodbed/features.hpp"
#include "floodbed/traffic.hpp"
#include "floodbed/transport.hpp"

namespace floodbed {

enum class Label : std::uint8_t { Normal, Attack };

const char* to_string(Label label);

inline constexpr double kDefaultGamma = 0.3;
// Accuracy-optimal threshold of the reference deployment, exposed
// as the "paper-best" gamma preset.
inline constexpr double kBestGamma = 0.3787;

// Accepts a number or one of the named presets "default" / "paper-best".
double parse_gamma(std::string_view text);

struct IdsConfig {
  FeatureConfig features;
  std::size_t training_size = 500;
  std::size_t batch_size = 10;
  double gamma = kDefaultGamma;
  TrainOptions train;

  void validate() const;
};

struct IdsDecision {
  std::uint64_t batch_id = 0;
  double score = 0.0;  // batch-averaged y
  Label label = Label::Normal;
  double gamma = kDefaultGamma;
  SimTime decide_time{0};
  std::vector<PacketKey> members;
};

/// y = mean(scores); Attack iff y > gamma.
IdsDecision decide(std::span<const double> scores, double gamma, std::uint64_t batch_id = 0,
                   SimTime decide_time = SimTime{0}, std::vector<PacketKey> members = {});

class TrainingBuffer {
 public:
  explicit TrainingBuffer(std::size_t capacity = 500);

  // True exactly once: on the push that fills the buffer.
  bool push(const MetricVector& x);
  bool full() const { return fill_ == capacity_; }
  std::size_t fill() const { return fill_; }
  std::size_t capacity() const { return capacity_; }
  const Eigen::Matrix<double, Eigen::Dynamic, 3>& samples() const { return samples_; }

 private:
  std::size_t capacity_;
  std::size_t fill_ = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 3> samples_;
};

// Throws ContractViolation unless the buffer is full.
AadrnnModel train(const TrainingBuffer& buffer, const TrainOptions& options);

std::string dump_model(const AadrnnModel& model);
AadrnnModel load_model(std::string_view text);

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  // NaN when the corresponding denominator is zero.
  double accuracy = 0.0, tpr = 0.0, tnr = 0.0;

  bool tpr_defined() const { return tp + fn > 0; }
  bool tnr_defined() const { return tn + fp > 0; }
  double fpr() const { return 1.0 - tnr; }
};

ConfusionCounts confusion_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn);

// A batch is truly Attack iff a strict majority of its members are Flood.
// Throws ContractViolation when a member is missing from the truth log.
Label batch_truth(const IdsDecision& decision, const GroundTruthLog& truth);

ConfusionCounts evaluate(std::span<const IdsDecision> decisions, const GroundTruthLog& truth);

// Same as evaluate() with every decision relabelled at `gamma`.
ConfusionCounts evaluate_at(std::span<const IdsDecision> decisions, const GroundTruthLog& truth, double gamma);

/// Runtime IDS on the pipeline consumer. Packets arrive in FIFO order.
class Detector {
 public:
  explicit Detector(IdsConfig cfg);

  struct Outcome {
    bool in_training = false;  // packet fed the training buffer; no score
    std::optional<IdsDecision> decision;
  };

  Outcome analyze(const ServerPacket& packet, SimTime now);

  // Drop feature history and the pending batch; returns the pending members.
  std::vector<PacketKey> reset();

  bool trained() const { return model_.trained; }
  const AadrnnModel& model() const { return model_; }
  const IdsConfig& config() const { return cfg_; }
  const std::vector<PacketKey>& training_members() const { return training_members_; }
  std::optional<SimTime> trained_at() const { return trained_at_; }
  std::uint64_t decisions_made() const { return next_batch_id_; }

 private:
  IdsConfig cfg_;
  MetricExtractor extractor_;
  TrainingBuffer training_;
  std::vector<PacketKey> training_members_;
  AadrnnModel model_;
  std::optional<SimTime> trained_at_;
  std::vector<double> pending_scores_;
  std::vector<PacketKey> pending_members_;
  std::uint64_t next_batch_id_ = 0;
};

}  // namespace floodbed
