#include "floodbed/ids.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace floodbed {

const char* to_string(Label label) { return label == Label::Attack ? "attack" : "normal"; }

double parse_gamma(std::string_view text) {
  if (text == "paper-best") return kBestGamma;
  if (text == "default") return kDefaultGamma;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError("ids.gamma", "expected a number, \"default\" or \"paper-best\"");
  }
  return value;
}

void IdsConfig::validate() const {
  features.validate();
  if (training_size < 1) throw ConfigError("ids.training_size", "must be >= 1");
  if (batch_size < 1) throw ConfigError("service.batch_size", "must be >= 1");
  if (!std::isfinite(gamma)) throw ConfigError("ids.gamma", "must be finite");
}

IdsDecision decide(std::span<const double> scores, double gamma, std::uint64_t batch_id, SimTime decide_time,
                   std::vector<PacketKey> members) {
  if (scores.empty()) throw ContractViolation("decide needs at least one score");
  IdsDecision d;
  d.batch_id = batch_id;
  d.score = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  d.label = d.score > gamma ? Label::Attack : Label::Normal;
  d.gamma = gamma;
  d.decide_time = decide_time;
  d.members = std::move(members);
  return d;
}

TrainingBuffer::TrainingBuffer(std::size_t capacity) : capacity_(capacity), samples_(capacity, 3) {
  if (capacity_ == 0) throw ConfigError("ids.training_size", "must be >= 1");
}

bool TrainingBuffer::push(const MetricVector& x) {
  if (full()) return false;
  samples_.row(static_cast<Eigen::Index>(fill_++)) = x.transpose();
  return full();
}

AadrnnModel train(const TrainingBuffer& buffer, const TrainOptions& options) {
  if (!buffer.full()) throw ContractViolation("train before the training buffer is full");
  return train<double>(buffer.samples(), options);
}

namespace {

using nlohmann::json;

json matrix_json(const MatrixX<double>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixX<double> matrix_from(const json& rows, int expect_rows, int expect_cols) {
  MatrixX<double> m(expect_rows, expect_cols);
  if (!rows.is_array() || static_cast<int>(rows.size()) != expect_rows) throw ConfigError("model.weights", "row count mismatch");
  for (int r = 0; r < expect_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != expect_cols) throw ConfigError("model.weights", "column count mismatch");
    for (int c = 0; c < expect_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string dump_model(const AadrnnModel& model) {
  json j;
  j["format"] = "floodbed-aadrnn";
  j["version"] = 1;
  j["layer_dims"] = model.layer_dims;
  j["trained"] = model.trained;
  j["seed"] = model.seed;
  j["firing_rate"] = model.firing_rate;
  j["inhibition"] = model.inhibition;
  j["feature_min"] = {model.feature_min(0), model.feature_min(1), model.feature_min(2)};
  j["feature_span"] = {model.feature_span(0), model.feature_span(1), model.feature_span(2)};
  j["training_residual"] = model.training_residual;
  j["weights"] = json::array();
  j["biases"] = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    j["weights"].push_back(matrix_json(model.weights[l]));
    j["biases"].push_back(std::vector<double>(model.biases[l].data(), model.biases[l].data() + model.biases[l].size()));
  }
  return j.dump(1);
}

AadrnnModel load_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("model", e.what());
  }
  if (j.value("format", "") != "floodbed-aadrnn" || j.value("version", 0) != 1) {
    throw ConfigError("model.version", "unsupported model format");
  }
  AadrnnModel m;
  m.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  m.trained = j.at("trained").get<bool>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.firing_rate = j.at("firing_rate").get<double>();
  m.inhibition = j.at("inhibition").get<double>();
  m.training_residual = j.at("training_residual").get<double>();
  for (int f = 0; f < 3; ++f) {
    m.feature_min(f) = j.at("feature_min").at(static_cast<std::size_t>(f)).get<double>();
    m.feature_span(f) = j.at("feature_span").at(static_cast<std::size_t>(f)).get<double>();
  }
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (m.layer_dims.size() < 2 || weights.size() + 1 != m.layer_dims.size() || biases.size() != weights.size()) {
    throw ConfigError("model.layer_dims", "inconsistent with weights");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    m.weights.push_back(matrix_from(weights[l], m.layer_dims[l + 1], m.layer_dims[l]));
    auto b = biases[l].get<std::vector<double>>();
    if (static_cast<int>(b.size()) != m.layer_dims[l + 1]) throw ConfigError("model.biases", "size mismatch");
    m.biases.push_back(Eigen::Map<VectorX<double>>(b.data(), static_cast<Eigen::Index>(b.size())));
  }
  for (const auto& w : m.weights) {
    if ((w.array() < 0).any()) throw ConfigError("model.weights", "negative weight");
  }
  return m;
}

ConfusionCounts confusion_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  ConfusionCounts c{tp, fp, tn, fn};
  auto ratio = [&](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? nan : static_cast<double>(num) / static_cast<double>(den);
  };
  c.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  c.tpr = ratio(tp, tp + fn);
  c.tnr = ratio(tn, tn + fp);
  return c;
}

Label batch_truth(const IdsDecision& decision, const GroundTruthLog& truth) {
  std::size_t floods = 0;
  for (const auto& key : decision.members) {
    const TruthEntry* e = truth.find(key);
    if (e == nullptr) {
      throw ContractViolation("decision " + std::to_string(decision.batch_id) + " references packet (" +
                              std::to_string(key.source) + ", " + std::to_string(key.seq) +
                              ") missing from ground truth");
    }
    if (e->kind == PacketKind::Flood) ++floods;
  }
  return 2 * floods > decision.members.size() ? Label::Attack : Label::Normal;
}

namespace {

ConfusionCounts tally(std::span<const IdsDecision> decisions, const GroundTruthLog& truth,
                      const std::optional<double>& gamma) {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& d : decisions) {
    Label predicted = gamma ? (d.score > *gamma ? Label::Attack : Label::Normal) : d.label;
    Label actual = batch_truth(d, truth);
    if (actual == Label::Attack) {
      (predicted == Label::Attack ? tp : fn)++;
    } else {
      (predicted == Label::Attack ? fp : tn)++;
    }
  }
  return confusion_from_counts(tp, fp, tn, fn);
}

}  // namespace

ConfusionCounts evaluate(std::span<const IdsDecision> decisions, const GroundTruthLog& truth) {
  return tally(decisions, truth, std::nullopt);
}

ConfusionCounts evaluate_at(std::span<const IdsDecision> decisions, const GroundTruthLog& truth, double gamma) {
  return tally(decisions, truth, gamma);
}

Detector::Detector(IdsConfig cfg) : cfg_(std::move(cfg)), extractor_(cfg_.features), training_(cfg_.training_size) {
  cfg_.validate();
}

Detector::Outcome Detector::analyze(const ServerPacket& packet, SimTime now) {
  MetricVector x = extractor_.push({packet.length, packet.arrival});
  if (!model_.trained) {
    training_members_.push_back(packet.key());
    if (training_.push(x)) {
      model_ = train(training_, cfg_.train);
      trained_at_ = now;
    }
    return {true, std::nullopt};
  }

  pending_scores_.push_back(score(x, forward(model_, x)));
  pending_members_.push_back(packet.key());
  if (pending_scores_.size() < cfg_.batch_size) return {};

  auto d = decide(pending_scores_, cfg_.gamma, next_batch_id_++, now, std::move(pending_members_));
  pending_scores_.clear();
  pending_members_.clear();
  return {false, std::move(d)};
}

std::vector<PacketKey> Detector::reset() {
  extractor_.reset();
  pending_scores_.clear();
  return std::exchange(pending_members_, {});
}

}  // namespace floodbed
