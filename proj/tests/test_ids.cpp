#include <cmath>
#include <vector>

#include "doctest.h"
#include "floodbed/ids.hpp"

using namespace floodbed;

TEST_CASE("decide examples") {
  std::vector<double> high(10, 0.5), low(10, 0.1);
  CHECK(decide(high, 0.3).label == Label::Attack);
  CHECK(decide(low, 0.3).label == Label::Normal);
  CHECK(decide(high, 0.3).score == doctest::Approx(0.5));
  // Strictly greater: y == gamma is normal.
  std::vector<double> edge{0.25, 0.5, 0.25, 0.2};
  CHECK(decide(edge, 0.3).label == Label::Normal);
  CHECK(decide(edge, 0.2999).label == Label::Attack);
  CHECK_THROWS_AS(decide(std::vector<double>{}, 0.3), ContractViolation);
}

TEST_CASE("parse_gamma") {
  CHECK(parse_gamma("paper-best") == kBestGamma);
  CHECK(parse_gamma("default") == kDefaultGamma);
  CHECK(parse_gamma("0.42") == 0.42);
  CHECK_THROWS_AS(parse_gamma("abc"), ConfigError);
  CHECK_THROWS_AS(parse_gamma("0.3x"), ConfigError);
}

TEST_CASE("training buffer fills once") {
  TrainingBuffer b(3);
  MetricVector x = MetricVector::Constant(0.1);
  CHECK_FALSE(b.push(x));
  CHECK_FALSE(b.push(x));
  CHECK(b.push(x));
  CHECK_FALSE(b.push(x));
  CHECK(b.fill() == 3);
  TrainingBuffer c(4);
  CHECK_THROWS_AS(train(c, TrainOptions{}), ContractViolation);
}

TEST_CASE("confusion identities and undefined rates") {
  auto c = confusion_from_counts(90, 5, 95, 10);
  CHECK(c.accuracy == doctest::Approx(185.0 / 200));
  CHECK(c.tpr == doctest::Approx(0.9));
  CHECK(c.tnr == doctest::Approx(0.95));
  CHECK(c.fpr() == doctest::Approx(0.05));
  auto none = confusion_from_counts(0, 0, 7, 0);
  CHECK(std::isnan(none.tpr));
  CHECK_FALSE(none.tpr_defined());
  CHECK(none.tnr == 1.0);
}

TEST_CASE("batch truth is a strict majority of flood members") {
  GroundTruthLog truth;
  IdsDecision d;
  for (std::uint32_t i = 0; i < 10; ++i) {
    truth.record(TruthEntry{1, i, i < 5 ? PacketKind::Flood : PacketKind::Telemetry, SimTime{i}});
    d.members.push_back({1, i});
  }
  CHECK(batch_truth(d, truth) == Label::Normal);
  truth.record(TruthEntry{2, 0, PacketKind::Flood, 0s});
  d.members[9] = {2, 0};
  CHECK(batch_truth(d, truth) == Label::Attack);
  d.members.push_back({9, 9});
  CHECK_THROWS_AS(batch_truth(d, truth), ContractViolation);
}

TEST_CASE("evaluate_at relabels at the given threshold") {
  GroundTruthLog truth;
  std::vector<IdsDecision> ds;
  const double scores[] = {0.1, 0.25, 0.5, 0.7};
  for (std::uint32_t i = 0; i < 4; ++i) {
    truth.record(TruthEntry{1, i, i % 2 ? PacketKind::Flood : PacketKind::Telemetry, SimTime{i}});
    std::vector<double> s{scores[i]};
    ds.push_back(decide(s, 0.3, i, SimTime{i}, {{1, i}}));
  }
  // truths N A N A
  auto at3 = evaluate(ds, truth);
  CHECK(at3.tp == 1);
  CHECK(at3.fp == 1);
  CHECK(at3.tn == 1);
  CHECK(at3.fn == 1);
  auto at0 = evaluate_at(ds, truth, 0.0);
  CHECK(at0.tp == 2);
  CHECK(at0.fp == 2);
}

TEST_CASE("detector trains on the first packets, then decides every batch") {
  IdsConfig cfg;
  cfg.training_size = 50;
  cfg.train.seed = 3;
  Detector det(cfg);
  SimTime t{0};
  std::uint32_t seq = 0;
  for (int i = 0; i < 50; ++i) {
    auto out = det.analyze({1, seq++, t, t, 24}, t);
    CHECK(out.in_training);
    t += 500ms;
  }
  REQUIRE(det.trained());
  CHECK(det.training_members().size() == 50);
  CHECK(*det.trained_at() == t - 500ms);

  std::vector<IdsDecision> decisions;
  for (int i = 0; i < 30; ++i) {
    auto out = det.analyze({1, seq++, t, t, 24}, t);
    CHECK_FALSE(out.in_training);
    if (out.decision) decisions.push_back(*out.decision);
    t += 500ms;
  }
  REQUIRE(decisions.size() == 3);
  for (auto& d : decisions) {
    CHECK(d.label == Label::Normal);
    CHECK(d.members.size() == 10);
  }
  for (int i = 0; i < 100; ++i) {
    auto out = det.analyze({2, seq++, t, t, 1032}, t);
    if (out.decision) decisions.push_back(*out.decision);
    t += 1ms;
  }
  CHECK(decisions.size() == 13);
  CHECK(decisions.back().label == Label::Attack);

  det.analyze({2, seq++, t, t, 1032}, t);
  auto pending = det.reset();
  CHECK(pending.size() == 1);
}
