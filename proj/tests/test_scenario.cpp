#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "floodbed/scenario.hpp"

using namespace floodbed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("floodbed-scenario-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string field_of(const std::string& json) {
  try {
    apply_config(preset("attack10-mitigation"), json);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

int cli(const std::string& args) {
  int status = std::system((std::string(FLOODBED_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("every preset validates and has at most one compromised device") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    Scenario s = preset(name);
    CHECK_NOTHROW(s.validate());
    CHECK(std::count_if(s.devices.begin(), s.devices.end(), [](auto& d) { return d.compromised; }) <= 1);
  }
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("config errors carry the field path") {
  CHECK(field_of(R"({"duration_s": 0})") == "duration_s");
  CHECK(field_of(R"({"bogus": 1})") == "bogus");
  CHECK(field_of(R"({"service": {"batch_size": 0}})") == "service.batch_size");
  CHECK(field_of(R"({"service": {"batch_size": -3}})") == "service.batch_size");
  CHECK(field_of(R"({"ids": {"gamma": "high"}})") == "ids.gamma");
  CHECK(field_of(R"({"mitigation": {"enabled": 1}})") == "mitigation.enabled");
  CHECK(field_of(R"({"devices": [{"device_id": 1}, {"device_id": 1}]})") == "devices[1].device_id");
  CHECK(field_of(R"({"devices": [{"attack_probability": 2}]})") == "devices[0].attack_probability");
  CHECK(field_of(R"({"attack": {"intervals": [{"start_s": 1, "stop_s": 2}]}})") == "attack.intervals[0].stop_s");
  CHECK(field_of(R"({"transport": {"mode": "tcp"}})") == "transport.mode");
  CHECK(field_of("{not json") == "<config>");
  CHECK(field_of(R"({"ids": {"gamma": "paper-best"}})") == "<accepted>");
}

TEST_CASE("config overrides on top of a named preset") {
  Scenario s = apply_config(Scenario{}, R"({"scenario": "attack60-mitigation", "seed": 9,
      "mitigation": {"drop_duration_s": 12.5}, "service": {"degradation": {"enabled": true}}})");
  CHECK(s.name == "attack60-mitigation");
  CHECK(s.seed == 9);
  CHECK(s.mitigation.drop_duration == 12500ms);
  CHECK(s.service.degradation_enabled);
}

TEST_CASE("effective config round trips") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    Scenario s = preset(name);
    s.seed = 77;
    std::string text = scenario_json(s);
    CHECK(scenario_json(apply_config(Scenario{}, text)) == text);
  }
}

TEST_CASE("scheduled attacks are shifted by a seeded jitter below one second") {
  Scenario s = preset("attack10-nomitigation");
  std::set<SimTime> starts;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    s.seed = seed;
    auto a = resolve_attacks(s);
    REQUIRE(a.at(2).size() == 1);
    auto iv = a.at(2)[0];
    CHECK(iv.start >= 300s);
    CHECK(iv.start < 301s);
    CHECK(iv.length() == 10s);
    starts.insert(iv.start);
    CHECK(resolve_attacks(s).at(2)[0] == iv);
  }
  CHECK(starts.size() > 25);
}

TEST_CASE("probabilistic attacks start no earlier than the configured tick") {
  Scenario s = preset("probabilistic");
  std::size_t total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    s.seed = seed;
    auto attacks = resolve_attacks(s);
    for (auto& iv : attacks.at(2)) {
      CHECK(iv.start >= 300s);
      CHECK(iv.end <= s.duration);
      ++total;
    }
  }
  CHECK(total > 10);
}

TEST_CASE("same manifest, same bytes") {
  Scenario s = preset("attack10-mitigation");
  auto a = scratch("a"), b = scratch("b");
  persist(run_sim(s), a);
  persist(run_sim(s), b);
  for (const char* f : {"timeline.csv", "decisions.csv", "batches.csv", "mitigation_events.csv", "losses.csv",
                        "ground_truth.csv", "queue.svg", "rate.svg", "delay.svg", "decisions.svg", "report.json",
                        "model.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "manifest.json").find("\"version\": \"1.0.0\"") != std::string::npos);
}

TEST_CASE("gamma sweep") {
  Scenario s = preset("attack10-nomitigation");
  std::vector<double> grid{0.1, 0.3, kBestGamma, 0.9};
  auto table = sweep_gamma(s, grid);
  REQUIRE(table.rows.size() == 4);
  CHECK(table.best_accuracy >= table.rows[3].confusion.accuracy);
  CHECK(sweep_csv(table).rfind("gamma,accuracy,tpr,tnr,tp,fp,tn,fn\n", 0) == 0);
}

TEST_CASE("cli exit codes") {
  auto dir = scratch("cli");
  CHECK(cli("presets") == 0);
  CHECK(cli("run --scenario benign-only --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  std::ofstream(dir / "bad.json") << R"({"ids": {"window": 0}})";
  CHECK(cli("run --config " + (dir / "bad.json").string()) == 2);
  CHECK(cli("run --gamma nonsense") == 2);
}
