#include "floodbed/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace floodbed {
namespace {

using nlohmann::json;

std::vector<DeviceProfile> testbed_devices(bool second_compromised) {
  DeviceProfile benign;
  benign.device_id = 1;
  DeviceProfile second;
  second.device_id = 2;
  second.phase = 500ms;
  second.compromised = second_compromised;
  return {benign, second};
}

Scenario scheduled_attack(std::string name, SimTime length, bool mitigation) {
  Scenario s;
  s.name = std::move(name);
  s.devices = testbed_devices(true);
  s.devices[1].attack_duration = length;
  s.attack.kind = AttackPlanKind::Scheduled;
  s.attack.intervals = {{300s, 300s + length}};
  s.attack.start_jitter = 1s;
  s.mitigation.enabled = mitigation;
  if (!mitigation) {
    // Overloaded server: the flood arrives 10x faster than the IDS drains it.
    s.service.ids_service_time = 10ms;
  }
  return s;
}

}  // namespace

void Scenario::validate() const {
  if (duration <= SimTime{0}) throw ConfigError("duration_s", "must be > 0");
  if (devices.empty()) throw ConfigError("devices", "at least one device is required");
  std::set<std::uint32_t> seen;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    try {
      devices[i].validate();
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("devices[{}].{}", i, e.field()), e.what());
    }
    if (!seen.insert(devices[i].device_id).second) {
      throw ConfigError(fmt::format("devices[{}].device_id", i), "duplicate device id");
    }
  }
  const bool any_compromised = std::any_of(devices.begin(), devices.end(), [](const auto& d) { return d.compromised; });
  if (attack.kind != AttackPlanKind::None && !any_compromised) {
    throw ConfigError("attack.plan", "an attack plan needs a compromised device");
  }
  for (const auto& iv : attack.intervals) {
    if (iv.end < iv.start || iv.start < SimTime{0}) throw ConfigError("attack.intervals", "bad interval");
  }
  if (attack.start_jitter < SimTime{0}) throw ConfigError("attack.start_jitter_s", "must be >= 0");
  if (transport.latency < SimTime{0}) throw ConfigError("transport.latency_us", "must be >= 0");
  if (transport.jitter < SimTime{0}) throw ConfigError("transport.jitter_us", "must be >= 0");
  if (!(transport.speed > 0)) throw ConfigError("transport.speed", "must be > 0");
  if (transport.port == 0) throw ConfigError("transport.port", "must be nonzero");
  service.validate();
  ids.validate();
  mitigation.validate();
}

std::vector<std::string> preset_names() {
  return {"benign-only",           "attack10-nomitigation", "attack10-mitigation",
          "attack60-nomitigation", "attack60-mitigation",   "probabilistic"};
}

Scenario preset(std::string_view name) {
  Scenario s;
  if (name == "benign-only") {
    s.name = "benign-only";
    s.devices = testbed_devices(false);
    s.duration = 600s;
  } else if (name == "attack10-nomitigation") {
    s = scheduled_attack("attack10-nomitigation", 10s, false);
    s.duration = 900s;
  } else if (name == "attack10-mitigation") {
    s = scheduled_attack("attack10-mitigation", 10s, true);
    s.duration = 420s;
  } else if (name == "attack60-nomitigation") {
    s = scheduled_attack("attack60-nomitigation", 60s, false);
    s.service.degradation_enabled = true;
    s.duration = 1800s;
  } else if (name == "attack60-mitigation") {
    s = scheduled_attack("attack60-mitigation", 60s, true);
    s.duration = 480s;
  } else if (name == "probabilistic") {
    s.name = "probabilistic";
    s.devices = testbed_devices(true);
    s.attack.kind = AttackPlanKind::Probabilistic;
    s.attack.not_before = 300s;
    s.duration = 900s;
  } else {
    throw ConfigError("scenario", "unknown preset '" + std::string(name) + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Config files

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) throw ConfigError(join(it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  Reader child(const char* key) const { return Reader(j_.at(key), join(key)); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const char* key, T& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(join(key), "expected true/false");
      } else if constexpr (std::is_arithmetic_v<T>) {
        if (!v.is_number()) throw ConfigError(join(key), "expected a number");
        if constexpr (std::is_integral_v<T>) {
          if (!v.is_number_integer()) throw ConfigError(join(key), "expected an integer");
          if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
              throw ConfigError(join(key), "must be >= 0");
            }
          }
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(join(key), "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(join(key), e.what());
    }
  }

  void seconds(const char* key, SimTime& out) const {
    double s = 0;
    if (!has(key)) return;
    read(key, s);
    if (!std::isfinite(s)) throw ConfigError(join(key), "must be finite");
    out = from_seconds(s);
  }

  void micros(const char* key, SimTime& out) const {
    std::int64_t us = 0;
    if (!has(key)) return;
    read(key, us);
    out = SimTime{us};
  }

  void millis(const char* key, SimTime& out) const {
    double ms = 0;
    if (!has(key)) return;
    read(key, ms);
    out = SimTime{std::llround(ms * 1000.0)};
  }

 private:
  const json& j_;
  std::string path_;
};

void read_device(const Reader& r, DeviceProfile& d) {
  r.allow({"device_id", "telemetry_period_s", "phase_s", "compromised", "attack_probability", "attack_duration_s",
           "attack_rate", "attack_payload_size"});
  r.read("device_id", d.device_id);
  r.seconds("telemetry_period_s", d.telemetry_period);
  r.seconds("phase_s", d.phase);
  r.read("compromised", d.compromised);
  r.read("attack_probability", d.attack_probability);
  r.seconds("attack_duration_s", d.attack_duration);
  r.read("attack_rate", d.attack_rate);
  r.read("attack_payload_size", d.attack_payload_size);
}

void apply(const Reader& r, Scenario& s) {
  r.allow({"scenario", "name", "seed", "duration_s", "transport", "service", "ids", "mitigation", "attack", "devices"});
  r.read("name", s.name);
  r.read("seed", s.seed);
  r.seconds("duration_s", s.duration);

  if (r.has("transport")) {
    Reader t = r.child("transport");
    t.allow({"mode", "latency_us", "jitter_us", "port", "rcvbuf_bytes", "speed"});
    if (t.has("mode")) {
      std::string mode;
      t.read("mode", mode);
      if (mode == "sim") s.transport.mode = TransportMode::Sim;
      else if (mode == "live") s.transport.mode = TransportMode::Live;
      else throw ConfigError("transport.mode", "expected \"sim\" or \"live\"");
    }
    t.micros("latency_us", s.transport.latency);
    t.micros("jitter_us", s.transport.jitter);
    t.read("port", s.transport.port);
    t.read("rcvbuf_bytes", s.transport.rcvbuf_bytes);
    t.read("speed", s.transport.speed);
  }

  if (r.has("service")) {
    Reader v = r.child("service");
    v.allow({"ids_service_time_us", "batch_size", "content_processing_time_us", "capacity", "sample_period_ms",
             "degradation"});
    v.micros("ids_service_time_us", s.service.ids_service_time);
    v.read("batch_size", s.service.batch_size);
    v.micros("content_processing_time_us", s.service.content_processing_time);
    v.read("capacity", s.service.capacity);
    v.millis("sample_period_ms", s.service.sample_period);
    if (v.has("degradation")) {
      Reader g = v.child("degradation");
      g.allow({"enabled", "threshold", "factor"});
      g.read("enabled", s.service.degradation_enabled);
      g.read("threshold", s.service.degradation_threshold);
      g.read("factor", s.service.degradation_factor);
    }
  }

  if (r.has("ids")) {
    Reader i = r.child("ids");
    i.allow({"gamma", "window", "max_len", "t_ref_s", "c_ref", "rate_window_s", "training_size", "hidden", "ridge",
             "firing_rate", "inhibition"});
    if (i.has("gamma")) {
      const json& g = i.raw("gamma");
      if (g.is_string()) s.ids.gamma = parse_gamma(g.get<std::string>());
      else i.read("gamma", s.ids.gamma);
    }
    i.read("window", s.ids.features.window);
    i.read("max_len", s.ids.features.max_len);
    i.seconds("t_ref_s", s.ids.features.t_ref);
    i.read("c_ref", s.ids.features.c_ref);
    i.seconds("rate_window_s", s.ids.features.rate_window);
    i.read("training_size", s.ids.training_size);
    if (i.has("hidden")) {
      try {
        s.ids.train.hidden = i.raw("hidden").get<std::vector<int>>();
      } catch (const json::exception&) {
        throw ConfigError("ids.hidden", "expected a list of layer widths");
      }
    }
    i.read("ridge", s.ids.train.ridge);
    i.read("firing_rate", s.ids.train.firing_rate);
    i.read("inhibition", s.ids.train.inhibition);
  }

  if (r.has("mitigation")) {
    Reader m = r.child("mitigation");
    m.allow({"enabled", "window_size", "drop_duration_s"});
    m.read("enabled", s.mitigation.enabled);
    m.read("window_size", s.mitigation.window_size);
    m.seconds("drop_duration_s", s.mitigation.drop_duration);
  }

  if (r.has("attack")) {
    Reader a = r.child("attack");
    a.allow({"plan", "intervals", "start_jitter_s", "not_before_s"});
    if (a.has("plan")) {
      std::string plan;
      a.read("plan", plan);
      if (plan == "none") s.attack.kind = AttackPlanKind::None;
      else if (plan == "scheduled") s.attack.kind = AttackPlanKind::Scheduled;
      else if (plan == "probabilistic") s.attack.kind = AttackPlanKind::Probabilistic;
      else throw ConfigError("attack.plan", "expected none, scheduled or probabilistic");
    }
    if (a.has("intervals")) {
      const json& list = a.raw("intervals");
      if (!list.is_array()) throw ConfigError("attack.intervals", "expected a list");
      s.attack.intervals.clear();
      for (std::size_t k = 0; k < list.size(); ++k) {
        Reader iv(list[k], fmt::format("attack.intervals[{}]", k));
        iv.allow({"start_s", "end_s"});
        AttackInterval interval;
        iv.seconds("start_s", interval.start);
        iv.seconds("end_s", interval.end);
        s.attack.intervals.push_back(interval);
      }
    }
    a.seconds("start_jitter_s", s.attack.start_jitter);
    a.seconds("not_before_s", s.attack.not_before);
  }

  if (r.has("devices")) {
    const json& list = r.raw("devices");
    if (!list.is_array()) throw ConfigError("devices", "expected a list");
    std::vector<DeviceProfile> devices;
    for (std::size_t k = 0; k < list.size(); ++k) {
      DeviceProfile d;
      d.device_id = static_cast<std::uint32_t>(k + 1);
      read_device(Reader(list[k], fmt::format("devices[{}]", k)), d);
      devices.push_back(d);
    }
    s.devices = std::move(devices);
  }
}

}  // namespace

Scenario apply_config(const Scenario& base, std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<config>", e.what());
  }
  Reader root(j, "");
  Scenario s = base;
  if (root.has("scenario")) {
    std::string name;
    root.read("scenario", name);
    s = preset(name);
  }
  apply(root, s);
  s.validate();
  return s;
}

Scenario load_config_file(const std::filesystem::path& path, const Scenario& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return apply_config(base, ss.str());
}

std::string scenario_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["duration_s"] = to_seconds(s.duration);
  j["transport"] = {{"mode", s.transport.mode == TransportMode::Sim ? "sim" : "live"},
                    {"latency_us", s.transport.latency.count()},
                    {"jitter_us", s.transport.jitter.count()},
                    {"port", s.transport.port},
                    {"rcvbuf_bytes", s.transport.rcvbuf_bytes},
                    {"speed", s.transport.speed}};
  j["service"] = {{"ids_service_time_us", s.service.ids_service_time.count()},
                  {"batch_size", s.service.batch_size},
                  {"content_processing_time_us", s.service.content_processing_time.count()},
                  {"capacity", s.service.capacity},
                  {"sample_period_ms", to_millis(s.service.sample_period)},
                  {"degradation",
                   {{"enabled", s.service.degradation_enabled},
                    {"threshold", s.service.degradation_threshold},
                    {"factor", s.service.degradation_factor}}}};
  j["ids"] = {{"gamma", s.ids.gamma},
              {"window", s.ids.features.window},
              {"max_len", s.ids.features.max_len},
              {"t_ref_s", to_seconds(s.ids.features.t_ref)},
              {"c_ref", s.ids.features.c_ref},
              {"rate_window_s", to_seconds(s.ids.features.rate_window)},
              {"training_size", s.ids.training_size},
              {"hidden", s.ids.train.hidden},
              {"ridge", s.ids.train.ridge},
              {"firing_rate", s.ids.train.firing_rate},
              {"inhibition", s.ids.train.inhibition}};
  j["mitigation"] = {{"enabled", s.mitigation.enabled},
                     {"window_size", s.mitigation.window_size},
                     {"drop_duration_s", to_seconds(s.mitigation.drop_duration)}};
  const char* plan = s.attack.kind == AttackPlanKind::None        ? "none"
                     : s.attack.kind == AttackPlanKind::Scheduled ? "scheduled"
                                                                  : "probabilistic";
  json intervals = json::array();
  for (const auto& iv : s.attack.intervals) {
    intervals.push_back({{"start_s", to_seconds(iv.start)}, {"end_s", to_seconds(iv.end)}});
  }
  j["attack"] = {{"plan", plan},
                 {"intervals", intervals},
                 {"start_jitter_s", to_seconds(s.attack.start_jitter)},
                 {"not_before_s", to_seconds(s.attack.not_before)}};
  j["devices"] = json::array();
  for (const auto& d : s.devices) {
    j["devices"].push_back({{"device_id", d.device_id},
                            {"telemetry_period_s", to_seconds(d.telemetry_period)},
                            {"phase_s", to_seconds(d.phase)},
                            {"compromised", d.compromised},
                            {"attack_probability", d.attack_probability},
                            {"attack_duration_s", to_seconds(d.attack_duration)},
                            {"attack_rate", d.attack_rate},
                            {"attack_payload_size", d.attack_payload_size}});
  }
  return j.dump(2);
}

std::map<std::uint32_t, std::vector<AttackInterval>> resolve_attacks(const Scenario& s) {
  std::map<std::uint32_t, std::vector<AttackInterval>> out;
  Rng rng(mix_seed(s.seed, 0xa77ac));
  for (const auto& d : s.devices) {
    if (!d.compromised) continue;
    std::vector<AttackInterval> intervals;
    if (s.attack.kind == AttackPlanKind::Scheduled) {
      SimTime shift{0};
      if (s.attack.start_jitter > SimTime{0}) {
        shift = SimTime{static_cast<std::int64_t>(rng.uniform() * static_cast<double>(s.attack.start_jitter.count()))};
      }
      for (auto iv : s.attack.intervals) {
        iv.start += shift;
        iv.end += shift;
        if (iv.start >= s.duration) continue;
        iv.end = std::min(iv.end, s.duration);
        intervals.push_back(iv);
      }
    } else if (s.attack.kind == AttackPlanKind::Probabilistic) {
      DeviceProfile shifted = d;
      // First eligible tick on or after not_before, on the device's own grid.
      SimTime first = d.phase;
      if (first < s.attack.not_before) {
        auto ticks = (s.attack.not_before - d.phase + d.telemetry_period - SimTime{1}) / d.telemetry_period;
        first = d.phase + ticks * d.telemetry_period;
      }
      shifted.phase = first;
      Rng device_rng = rng.fork(d.device_id);
      intervals = attack_schedule(shifted, s.duration, device_rng);
    }
    out[d.device_id] = merge_intervals(std::move(intervals));
  }
  return out;
}

std::string sweep_csv(const SweepTable& table) {
  std::string out = "gamma,accuracy,tpr,tnr,tp,fp,tn,fn\n";
  for (const auto& row : table.rows) {
    const auto& c = row.confusion;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", row.gamma, c.accuracy, c.tpr, c.tnr, c.tp, c.fp, c.tn, c.fn);
  }
  return out;
}

}  // namespace floodbed
