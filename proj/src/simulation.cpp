#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/format.h>

#include "floodbed/live_transport.hpp"
#include "floodbed/scenario.hpp"
#include "floodbed/wire.hpp"
#include "json.hpp"

namespace floodbed {
namespace detail {

std::vector<DeviceGenerator> make_generators(const Scenario& s) {
  auto attacks = resolve_attacks(s);
  std::vector<DeviceGenerator> gens;
  for (const auto& d : s.devices) {
    std::vector<AttackInterval> iv;
    if (auto it = attacks.find(d.device_id); it != attacks.end()) iv = it->second;
    gens.emplace_back(d, std::move(iv), s.duration, mix_seed(s.seed, d.device_id));
  }
  return gens;
}

IdsConfig seeded_ids(const Scenario& s) {
  IdsConfig ids = s.ids;
  ids.train.seed = mix_seed(s.seed, 0x1d5);
  return ids;
}

bool conserved(const QueueSample& q) {
  return q.enqueued == q.dequeued + q.flushed + q.dropped + q.queue_len;
}

// Fills everything in the result that comes from the pipeline and generators.
void collect(RunResult& r, const ServerPipeline& pipeline, const std::vector<DeviceGenerator>& gens,
             std::vector<LossRecord> transport_losses) {
  const Scenario& s = r.scenario;
  r.log.samples = pipeline.timeline();
  r.log.decisions = pipeline.decisions();
  r.log.events = pipeline.mitigation().events();
  r.log.losses = std::move(transport_losses);
  r.log.losses.insert(r.log.losses.end(), pipeline.losses().begin(), pipeline.losses().end());
  std::stable_sort(r.log.losses.begin(), r.log.losses.end(), [](const LossRecord& a, const LossRecord& b) {
    return std::tie(a.time, a.source, a.seq) < std::tie(b.time, b.source, b.seq);
  });
  std::vector<AttackInterval> attacks;
  for (const auto& g : gens) attacks.insert(attacks.end(), g.attacks().begin(), g.attacks().end());
  r.log.attacks = merge_intervals(std::move(attacks));
  r.log.duration = s.duration;
  r.log.sample_period = s.service.sample_period;

  for (const auto& q : r.log.samples) {
    if (!conserved(q)) ++r.stats.conservation_violations;
  }
  r.stats.peak_queue_exact = pipeline.peak_queue();
  r.stats.emitted = r.truth.size();
  r.stats.scored = pipeline.counters().scored;
  r.stats.processed_normal = pipeline.counters().processed_normal;
  r.stats.trained_at = pipeline.detector().trained_at();
  r.model = pipeline.detector().model();
  r.training_members = pipeline.detector().training_members();
  r.report = summarize(r.log, r.truth);
}

}  // namespace detail

RunResult run_sim(const Scenario& scenario) {
  scenario.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  RunResult r;
  r.scenario = scenario;
  r.scenario.transport.mode = TransportMode::Sim;
  const Scenario& s = r.scenario;

  auto gens = detail::make_generators(s);
  SimTransport transport({s.transport.latency, s.transport.jitter, mix_seed(s.seed, 0x7a5)});
  ServerPipeline pipeline(s.service, detail::seeded_ids(s), s.mitigation, transport);
  SimTime next_sample = s.service.sample_period;

  // Same-instant order: server completions, emissions, deliveries, samples.
  for (;;) {
    SimTime best = SimTime::max();
    int rank = -1;
    std::size_t gen_index = 0;
    auto consider = [&](std::optional<SimTime> t, int k) {
      if (t && *t < best) {
        best = *t;
        rank = k;
      }
    };
    consider(pipeline.next_event(), 0);
    for (std::size_t i = 0; i < gens.size(); ++i) {
      auto t = gens[i].next_emit_time();
      if (t && *t < best) {
        best = *t;
        rank = 1;
        gen_index = i;
      }
    }
    consider(transport.next_delivery_time(), 2);
    consider(next_sample, 3);
    if (rank < 0 || best > s.duration) break;

    switch (rank) {
      case 0:
        pipeline.advance(best);
        break;
      case 1: {
        PacketRecord p = gens[gen_index].emit_next();
        r.truth.record(p);
        transport.send(std::move(p));
        break;
      }
      case 2: {
        auto d = transport.recv();
        if (!d) break;
        auto sp = to_server_packet(d->bytes, d->arrival);
        if (!sp) {
          ++r.log.truncated_datagrams;
          break;
        }
        pipeline.enqueue(*sp, d->arrival);
        break;
      }
      case 3:
        pipeline.sample_metrics(best);
        next_sample += s.service.sample_period;
        break;
    }
  }

  r.stats.delivered = transport.delivered();
  r.stats.transport_dropped = transport.dropped();
  detail::collect(r, pipeline, gens, transport.losses());
  r.stats.overflowed = pipeline.buffer().dropped();
  r.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return r;
}

RunResult run_scenario(const Scenario& scenario) {
  return scenario.transport.mode == TransportMode::Live ? run_live(scenario) : run_sim(scenario);
}

std::string manifest_json(const RunResult& r) {
  nlohmann::json j;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  j["tool"] = "floodbed";
  j["version"] = kVersion;
  j["written_at"] = stamp;
  j["scenario"] = nlohmann::json::parse(scenario_json(r.scenario));
  j["seeds"] = {{"run", r.scenario.seed},
                {"model", r.model.seed},
                {"transport", mix_seed(r.scenario.seed, 0x7a5)}};
  nlohmann::json attacks = nlohmann::json::array();
  for (const auto& a : r.log.attacks) attacks.push_back({{"start_s", to_seconds(a.start)}, {"end_s", to_seconds(a.end)}});
  j["attack_intervals"] = attacks;
  j["stats"] = {{"emitted", r.stats.emitted},
                {"delivered", r.stats.delivered},
                {"transport_dropped", r.stats.transport_dropped},
                {"overflowed", r.stats.overflowed},
                {"scored", r.stats.scored},
                {"processed_normal", r.stats.processed_normal},
                {"peak_queue_exact", r.stats.peak_queue_exact},
                {"conservation_violations", r.stats.conservation_violations},
                {"trained_at_s", r.stats.trained_at ? nlohmann::json(to_seconds(*r.stats.trained_at)) : nlohmann::json()},
                {"wall_seconds", r.stats.wall_seconds}};
  if (r.scenario.transport.mode == TransportMode::Live) {
    j["live"] = {{"requested_rcvbuf_bytes", r.scenario.transport.rcvbuf_bytes},
                 {"effective_rcvbuf_bytes", r.stats.effective_rcvbuf}};
  }
  return j.dump(2);
}

void persist(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("--out", "cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("--out", "cannot write " + (dir / name).string());
    out << text << '\n';
  };
  write("manifest.json", manifest_json(r));
  write("report.json", report_json(r.report));
  if (r.model.trained) write("model.json", dump_model(r.model));
  write_logs(dir, r.log, r.truth);
  if (!r.log.samples.empty()) render_charts(r.log, dir);
}

SweepTable sweep_gamma(const Scenario& scenario, std::span<const double> grid) {
  SweepTable table;
  bool first = true;
  for (double gamma : grid) {
    Scenario s = scenario;
    s.transport.mode = TransportMode::Sim;
    s.ids.gamma = gamma;
    RunResult r = run_sim(s);
    table.rows.push_back({gamma, r.report.confusion});
    const double acc = r.report.confusion.accuracy;
    if (!std::isnan(acc) && (first || acc > table.best_accuracy)) {
      table.best_accuracy = acc;
      table.best_gamma = gamma;
      first = false;
    }
  }
  return table;
}

}  // namespace floodbed
