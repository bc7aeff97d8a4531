#include "floodbed/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>

#include "json.hpp"

namespace floodbed {
namespace fs = std::filesystem;
using nlohmann::json;

Report summarize(const TimelineLog& log, const GroundTruthLog& truth) {
  Report r;
  if (log.samples.empty()) {
    r.complete = false;
    r.incomplete_reasons.push_back("timeline has no samples");
  } else if (log.samples.back().time + log.sample_period <= log.duration) {
    r.complete = false;
    r.incomplete_reasons.push_back(
        fmt::format("timeline ends at {:.6f} s before the run end {:.6f} s", to_seconds(log.samples.back().time),
                    to_seconds(log.duration)));
  }

  r.confusion = evaluate(log.decisions, truth);
  r.decisions = log.decisions.size();
  const std::optional<SimTime> attack_start =
      log.attacks.empty() ? std::nullopt : std::optional<SimTime>(log.attacks.front().start);
  const std::optional<SimTime> attack_end =
      log.attacks.empty() ? std::nullopt : std::optional<SimTime>(log.attacks.back().end);
  for (const auto& d : log.decisions) {
    if (d.label != Label::Attack) continue;
    ++r.attack_decisions;
    if (attack_end && d.decide_time >= *attack_end) ++r.attack_decisions_after_attack_end;
    if (attack_start && d.decide_time >= *attack_start && !r.first_attack_decision_s) {
      r.first_attack_decision_s = to_seconds(d.decide_time);
    }
  }

  for (const auto& s : log.samples) {
    r.peak_queue = std::max(r.peak_queue, s.queue_len);
    r.peak_processing_rate = std::max(r.peak_processing_rate, s.processing_rate);
  }
  for (const auto& iv : log.attacks) {
    auto it = std::find_if(log.samples.begin(), log.samples.end(), [&](const QueueSample& s) {
      return s.time >= iv.end && s.queue_len < kDrainThreshold;
    });
    r.drain_times_s.push_back(it == log.samples.end() ? std::nullopt
                                                      : std::optional<double>(to_seconds(it->time - iv.end)));
  }

  for (const auto& e : log.events) {
    (e.kind == MitigationEventKind::Activate ? r.activation_times_s : r.deadline_times_s)
        .push_back(to_seconds(e.time));
  }
  if (r.first_attack_decision_s) {
    for (double t : r.activation_times_s) {
      if (t >= *r.first_attack_decision_s) {
        r.activation_latency_s = t - *r.first_attack_decision_s;
        break;
      }
    }
  }
  if (attack_start && !r.activation_times_s.empty()) {
    for (double t : r.activation_times_s) {
      if (t >= to_seconds(*attack_start)) {
        r.onset_to_activation_s = t - to_seconds(*attack_start);
        break;
      }
    }
  }

  for (const auto& loss : log.losses) {
    ++r.lost_total;
    const TruthEntry* e = truth.find({loss.source, loss.seq});
    if (e == nullptr) throw ContractViolation("loss record references a packet missing from ground truth");
    (e->kind == PacketKind::Telemetry ? r.benign_collateral : r.flood_blocked)++;
  }
  r.truncated_datagrams = log.truncated_datagrams;
  return r;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string report_json(const Report& r) {
  json j;
  j["complete"] = r.complete;
  j["incomplete_reasons"] = r.incomplete_reasons;
  j["confusion"] = {{"tp", r.confusion.tp},
                    {"fp", r.confusion.fp},
                    {"tn", r.confusion.tn},
                    {"fn", r.confusion.fn},
                    {"accuracy", num(r.confusion.accuracy)},
                    {"tpr", num(r.confusion.tpr)},
                    {"tnr", num(r.confusion.tnr)},
                    {"tpr_defined", r.confusion.tpr_defined()},
                    {"tnr_defined", r.confusion.tnr_defined()}};
  j["decisions"] = r.decisions;
  j["attack_decisions"] = r.attack_decisions;
  j["attack_decisions_after_attack_end"] = r.attack_decisions_after_attack_end;
  j["peak_queue"] = r.peak_queue;
  j["peak_processing_rate_pps"] = r.peak_processing_rate;
  j["drain_times_s"] = json::array();
  for (const auto& d : r.drain_times_s) j["drain_times_s"].push_back(opt(d));
  j["activation_times_s"] = r.activation_times_s;
  j["deadline_times_s"] = r.deadline_times_s;
  j["first_attack_decision_s"] = opt(r.first_attack_decision_s);
  j["activation_latency_s"] = opt(r.activation_latency_s);
  j["onset_to_activation_s"] = opt(r.onset_to_activation_s);
  j["lost_total"] = r.lost_total;
  j["benign_collateral"] = r.benign_collateral;
  j["flood_blocked"] = r.flood_blocked;
  j["truncated_datagrams"] = r.truncated_datagrams;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV persistence. Times are written with microsecond resolution and doubles
// in shortest round-trip form so read_logs() restores the exact values.

namespace {

std::string secs(SimTime t) {
  // Integer formatting avoids any rounding in the seconds column.
  const auto us = t.count();
  const char* sign = us < 0 ? "-" : "";
  const auto mag = us < 0 ? -us : us;
  return fmt::format("{}{}.{:06d}", sign, mag / 1000000, mag % 1000000);
}

SimTime parse_secs(const std::string& text, const std::string& where) {
  std::size_t dot = text.find('.');
  try {
    bool negative = !text.empty() && text[0] == '-';
    std::string whole = text.substr(negative ? 1 : 0, dot == std::string::npos ? std::string::npos : dot - (negative ? 1 : 0));
    std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (frac.size() > 6) throw ConfigError(where, "more than microsecond resolution: " + text);
    frac.resize(6, '0');
    std::int64_t us = std::stoll(whole.empty() ? "0" : whole) * 1000000 + std::stoll(frac);
    return SimTime{negative ? -us : us};
  } catch (const std::logic_error&) {
    throw ConfigError(where, "bad time value '" + text + "'");
  }
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.filename().string(), "cannot open");
  std::string line;
  if (!std::getline(in, line) || line != expected_header) {
    throw ConfigError(path.filename().string(), "unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

void need(const std::vector<std::string>& row, std::size_t n, const char* file) {
  if (row.size() != n) throw ConfigError(file, "expected " + std::to_string(n) + " columns");
}

double to_double(const std::string& s, const char* file) {
  try {
    return std::stod(s);
  } catch (const std::logic_error&) {
    throw ConfigError(file, "bad number '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s, const char* file) {
  try {
    return std::stoull(s);
  } catch (const std::logic_error&) {
    throw ConfigError(file, "bad integer '" + s + "'");
  }
}

}  // namespace

void write_logs(const fs::path& dir, const TimelineLog& log, const GroundTruthLog& truth) {
  fs::create_directories(dir);
  {
    auto out = fmt::output_file((dir / kTimelineCsv).string());
    out.print("time_s,queue_len,proc_rate_pps,delay_ms,mitigation_active\n");
    for (const auto& s : log.samples) {
      out.print("{},{},{},{},{}\n", secs(s.time), s.queue_len, s.processing_rate, s.delay_ms,
                s.mitigation_active ? 1 : 0);
    }
  }
  {
    auto out = fmt::output_file((dir / kDecisionsCsv).string());
    out.print("batch_id,decide_time_s,score,label,gamma\n");
    for (const auto& d : log.decisions) {
      out.print("{},{},{},{},{}\n", d.batch_id, secs(d.decide_time), d.score, to_string(d.label), d.gamma);
    }
  }
  {
    auto out = fmt::output_file((dir / kBatchesCsv).string());
    out.print("batch_id,source,seq\n");
    for (const auto& d : log.decisions) {
      for (const auto& m : d.members) out.print("{},{},{}\n", d.batch_id, m.source, m.seq);
    }
  }
  {
    auto out = fmt::output_file((dir / kEventsCsv).string());
    out.print("event_time_s,event,flushed,dropped_since_last\n");
    for (const auto& e : log.events) {
      out.print("{},{},{},{}\n", secs(e.time), to_string(e.kind), e.flushed, e.dropped_since_last);
    }
  }
  {
    auto out = fmt::output_file((dir / kLossesCsv).string());
    out.print("time_s,source,seq,cause\n");
    for (const auto& l : log.losses) out.print("{},{},{},{}\n", secs(l.time), l.source, l.seq, to_string(l.cause));
  }
  {
    auto out = fmt::output_file((dir / kTruthCsv).string());
    out.print("source,seq,kind,emit_time_s\n");
    for (const auto& e : truth.entries()) {
      out.print("{},{},{},{}\n", e.source, e.seq, to_string(e.kind), secs(e.emit_time));
    }
  }
  json info;
  info["duration_s"] = secs(log.duration);
  info["sample_period_s"] = secs(log.sample_period);
  info["truncated_datagrams"] = log.truncated_datagrams;
  info["attacks"] = json::array();
  for (const auto& iv : log.attacks) info["attacks"].push_back({{"start_s", secs(iv.start)}, {"end_s", secs(iv.end)}});
  std::ofstream(dir / kRunInfoJson) << info.dump(2) << "\n";
}

PersistedRun read_logs(const fs::path& dir) {
  PersistedRun run;
  auto& log = run.log;

  std::ifstream info_in(dir / kRunInfoJson);
  if (!info_in) throw ConfigError(kRunInfoJson, "cannot open");
  json info;
  try {
    info = json::parse(info_in);
    log.duration = parse_secs(info.at("duration_s").get<std::string>(), kRunInfoJson);
    log.sample_period = parse_secs(info.at("sample_period_s").get<std::string>(), kRunInfoJson);
    log.truncated_datagrams = info.at("truncated_datagrams").get<std::uint64_t>();
    for (const auto& a : info.at("attacks")) {
      log.attacks.push_back({parse_secs(a.at("start_s").get<std::string>(), kRunInfoJson),
                             parse_secs(a.at("end_s").get<std::string>(), kRunInfoJson)});
    }
  } catch (const json::exception& e) {
    throw ConfigError(kRunInfoJson, e.what());
  }

  for (const auto& row : read_csv(dir / kTimelineCsv, "time_s,queue_len,proc_rate_pps,delay_ms,mitigation_active")) {
    need(row, 5, kTimelineCsv);
    QueueSample s;
    s.time = parse_secs(row[0], kTimelineCsv);
    s.queue_len = to_u64(row[1], kTimelineCsv);
    s.processing_rate = to_double(row[2], kTimelineCsv);
    s.delay_ms = to_double(row[3], kTimelineCsv);
    s.mitigation_active = row[4] == "1";
    log.samples.push_back(s);
  }

  std::map<std::uint64_t, std::size_t> by_id;
  for (const auto& row : read_csv(dir / kDecisionsCsv, "batch_id,decide_time_s,score,label,gamma")) {
    need(row, 5, kDecisionsCsv);
    IdsDecision d;
    d.batch_id = to_u64(row[0], kDecisionsCsv);
    d.decide_time = parse_secs(row[1], kDecisionsCsv);
    d.score = to_double(row[2], kDecisionsCsv);
    if (row[3] != "attack" && row[3] != "normal") throw ConfigError(kDecisionsCsv, "bad label '" + row[3] + "'");
    d.label = row[3] == "attack" ? Label::Attack : Label::Normal;
    d.gamma = to_double(row[4], kDecisionsCsv);
    by_id[d.batch_id] = log.decisions.size();
    log.decisions.push_back(std::move(d));
  }
  for (const auto& row : read_csv(dir / kBatchesCsv, "batch_id,source,seq")) {
    need(row, 3, kBatchesCsv);
    auto it = by_id.find(to_u64(row[0], kBatchesCsv));
    if (it == by_id.end()) throw ConfigError(kBatchesCsv, "member of unknown batch " + row[0]);
    log.decisions[it->second].members.push_back(
        {static_cast<std::uint32_t>(to_u64(row[1], kBatchesCsv)), static_cast<std::uint32_t>(to_u64(row[2], kBatchesCsv))});
  }

  for (const auto& row : read_csv(dir / kEventsCsv, "event_time_s,event,flushed,dropped_since_last")) {
    need(row, 4, kEventsCsv);
    MitigationEvent e;
    e.time = parse_secs(row[0], kEventsCsv);
    if (row[1] != "activate" && row[1] != "deadline") throw ConfigError(kEventsCsv, "bad event '" + row[1] + "'");
    e.kind = row[1] == "activate" ? MitigationEventKind::Activate : MitigationEventKind::Deadline;
    e.flushed = to_u64(row[2], kEventsCsv);
    e.dropped_since_last = to_u64(row[3], kEventsCsv);
    log.events.push_back(e);
  }

  for (const auto& row : read_csv(dir / kLossesCsv, "time_s,source,seq,cause")) {
    need(row, 4, kLossesCsv);
    LossRecord l;
    l.time = parse_secs(row[0], kLossesCsv);
    l.source = static_cast<std::uint32_t>(to_u64(row[1], kLossesCsv));
    l.seq = static_cast<std::uint32_t>(to_u64(row[2], kLossesCsv));
    if (row[3] == "flush") l.cause = LossCause::Flush;
    else if (row[3] == "drop") l.cause = LossCause::Drop;
    else if (row[3] == "overflow") l.cause = LossCause::Overflow;
    else throw ConfigError(kLossesCsv, "bad cause '" + row[3] + "'");
    log.losses.push_back(l);
  }

  for (const auto& row : read_csv(dir / kTruthCsv, "source,seq,kind,emit_time_s")) {
    need(row, 4, kTruthCsv);
    TruthEntry e;
    e.source = static_cast<std::uint32_t>(to_u64(row[0], kTruthCsv));
    e.seq = static_cast<std::uint32_t>(to_u64(row[1], kTruthCsv));
    if (row[2] != "telemetry" && row[2] != "flood") throw ConfigError(kTruthCsv, "bad kind '" + row[2] + "'");
    e.kind = row[2] == "flood" ? PacketKind::Flood : PacketKind::Telemetry;
    e.emit_time = parse_secs(row[3], kTruthCsv);
    run.truth.record(e);
  }
  return run;
}

}  // namespace floodbed
