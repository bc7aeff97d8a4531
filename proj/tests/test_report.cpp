#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "floodbed/report.hpp"
#include "floodbed/scenario.hpp"

using namespace floodbed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("floodbed-report-" + name);
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

const RunResult& mitigated() {
  static const RunResult r = run_sim(preset("attack60-mitigation"));
  return r;
}

}  // namespace

TEST_CASE("report recomputed from persisted CSVs is identical") {
  for (const char* name : {"attack10-nomitigation", "attack60-mitigation", "probabilistic"}) {
    CAPTURE(name);
    RunResult r = run_sim(preset(name));
    auto dir = scratch(name);
    write_logs(dir, r.log, r.truth);
    auto back = read_logs(dir);
    CHECK(report_json(summarize(back.log, back.truth)) == report_json(r.report));
    CHECK(back.log.decisions.size() == r.log.decisions.size());
    CHECK(back.truth.size() == r.truth.size());
  }
}

TEST_CASE("missing log files are reported") {
  auto dir = scratch("missing");
  CHECK_THROWS_AS(read_logs(dir), ConfigError);
}

TEST_CASE("truncated timeline yields an incomplete report") {
  TimelineLog log = mitigated().log;
  log.samples.resize(log.samples.size() / 2);
  auto rep = summarize(log, mitigated().truth);
  CHECK_FALSE(rep.complete);
  CHECK_FALSE(rep.incomplete_reasons.empty());
  CHECK(mitigated().report.complete);
}

TEST_CASE("all-benign run") {
  RunResult r = run_sim(preset("benign-only"));
  CHECK(r.report.peak_queue <= r.scenario.service.batch_size);
  CHECK(r.report.activation_times_s.empty());
  CHECK(r.report.attack_decisions == 0);
  CHECK(r.report.drain_times_s.empty());
  CHECK(queue_chart_svg(r.log).find("class=\"attack") == std::string::npos);
}

TEST_CASE("confusion identities on a run") {
  const auto& c = mitigated().report.confusion;
  CHECK(c.tp + c.fp + c.tn + c.fn == mitigated().report.decisions);
  if (c.tpr_defined() && c.tnr_defined()) {
    CHECK(c.accuracy >= std::min(c.tpr, c.tnr) - 1e-15);
    CHECK(c.accuracy <= std::max(c.tpr, c.tnr) + 1e-15);
  }
}

TEST_CASE("loss accounting splits benign collateral from blocked flood") {
  const auto& rep = mitigated().report;
  CHECK(rep.lost_total == rep.benign_collateral + rep.flood_blocked);
  CHECK(rep.lost_total == mitigated().log.losses.size());
  CHECK(rep.flood_blocked > 0);
}

TEST_CASE("drop-window bands line up with the mitigation events") {
  const auto& log = mitigated().log;
  ChartFrame frame;
  const std::string svg = queue_chart_svg(log, frame);
  std::regex band("<rect class=\"drop-window\" x=\"([0-9.]+)\" y=\"[0-9.]+\" width=\"([0-9.]+)\"");
  std::vector<std::pair<double, double>> bands;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), band); it != std::sregex_iterator(); ++it) {
    double x = std::stod((*it)[1]), w = std::stod((*it)[2]);
    auto to_t = [&](double px) { return (px - frame.left) / frame.plot_width() * to_seconds(log.duration); };
    bands.emplace_back(to_t(x), to_t(x + w));
  }
  // Events as persisted.
  auto dir = scratch("bands");
  write_logs(dir, log, mitigated().truth);
  std::istringstream csv(slurp(dir / kEventsCsv));
  std::string line;
  std::getline(csv, line);
  std::vector<double> starts, ends;
  while (std::getline(csv, line)) {
    auto comma = line.find(',');
    double t = std::stod(line.substr(0, comma));
    (line.find("activate") != std::string::npos ? starts : ends).push_back(t);
  }
  REQUIRE(bands.size() == starts.size());
  REQUIRE(bands.size() == 2);
  // Coordinates are rounded to 1/100 px; x + width can be off by 0.015 px.
  const double tol = 0.02 * to_seconds(log.duration) / frame.plot_width();
  for (std::size_t i = 0; i < bands.size(); ++i) {
    CHECK(std::abs(bands[i].second - ends[i]) <= tol);
    CHECK(std::abs(bands[i].first - starts[i]) <= tol);
  }
}

TEST_CASE("attack interval drawn with red dashed bounds") {
  const std::string svg = queue_chart_svg(mitigated().log);
  std::regex bound("<line class=\"attack-bound\"[^>]*stroke=\"red\"[^>]*stroke-dasharray=\"[0-9,]+\"");
  auto n = std::distance(std::sregex_iterator(svg.begin(), svg.end(), bound), std::sregex_iterator());
  CHECK(n == 2);
}

TEST_CASE("charts are byte-identical across reruns") {
  RunResult a = run_sim(preset("attack10-mitigation"));
  RunResult b = run_sim(preset("attack10-mitigation"));
  auto da = scratch("det-a"), db = scratch("det-b");
  render_charts(a.log, da);
  render_charts(b.log, db);
  for (const char* f : {"queue.svg", "rate.svg", "delay.svg", "decisions.svg"}) {
    CAPTURE(f);
    CHECK(slurp(da / f) == slurp(db / f));
    CHECK(slurp(da / f).rfind("<svg", 0) == 0);
  }
  TimelineLog empty;
  CHECK_THROWS_AS(render_charts(empty, da), ContractViolation);
}
