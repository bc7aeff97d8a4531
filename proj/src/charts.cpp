#include <algorithm>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "floodbed/report.hpp"

namespace floodbed {
namespace {

struct DropBand {
  SimTime start, end;
};

std::vector<DropBand> drop_bands(const TimelineLog& log) {
  std::vector<DropBand> bands;
  for (const auto& e : log.events) {
    if (e.kind == MitigationEventKind::Activate) {
      bands.push_back({e.time, log.duration});
    } else if (!bands.empty()) {
      bands.back().end = e.time;
    }
  }
  return bands;
}

double nice_ceiling(double v) {
  if (v <= 0) return 1;
  double step = 1;
  while (step * 10 <= v) step *= 10;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * step >= v) return m * step;
  }
  return 10 * step;
}

class Canvas {
 public:
  Canvas(const ChartFrame& frame, SimTime duration, double y_max)
      : f_(frame), t_max_(std::max(to_seconds(duration), 1e-9)), y_max_(y_max) {}

  double x(SimTime t) const { return f_.left + to_seconds(t) / t_max_ * f_.plot_width(); }
  double y(double v) const { return f_.top + f_.plot_height() * (1.0 - std::clamp(v / y_max_, 0.0, 1.0)); }

  void begin(const std::string& title) {
    out_ += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
        "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        f_.width, f_.height);
    out_ += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", f_.width,
                        f_.height);
    out_ += fmt::format("<text x=\"{:.2f}\" y=\"20\" font-size=\"14\">{}</text>\n", f_.left, title);
  }

  void axes(const std::string& x_label, const std::string& y_label) {
    const double x0 = f_.left, x1 = f_.left + f_.plot_width();
    const double y0 = f_.top + f_.plot_height(), y1 = f_.top;
    out_ += fmt::format("<line class=\"axis\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n",
                        x0, y0, x1, y0);
    out_ += fmt::format("<line class=\"axis\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n",
                        x0, y0, x0, y1);
    for (int i = 0; i <= 5; ++i) {
      double tv = t_max_ * i / 5.0;
      double px = x0 + f_.plot_width() * i / 5.0;
      out_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n", px, y0 + 16, tv);
      double yv = y_max_ * i / 5.0;
      double py = y0 - f_.plot_height() * i / 5.0;
      out_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:g}</text>\n", x0 - 6, py + 4, yv);
    }
    out_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", x0 + f_.plot_width() / 2,
                        f_.height - 12, x_label);
    out_ += fmt::format(
        "<text x=\"14\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2f})\">{}</text>\n",
        f_.top + f_.plot_height() / 2, f_.top + f_.plot_height() / 2, y_label);
  }

  void bands(const TimelineLog& log) {
    for (const auto& b : drop_bands(log)) {
      out_ += fmt::format(
          "<rect class=\"drop-window\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
          "fill=\"#4a7ebb\" fill-opacity=\"0.18\"/>\n",
          x(b.start), f_.top, x(b.end) - x(b.start), f_.plot_height());
    }
    for (const auto& iv : log.attacks) {
      out_ += fmt::format(
          "<rect class=\"attack\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
          "fill=\"red\" fill-opacity=\"0.06\"/>\n",
          x(iv.start), f_.top, x(iv.end) - x(iv.start), f_.plot_height());
      for (SimTime t : {iv.start, iv.end}) {
        out_ += fmt::format(
            "<line class=\"attack-bound\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
            "stroke=\"red\" stroke-dasharray=\"6,4\"/>\n",
            x(t), f_.top, f_.top + f_.plot_height());
      }
    }
  }

  template <typename Value>
  void series(const std::vector<QueueSample>& samples, Value value, const char* color) {
    out_ += fmt::format("<polyline class=\"series\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"", color);
    bool first = true;
    for (const auto& s : samples) {
      out_ += fmt::format("{}{:.2f},{:.2f}", first ? "" : " ", x(s.time), y(value(s)));
      first = false;
    }
    out_ += "\"/>\n";
  }

  std::string& raw() { return out_; }
  std::string finish() { return std::move(out_) + "</svg>\n"; }

 private:
  ChartFrame f_;
  double t_max_;
  double y_max_;
  std::string out_;
};

template <typename Value>
std::string line_chart(const TimelineLog& log, const ChartFrame& frame, const std::string& title,
                       const std::string& y_label, Value value) {
  double peak = 0;
  for (const auto& s : log.samples) peak = std::max(peak, value(s));
  Canvas c(frame, log.duration, nice_ceiling(peak));
  c.begin(title);
  c.bands(log);
  c.axes("time (s)", y_label);
  c.series(log.samples, value, "#1f3b73");
  return c.finish();
}

}  // namespace

std::string queue_chart_svg(const TimelineLog& log, const ChartFrame& frame) {
  return line_chart(log, frame, "IDS input queue length", "packets",
                    [](const QueueSample& s) { return static_cast<double>(s.queue_len); });
}

std::string rate_chart_svg(const TimelineLog& log, const ChartFrame& frame) {
  return line_chart(log, frame, "IDS processing rate", "packets/s",
                    [](const QueueSample& s) { return s.processing_rate; });
}

std::string delay_chart_svg(const TimelineLog& log, const ChartFrame& frame) {
  return line_chart(log, frame, "Queueing delay before IDS analysis", "ms",
                    [](const QueueSample& s) { return s.delay_ms; });
}

std::string decisions_chart_svg(const TimelineLog& log, const ChartFrame& frame) {
  Canvas c(frame, log.duration, 1.0);
  c.begin("IDS batch decisions");
  c.bands(log);
  c.axes("time (s)", "attack = 1");
  for (const auto& d : log.decisions) {
    const double level = d.label == Label::Attack ? 1.0 : 0.0;
    c.raw() += fmt::format(
        "<line class=\"decision {}\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n",
        to_string(d.label), c.x(d.decide_time), c.y(level) - 4, c.x(d.decide_time), c.y(level) + 4,
        d.label == Label::Attack ? "#b22222" : "#2e8b57");
  }
  return c.finish();
}

void render_charts(const TimelineLog& log, const std::filesystem::path& dir) {
  if (log.samples.empty()) throw ContractViolation("render_charts needs a nonempty timeline");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "queue.svg") << queue_chart_svg(log);
  std::ofstream(dir / "rate.svg") << rate_chart_svg(log);
  std::ofstream(dir / "delay.svg") << delay_chart_svg(log);
  std::ofstream(dir / "decisions.svg") << decisions_chart_svg(log);
}

}  // namespace floodbed
