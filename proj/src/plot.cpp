#include "auvfleet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "auvfleet/errors.hpp"

namespace auvfleet {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#8c564b", "#e377c2"};

const char* agent_color(int i) { return kPalette[i % 6]; }

struct Series {
  std::vector<double> x, y;
  std::string color;
  std::string label;
  bool dashed{false};
};

/// One 2D panel with auto-scaled axes and a handful of ticks.
class Panel {
 public:
  Panel(double px, double py, double width, double height, std::string title,
        std::string xlabel, std::string ylabel)
      : px_(px), py_(py), w_(width), h_(height), title_(std::move(title)),
        xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add(Series s) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin_ = std::min(xmin_, s.x[i]);
      xmax_ = std::max(xmax_, s.x[i]);
      ymin_ = std::min(ymin_, s.y[i]);
      ymax_ = std::max(ymax_, s.y[i]);
    }
    series_.push_back(std::move(s));
  }

  void add_circle(double cx, double cy, double r, const std::string& color) {
    circles_.push_back({cx, cy, r, color});
    xmin_ = std::min(xmin_, cx - r);
    xmax_ = std::max(xmax_, cx + r);
    ymin_ = std::min(ymin_, cy - r);
    ymax_ = std::max(ymax_, cy + r);
  }

  void render(std::ostream& out, bool legend) const {
    double xmin = xmin_, xmax = xmax_, ymin = ymin_, ymax = ymax_;
    if (!(xmax > xmin)) { xmin -= 1.0; xmax += 1.0; }
    if (!(ymax > ymin)) { ymin -= 1.0; ymax += 1.0; }
    const double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

    const double left = px_ + 52, right = px_ + w_ - 12;
    const double top = py_ + 24, bottom = py_ + h_ - 34;
    const auto sx = [&](double v) {
      return left + (v - xmin) / (xmax - xmin) * (right - left);
    };
    const auto sy = [&](double v) {
      return bottom - (v - ymin) / (ymax - ymin) * (bottom - top);
    };

    out << "<rect x='" << left << "' y='" << top << "' width='" << right - left
        << "' height='" << bottom - top
        << "' fill='white' stroke='#888' stroke-width='1'/>\n";
    out << "<text x='" << (left + right) / 2 << "' y='" << py_ + 14
        << "' text-anchor='middle' font-size='12' font-weight='bold'>" << title_
        << "</text>\n";

    for (int k = 0; k <= 4; ++k) {
      const double xv = xmin + k * (xmax - xmin) / 4.0;
      const double yv = ymin + k * (ymax - ymin) / 4.0;
      out << "<line x1='" << sx(xv) << "' y1='" << bottom << "' x2='" << sx(xv)
          << "' y2='" << bottom + 4 << "' stroke='#444'/>\n";
      out << "<text x='" << sx(xv) << "' y='" << bottom + 15
          << "' text-anchor='middle' font-size='9'>" << format(xv) << "</text>\n";
      out << "<line x1='" << left - 4 << "' y1='" << sy(yv) << "' x2='" << left
          << "' y2='" << sy(yv) << "' stroke='#444'/>\n";
      out << "<text x='" << left - 6 << "' y='" << sy(yv) + 3
          << "' text-anchor='end' font-size='9'>" << format(yv) << "</text>\n";
    }
    out << "<text x='" << (left + right) / 2 << "' y='" << bottom + 28
        << "' text-anchor='middle' font-size='10'>" << xlabel_ << "</text>\n";
    out << "<text x='" << px_ + 12 << "' y='" << (top + bottom) / 2
        << "' text-anchor='middle' font-size='10' transform='rotate(-90 " << px_ + 12
        << " " << (top + bottom) / 2 << ")'>" << ylabel_ << "</text>\n";

    for (const auto& c : circles_) {
      const double rx = std::abs(sx(c.cx + c.r) - sx(c.cx));
      const double ry = std::abs(sy(c.cy + c.r) - sy(c.cy));
      out << "<ellipse cx='" << sx(c.cx) << "' cy='" << sy(c.cy) << "' rx='" << rx
          << "' ry='" << ry << "' fill='" << c.color << "' fill-opacity='0.35' stroke='"
          << c.color << "'/>\n";
    }

    for (const Series& s : series_) {
      out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.4'";
      if (s.dashed) out << " stroke-dasharray='6 4'";
      out << " points='";
      for (size_t i = 0; i < s.x.size(); ++i)
        out << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
      out << "'/>\n";
    }

    if (legend) {
      double ly = top + 12;
      for (const Series& s : series_) {
        if (s.label.empty()) continue;
        out << "<line x1='" << right - 110 << "' y1='" << ly << "' x2='" << right - 86
            << "' y2='" << ly << "' stroke='" << s.color << "' stroke-width='2'";
        if (s.dashed) out << " stroke-dasharray='6 4'";
        out << "/>\n<text x='" << right - 80 << "' y='" << ly + 3
            << "' font-size='10'>" << s.label << "</text>\n";
        ly += 14;
      }
    }
  }

 private:
  struct Circle {
    double cx, cy, r;
    std::string color;
  };

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
  }

  double px_, py_, w_, h_;
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<Circle> circles_;
  double xmin_{std::numeric_limits<double>::max()};
  double xmax_{std::numeric_limits<double>::lowest()};
  double ymin_{std::numeric_limits<double>::max()};
  double ymax_{std::numeric_limits<double>::lowest()};
};

void write_svg(const std::string& path, double width, double height,
               const std::vector<Panel>& panels, bool legend) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write SVG file '" + path + "'");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
      << height << "' font-family='sans-serif'>\n";
  out << "<rect width='100%' height='100%' fill='#fafafa'/>\n";
  for (const Panel& p : panels) p.render(out, legend);
  out << "</svg>\n";
}

// Oblique projection of NED coordinates onto the page; depth is drawn
// upward-positive so shallower is higher.
std::pair<double, double> project(const Vec3& p) {
  return {p.x() + 0.45 * p.y(), -p.z() + 0.30 * p.y()};
}

}  // namespace

void write_trajectory_svg(const SimLog& log, const ScenarioConfig& config,
                          const std::string& path) {
  Panel panel(0, 0, 760, 560, "Trajectories (oblique projection)",
              "x + 0.45 y [m]", "-z + 0.30 y [m]");

  for (size_t o = 0; o < config.obstacles.size(); ++o) {
    // Static footprint at the first logged position.
    if (log.steps.empty()) break;
    const auto [cx, cy] = project(log.steps.front().obstacle_centers[o]);
    panel.add_circle(cx, cy, config.obstacles[o].radius, "#777777");
    if (config.obstacles[o].velocity.norm() > 0.0) {
      Series track;
      track.color = "#e377c2";
      track.label = o == config.obstacles.size() - 1 ? "moving obstacle" : "";
      for (const StepRecord& rec : log.steps) {
        const auto [px, py] = project(rec.obstacle_centers[o]);
        track.x.push_back(px);
        track.y.push_back(py);
      }
      panel.add(std::move(track));
    }
  }

  if (!config.reference.empty() && !log.steps.empty()) {
    Series ref;
    ref.color = "#444444";
    ref.dashed = true;
    ref.label = "reference";
    for (const StepRecord& rec : log.steps) {
      const auto [px, py] = project(config.reference.state_at(rec.t).pose.position);
      ref.x.push_back(px);
      ref.y.push_back(py);
    }
    panel.add(std::move(ref));
  }

  for (int i = 0; i < log.agent_count; ++i) {
    Series s;
    s.color = agent_color(i);
    s.label = "auv" + std::to_string(i + 1);
    for (const StepRecord& rec : log.steps) {
      const auto [px, py] = project(rec.agents[i].state.pose.position);
      s.x.push_back(px);
      s.y.push_back(py);
    }
    panel.add(std::move(s));
  }

  write_svg(path, 760, 560, {panel}, true);
}

void write_tracking_svg(const SimLog& log, const ScenarioConfig& config,
                        const std::string& path) {
  static const char* names[6] = {"x [m]", "y [m]", "z [m]",
                                 "phi [rad]", "theta [rad]", "psi [rad]"};
  std::vector<Panel> panels;
  for (int c = 0; c < 6; ++c) {
    const int row = c / 3, col = c % 3;
    Panel panel(col * 380.0, row * 300.0, 380, 300, names[c], "t [s]", names[c]);
    if (!config.reference.empty()) {
      Series ref;
      ref.color = "#444444";
      ref.dashed = true;
      ref.label = c == 0 ? "reference" : "";
      for (const StepRecord& rec : log.steps) {
        ref.x.push_back(rec.t);
        const RigidBodyState r = config.reference.state_at(rec.t);
        const Vec6 pose = (Vec6() << r.pose.position, r.pose.orientation).finished();
        ref.y.push_back(pose(c));
      }
      panel.add(std::move(ref));
    }
    for (int i = 0; i < log.agent_count; ++i) {
      Series s;
      s.color = agent_color(i);
      s.label = c == 0 ? "auv" + std::to_string(i + 1) : "";
      for (const StepRecord& rec : log.steps) {
        s.x.push_back(rec.t);
        const Vec12 x = rec.agents[i].state.flatten();
        s.y.push_back(x(c));
      }
      panel.add(std::move(s));
    }
    panels.push_back(std::move(panel));
  }
  write_svg(path, 1140, 600, panels, true);
}

void write_controls_svg(const SimLog& log, const ScenarioConfig& config,
                        const std::string& path) {
  (void)config;
  static const char* names[6] = {"tau_x [N]", "tau_y [N]", "tau_z [N]",
                                 "tau_phi [Nm]", "tau_theta [Nm]", "tau_psi [Nm]"};
  std::vector<Panel> panels;
  for (int c = 0; c < 6; ++c) {
    const int row = c / 3, col = c % 3;
    Panel panel(col * 380.0, row * 300.0, 380, 300, names[c], "t [s]", names[c]);
    for (int i = 0; i < log.agent_count; ++i) {
      Series s;
      s.color = agent_color(i);
      s.label = c == 0 ? "auv" + std::to_string(i + 1) : "";
      for (const StepRecord& rec : log.steps) {
        if (rec.terminal) continue;
        s.x.push_back(rec.t);
        s.y.push_back(rec.agents[i].input.flatten()(c));
      }
      panel.add(std::move(s));
    }
    panels.push_back(std::move(panel));
  }
  write_svg(path, 1140, 600, panels, true);
}

}  // namespace auvfleet
