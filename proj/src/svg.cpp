#include "cmrp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace cmrp::svg {

namespace {

std::string num(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", v);
    return buffer;
}

}  // namespace

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                    double stroke_width) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
             num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) +
             "\"/>\n";
}

void Document::polyline(const std::vector<std::pair<double, double>>& points,
                        const std::string& stroke, double stroke_width) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             num(stroke_width) + "\" points=\"";
    for (const auto& [x, y] : points) body_ += num(x) + "," + num(y) + " ";
    body_ += "\"/>\n";
}

void Document::circle(double cx, double cy, double r, const std::string& fill,
                      const std::string& stroke) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" +
             fill + "\"";
    if (!stroke.empty()) body_ += " stroke=\"" + stroke + "\"";
    body_ += "/>\n";
}

void Document::rect(double x, double y, double w, double h, const std::string& fill,
                    const std::string& stroke) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" +
             num(h) + "\" fill=\"" + fill + "\"";
    if (!stroke.empty()) body_ += " stroke=\"" + stroke + "\"";
    body_ += "/>\n";
}

void Document::polygon(const std::vector<std::pair<double, double>>& points,
                       const std::string& fill) {
    body_ += "<polygon fill=\"" + fill + "\" points=\"";
    for (const auto& [x, y] : points) body_ += num(x) + "," + num(y) + " ";
    body_ += "\"/>\n";
}

void Document::text(double x, double y, const std::string& content, double size,
                    const std::string& anchor, const std::string& fill) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\" fill=\"" + fill +
             "\">" + content + "</text>\n";
}

std::string Document::str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" "
           "width=\"" +
           num(width_) + "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " +
           num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n" + body_ +
           "</svg>\n";
}

void Document::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write SVG: " + path);
    out << str();
    if (!out) throw std::runtime_error("write failed: " + path);
}

const std::vector<std::string>& agent_palette() {
    static const std::vector<std::string> palette = {"#d62728", "#e8a000", "#2ca02c",
                                                     "#1f77b4", "#9467bd", "#8c564b"};
    return palette;
}

namespace {

constexpr double kPanel = 170.0;
constexpr double kMargin = 14.0;
constexpr double kLabelBand = 22.0;

struct Frame {
    double x0, y0, scale;
};

// Maps scenario coordinates into a panel, preserving aspect ratio.
Frame fit_frame(const Scenario& scenario, double px, double py) {
    double lo_x = scenario.depot.x, hi_x = scenario.depot.x;
    double lo_y = scenario.depot.y, hi_y = scenario.depot.y;
    auto grow = [&](const Point2D& p) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    };
    for (const Point2D& s : scenario.starts) grow(s);
    for (const Task& t : scenario.tasks) grow(t.location);
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    const double inner = kPanel - 2.0 * kMargin;
    Frame frame;
    frame.scale = inner / span;
    frame.x0 = px + kMargin - lo_x * frame.scale;
    frame.y0 = py + kMargin - lo_y * frame.scale;
    return frame;
}

std::pair<double, double> map_point(const Frame& frame, const Point2D& p) {
    return {frame.x0 + p.x * frame.scale, frame.y0 + p.y * frame.scale};
}

void draw_panel(Document& doc, const Scenario& scenario, const Plan& plan, double px, double py) {
    doc.rect(px, py, kPanel, kPanel, "#ffffff", "#cccccc");
    const Frame frame = fit_frame(scenario, px, py);
    const std::vector<SubTask> subtasks = discretize(scenario.tasks, scenario.discretization);

    for (int k = 0; k < scenario.agent_count(); ++k) {
        std::vector<std::pair<double, double>> points;
        points.push_back(map_point(frame, scenario.starts[k]));
        for (int s : plan.routes[k]) points.push_back(map_point(frame, subtasks[s].location));
        points.push_back(map_point(frame, scenario.depot));
        doc.polyline(points, agent_palette()[k % agent_palette().size()]);
    }

    double max_t = 0.0;
    for (const Task& t : scenario.tasks) max_t = std::max(max_t, t.time_cost);
    for (const Task& t : scenario.tasks) {
        const auto [cx, cy] = map_point(frame, t.location);
        const double r = max_t > 0.0 ? 2.5 + 4.5 * t.time_cost / max_t : 3.0;
        doc.circle(cx, cy, r, "#000000");
    }
    for (const Point2D& start : scenario.starts) {
        const auto [cx, cy] = map_point(frame, start);
        doc.polygon({{cx, cy - 5.0}, {cx - 4.5, cy + 3.5}, {cx + 4.5, cy + 3.5}}, "#000000");
    }
    const auto [dx, dy] = map_point(frame, scenario.depot);
    doc.rect(dx - 4.0, dy - 4.0, 8.0, 8.0, "#000000");
}

}  // namespace

void plot_tours_grid(const std::vector<TourRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("no rows to plot");
    std::size_t columns = 0;
    for (const TourRow& row : rows) columns = std::max(columns, row.plans.size());
    if (columns == 0) throw std::invalid_argument("no plans to plot");

    const double row_label_w = 120.0;
    const double width = row_label_w + static_cast<double>(columns) * kPanel;
    const double height = kLabelBand + static_cast<double>(rows.size()) * kPanel;
    Document doc(width, height);

    for (std::size_t c = 0; c < rows.front().plans.size(); ++c) {
        doc.text(row_label_w + (static_cast<double>(c) + 0.5) * kPanel, kLabelBand - 7.0,
                 rows.front().plans[c].first, 12.0, "middle");
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const TourRow& row = rows[r];
        const double py = kLabelBand + static_cast<double>(r) * kPanel;
        doc.text(10.0, py + kPanel / 2.0, row.label, 12.0);
        for (std::size_t c = 0; c < row.plans.size(); ++c) {
            const ValidationReport report = validate_plan(row.scenario, row.plans[c].second);
            if (!report.ok()) {
                throw std::invalid_argument("cannot plot infeasible plan: " + report.message);
            }
            draw_panel(doc, row.scenario, row.plans[c].second,
                       row_label_w + static_cast<double>(c) * kPanel, py);
        }
    }
    doc.save(path);
}

void plot_tours(const Scenario& scenario,
                const std::vector<std::pair<std::string, Plan>>& plans, const std::string& path) {
    plot_tours_grid({TourRow{"", scenario, plans}}, path);
}

void line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                const std::vector<Series>& series, const std::string& y_label,
                const std::string& path) {
    if (x_labels.empty() || series.empty()) throw std::invalid_argument("empty chart");
    const double width = 640.0, height = 400.0;
    const double left = 70.0, right = 170.0, top = 40.0, bottom = 50.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double lo = 0.0, hi = -std::numeric_limits<double>::infinity();
    for (const Series& s : series) {
        for (double v : s.values) hi = std::max(hi, v);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    hi *= 1.05;

    Document doc(width, height);
    doc.text(width / 2.0, 22.0, title, 14.0, "middle");
    doc.line(left, top, left, top + plot_h, "#000000");
    doc.line(left, top + plot_h, left + plot_w, top + plot_h, "#000000");
    doc.text(16.0, top - 10.0, y_label, 11.0);

    for (int tick = 0; tick <= 4; ++tick) {
        const double v = lo + (hi - lo) * tick / 4.0;
        const double y = top + plot_h - plot_h * tick / 4.0;
        doc.line(left - 4.0, y, left, y, "#000000");
        char label[32];
        std::snprintf(label, sizeof(label), "%.3g", v);
        doc.text(left - 8.0, y + 4.0, label, 10.0, "end");
    }
    const double step = x_labels.size() > 1 ? plot_w / static_cast<double>(x_labels.size() - 1)
                                            : plot_w;
    for (std::size_t i = 0; i < x_labels.size(); ++i) {
        const double x = x_labels.size() > 1 ? left + step * static_cast<double>(i)
                                             : left + plot_w / 2.0;
        doc.text(x, top + plot_h + 16.0, x_labels[i], 9.0, "middle");
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const std::string& color = agent_palette()[si % agent_palette().size()];
        std::vector<std::pair<double, double>> points;
        for (std::size_t i = 0; i < series[si].values.size() && i < x_labels.size(); ++i) {
            const double x = x_labels.size() > 1 ? left + step * static_cast<double>(i)
                                                 : left + plot_w / 2.0;
            const double v = std::clamp(series[si].values[i], lo, hi);
            points.emplace_back(x, top + plot_h - (v - lo) / (hi - lo) * plot_h);
        }
        doc.polyline(points, color, 2.0);
        for (const auto& [x, y] : points) doc.circle(x, y, 2.5, color);
        doc.text(left + plot_w + 10.0, top + 14.0 * static_cast<double>(si + 1), series[si].name,
                 10.0, "start", color);
    }
    doc.save(path);
}

}  // namespace cmrp::svg
