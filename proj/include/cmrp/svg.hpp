#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cmrp/plan.hpp"
#include "cmrp/scenario.hpp"

namespace cmrp::svg {

// Tiny SVG writer with fixed numeric formatting so output bytes are a pure
// function of the input.
class Document {
public:
    Document(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0);
    void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                  double stroke_width = 1.5);
    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& stroke = "");
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "");
    void polygon(const std::vector<std::pair<double, double>>& points, const std::string& fill);
    void text(double x, double y, const std::string& content, double size = 11.0,
              const std::string& anchor = "start", const std::string& fill = "#000000");

    std::string str() const;
    void save(const std::string& path) const;

private:
    double width_, height_;
    std::string body_;
};

// Agent colors, cycled; the first three match the usual red/amber/green tour
// rendering.
const std::vector<std::string>& agent_palette();

struct TourRow {
    std::string label;
    Scenario scenario;
    std::vector<std::pair<std::string, Plan>> plans;  // column label -> plan
};

// One panel per (row, solver): depot drawn as a square, starts as triangles,
// tasks as circles scaled by time cost, one polyline per agent route.
void plot_tours_grid(const std::vector<TourRow>& rows, const std::string& path);

void plot_tours(const Scenario& scenario,
                const std::vector<std::pair<std::string, Plan>>& plans, const std::string& path);

struct Series {
    std::string name;
    std::vector<double> values;  // one per x label
};

void line_chart(const std::string& title, const std::vector<std::string>& x_labels,
                const std::vector<Series>& series, const std::string& y_label,
                const std::string& path);

}  // namespace cmrp::svg
