#include "pinstt/svg_plot.hpp"

#include "pinstt/errors.hpp"
#include "pinstt/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pinstt {
namespace {

constexpr double kPanelSize = 420.0;
constexpr double kPad = 40.0;

struct Panel {
    int ax = 0;  // horizontal world axis
    int ay = 1;  // vertical world axis
    double world_min = 0.0;
    double world_max = 1.0;
    double x0 = 0.0;  // pixel origin of the panel

    double px(double wx) const {
        return x0 + kPad + (wx - world_min) / (world_max - world_min) * kPanelSize;
    }
    double py(double wy) const {
        return kPad + (world_max - wy) / (world_max - world_min) * kPanelSize;
    }
    double scale() const { return kPanelSize / (world_max - world_min); }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void circle(std::ostringstream& svg, const Panel& p, double cx, double cy, double r,
            const std::string& style) {
    svg << "<circle cx=\"" << fmt(p.px(cx)) << "\" cy=\"" << fmt(p.py(cy)) << "\" r=\""
        << fmt(r * p.scale()) << "\" " << style << "/>\n";
}

void rect(std::ostringstream& svg, const Panel& p, double lox, double loy, double hix,
          double hiy, const std::string& style) {
    svg << "<rect x=\"" << fmt(p.px(lox)) << "\" y=\"" << fmt(p.py(hiy)) << "\" width=\""
        << fmt((hix - lox) * p.scale()) << "\" height=\"" << fmt((hiy - loy) * p.scale())
        << "\" " << style << "/>\n";
}

void draw_panel(std::ostringstream& svg, const Panel& p, const TrasScenario& scen,
                const std::vector<Vector>& outputs, const TubeNet* net) {
    svg << "<text x=\"" << fmt(p.x0 + kPad) << "\" y=\"" << fmt(kPad - 10.0)
        << "\" font-family=\"sans-serif\" font-size=\"14\">axes " << p.ax << "-" << p.ay
        << "</text>\n";
    circle(svg, p, scen.space.center[p.ax], scen.space.center[p.ay], scen.space.radius,
           "fill=\"none\" stroke=\"#999\" stroke-dasharray=\"6 4\"");

    const double t_c = scen.prescribed_time;
    for (int snap = 0; snap <= 4; ++snap) {
        const double t = t_c * snap / 4.0;
        const double opacity = 0.15 + 0.15 * snap;
        for (const Obstacle& obs : scen.obstacles) {
            const Vector offset = obstacle_offset(obs, t);
            const std::string style = "fill=\"#c0392b\" fill-opacity=\"" + fmt(opacity) + "\"";
            if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
                circle(svg, p, ball->center[p.ax] + offset[p.ax],
                       ball->center[p.ay] + offset[p.ay], ball->radius, style);
            } else {
                const auto& box = std::get<BoxShape>(obs.shape);
                rect(svg, p, box.lo[p.ax] + offset[p.ax], box.lo[p.ay] + offset[p.ay],
                     box.hi[p.ax] + offset[p.ax], box.hi[p.ay] + offset[p.ay], style);
            }
        }
    }

    if (net) {
        for (int k = 0; k <= 20; ++k) {
            const TubeEval eval = forward(*net, t_c * k / 20.0);
            if (eval.radius > 0.0) {
                circle(svg, p, eval.center[p.ax], eval.center[p.ay], eval.radius,
                       "fill=\"none\" stroke=\"#2980b9\" stroke-opacity=\"0.5\"");
            }
        }
    }

    circle(svg, p, scen.start.center[p.ax], scen.start.center[p.ay], scen.start.radius,
           "fill=\"none\" stroke=\"#27ae60\" stroke-width=\"2\"");
    circle(svg, p, scen.target.center[p.ax], scen.target.center[p.ay], scen.target.radius,
           "fill=\"none\" stroke=\"#e67e22\" stroke-width=\"2\"");

    if (!outputs.empty()) {
        svg << "<polyline fill=\"none\" stroke=\"#111\" stroke-width=\"1.5\" points=\"";
        for (const Vector& y : outputs) {
            svg << fmt(p.px(y[p.ax])) << "," << fmt(p.py(y[p.ay])) << " ";
        }
        svg << "\"/>\n";
    }
}

}  // namespace

std::string render_plot_svg(const TrasScenario& scen, const std::vector<Vector>& outputs,
                            const TubeNet* net) {
    if (scen.dimension != 2 && scen.dimension != 3) {
        throw InvariantError("plotting supports 2-D and 3-D scenarios only");
    }
    std::vector<std::pair<int, int>> axis_pairs;
    if (scen.dimension == 2) {
        axis_pairs = {{0, 1}};
    } else {
        axis_pairs = {{0, 1}, {0, 2}, {1, 2}};
    }

    const double world_min = (scen.space.center.array() - scen.space.radius).minCoeff();
    const double world_max = (scen.space.center.array() + scen.space.radius).maxCoeff();
    const double width = axis_pairs.size() * (kPanelSize + kPad) + kPad;
    const double height = kPanelSize + 2.0 * kPad;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
        << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << " "
        << fmt(height) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < axis_pairs.size(); ++i) {
        Panel panel;
        panel.ax = axis_pairs[i].first;
        panel.ay = axis_pairs[i].second;
        panel.world_min = world_min;
        panel.world_max = world_max;
        panel.x0 = i * (kPanelSize + kPad);
        draw_panel(svg, panel, scen, outputs, net);
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<Vector> read_trajectory_outputs(const std::filesystem::path& path, int dimension) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("trajectory file is empty: " + path.string());
    }
    if (line.rfind("t,x_1_1", 0) != 0) {
        throw FormatError("trajectory file has an unexpected header: " + path.string());
    }
    std::vector<Vector> outputs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) {
            throw FormatError("trajectory row missing the time column");
        }
        Vector y(dimension);
        for (int j = 0; j < dimension; ++j) {
            if (!std::getline(row, cell, ',')) {
                throw FormatError("trajectory row has too few columns");
            }
            try {
                y[j] = std::stod(cell);
            } catch (const std::exception&) {
                throw FormatError("trajectory cell is not a number: " + cell);
            }
        }
        outputs.push_back(std::move(y));
    }
    return outputs;
}

}  // namespace pinstt
