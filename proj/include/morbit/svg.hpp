#pragma once

// Hand-emitted SVG polyline drawings; no timestamps or metadata, so output
// is byte-stable for fixed input.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "morbit/model.hpp"

namespace morbit {

class SvgPlot {
  public:
    SvgPlot(double xmin, double xmax, double ymin, double ymax,
            int width = 640, int height = 640)
        : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax),
          w_(width), h_(height) {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                 std::to_string(w_) + "\" height=\"" + std::to_string(h_) +
                 "\" viewBox=\"0 0 " + std::to_string(w_) + " " +
                 std::to_string(h_) + "\">\n";
        body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void polyline(const std::vector<Vec2>& pts, const std::string& color,
                  double stroke = 1.5) {
        if (pts.empty()) return;
        body_ += "<polyline fill=\"none\" stroke=\"" + color +
                 "\" stroke-width=\"" + fmt(stroke) + "\" points=\"";
        for (const auto& p : pts) body_ += fmt(px(p.x)) + "," + fmt(py(p.y)) + " ";
        body_ += "\"/>\n";
    }

    void circle(const Vec2& c, double r_world, const std::string& color,
                bool filled = false, double stroke = 1.0) {
        const double rpx = r_world / (xmax_ - xmin_) * w_;
        body_ += "<circle cx=\"" + fmt(px(c.x)) + "\" cy=\"" + fmt(py(c.y)) +
                 "\" r=\"" + fmt(rpx) + "\" stroke=\"" + color + "\" fill=\"" +
                 (filled ? color : std::string("none")) + "\" stroke-width=\"" +
                 fmt(stroke) + "\"/>\n";
    }

    void line(const Vec2& a, const Vec2& b, const std::string& color,
              double stroke = 1.0) {
        body_ += "<line x1=\"" + fmt(px(a.x)) + "\" y1=\"" + fmt(py(a.y)) +
                 "\" x2=\"" + fmt(px(b.x)) + "\" y2=\"" + fmt(py(b.y)) +
                 "\" stroke=\"" + color + "\" stroke-width=\"" + fmt(stroke) +
                 "\"/>\n";
    }

    void text(const Vec2& at, const std::string& s, int size = 12) {
        body_ += "<text x=\"" + fmt(px(at.x)) + "\" y=\"" + fmt(py(at.y)) +
                 "\" font-size=\"" + std::to_string(size) +
                 "\" font-family=\"sans-serif\">" + s + "</text>\n";
    }

    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("svg: cannot open " + path);
        f << body_ << "</svg>\n";
    }

  private:
    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return buf;
    }
    double px(double x) const { return (x - xmin_) / (xmax_ - xmin_) * w_; }
    double py(double y) const { return h_ - (y - ymin_) / (ymax_ - ymin_) * h_; }

    double xmin_, xmax_, ymin_, ymax_;
    int w_, h_;
    std::string body_;
};

}  // namespace morbit
