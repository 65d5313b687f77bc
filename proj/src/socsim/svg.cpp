#include "socsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace socsim {

namespace {

// viridis anchors, interpolated linearly
const double kMap[9][3] = {
    {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
    {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
    {0.135, 0.659, 0.518}, {0.267, 0.749, 0.441}, {0.993, 0.906, 0.144}};

std::string band_color(int band, int levels) {
    const double u = levels > 1 ? static_cast<double>(band) / (levels - 1) : 0.0;
    const double x = u * 8.0;
    const int k = std::min(static_cast<int>(x), 7);
    const double f = x - k;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(255.0 * (kMap[k][0] + f * (kMap[k + 1][0] - kMap[k][0])))),
                  static_cast<int>(std::lround(255.0 * (kMap[k][1] + f * (kMap[k + 1][1] - kMap[k][1])))),
                  static_cast<int>(std::lround(255.0 * (kMap[k][2] + f * (kMap[k + 1][2] - kMap[k][2])))));
    return buf;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

std::string render_contour_svg(const PdfField& field, const SvgOptions& opts) {
    const Grid& g = field.grid;
    if (g.n_m < 2 || g.n_c < 2)
        throw std::domain_error("svg: need at least a 2x2 grid");
    const double peak = *std::max_element(field.values.begin(), field.values.end());
    if (!(peak > 0.0)) throw std::runtime_error("svg: empty field, max P = 0");

    const double margin_l = 56.0, margin_b = 40.0, margin_t = 28.0, margin_r = 14.0;
    const double pw = opts.width - margin_l - margin_r;
    const double ph = opts.height - margin_t - margin_b;
    auto px = [&](double m) { return margin_l + pw * m / g.m_max; };
    auto py = [&](double c) { return margin_t + ph * (1.0 - c); };

    std::string s;
    s.reserve(1 << 20);
    char line[256];
    std::snprintf(line, sizeof(line),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  opts.width, opts.height, opts.width, opts.height);
    s += line;
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // one rect per run of same-band cells along C to keep the file compact
    const int levels = std::max(opts.levels, 2);
    for (int i = 0; i < g.n_m; ++i) {
        int j = 0;
        while (j < g.n_c) {
            const double v = field.at(i, j);
            const int band = std::min(static_cast<int>(v / peak * levels), levels - 1);
            int j2 = j + 1;
            while (j2 < g.n_c &&
                   std::min(static_cast<int>(field.at(i, j2) / peak * levels), levels - 1) == band)
                ++j2;
            const double x = px(i * g.dm), y = py(j2 * g.dc);
            std::snprintf(line, sizeof(line),
                          "<rect x=\"%s\" y=\"%s\" width=\"%s\" height=\"%s\" fill=\"%s\"/>\n",
                          num(x).c_str(), num(y).c_str(), num(pw * g.dm / g.m_max).c_str(),
                          num(ph * (j2 - j) * g.dc).c_str(), band_color(band, levels).c_str());
            s += line;
            j = j2;
        }
    }

    if (opts.rates && opts.rates->grid.same_layout(g)) {
        double umax = 1e-300;
        for (int id = 0; id < g.size(); ++id) {
            const double u = std::hypot(opts.rates->u_m[id] / g.m_max, opts.rates->u_c[id]);
            umax = std::max(umax, u);
        }
        const double alen = 0.9 * std::min(pw * opts.arrow_stride_m / g.n_m,
                                           ph * opts.arrow_stride_c / g.n_c);
        for (int i = opts.arrow_stride_m / 2; i < g.n_m; i += opts.arrow_stride_m) {
            for (int j = opts.arrow_stride_c / 2; j < g.n_c; j += opts.arrow_stride_c) {
                const int id = g.index(i, j);
                const double um = opts.rates->u_m[id] / g.m_max;
                const double uc = opts.rates->u_c[id];
                const double mag = std::hypot(um, uc);
                if (mag < 1e-12 * umax) continue;
                const double scale = alen / umax;
                const double x0 = px(g.m_centers[i]), y0 = py(g.c_centers[j]);
                const double x1 = x0 + um * scale;
                const double y1 = y0 - uc * scale;
                std::snprintf(line, sizeof(line),
                              "<line x1=\"%s\" y1=\"%s\" x2=\"%s\" y2=\"%s\" "
                              "stroke=\"#d94040\" stroke-width=\"1\"/>\n",
                              num(x0).c_str(), num(y0).c_str(), num(x1).c_str(),
                              num(y1).c_str());
                s += line;
                std::snprintf(line, sizeof(line),
                              "<circle cx=\"%s\" cy=\"%s\" r=\"1.2\" fill=\"#d94040\"/>\n",
                              num(x1).c_str(), num(y1).c_str());
                s += line;
            }
        }
    }

    // axes
    std::snprintf(line, sizeof(line),
                  "<rect x=\"%s\" y=\"%s\" width=\"%s\" height=\"%s\" fill=\"none\" "
                  "stroke=\"black\"/>\n",
                  num(margin_l).c_str(), num(margin_t).c_str(), num(pw).c_str(),
                  num(ph).c_str());
    s += line;
    for (int k = 0; k <= 4; ++k) {
        const double m = g.m_max * k / 4.0;
        std::snprintf(line, sizeof(line),
                      "<text x=\"%s\" y=\"%s\" font-size=\"11\" text-anchor=\"middle\">%g</text>\n",
                      num(px(m)).c_str(), num(margin_t + ph + 16).c_str(), m);
        s += line;
        const double c = k / 4.0;
        std::snprintf(line, sizeof(line),
                      "<text x=\"%s\" y=\"%s\" font-size=\"11\" text-anchor=\"end\">%g</text>\n",
                      num(margin_l - 6).c_str(), num(py(c) + 4).c_str(), c);
        s += line;
    }
    std::snprintf(line, sizeof(line),
                  "<text x=\"%s\" y=\"%s\" font-size=\"12\" text-anchor=\"middle\">M</text>\n",
                  num(margin_l + pw / 2).c_str(), num(margin_t + ph + 32).c_str());
    s += line;
    std::snprintf(line, sizeof(line),
                  "<text x=\"14\" y=\"%s\" font-size=\"12\">C</text>\n",
                  num(margin_t + ph / 2).c_str());
    s += line;
    if (!opts.title.empty()) {
        std::snprintf(line, sizeof(line),
                      "<text x=\"%s\" y=\"18\" font-size=\"13\" text-anchor=\"middle\">%s</text>\n",
                      num(margin_l + pw / 2).c_str(), opts.title.c_str());
        s += line;
    }
    s += "</svg>\n";
    return s;
}

void write_svg(const PdfField& field, const SvgOptions& opts, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << render_contour_svg(field, opts);
}

} // namespace socsim
