#pragma once

#include "socsim/contentment.hpp"
#include "socsim/grid.hpp"

#include <string>

namespace socsim {

struct SvgOptions {
    int width = 760;
    int height = 480;
    int levels = 12;            // filled contour bands
    const RateField* rates = nullptr; // optional flow arrows
    int arrow_stride_m = 10;    // arrow subsampling in cells
    int arrow_stride_c = 10;
    std::string title;
};

// Filled contour rendering of P over (M, C), deterministic byte-for-byte for
// a fixed input.  Throws if the field is identically zero.
std::string render_contour_svg(const PdfField& field, const SvgOptions& opts);

void write_svg(const PdfField& field, const SvgOptions& opts, const std::string& path);

} // namespace socsim
