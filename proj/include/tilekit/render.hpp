#pragma once

#include <iosfwd>

#include "tilekit/gifs.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

struct UnsupportedDimensionError : std::runtime_error {
    explicit UnsupportedDimensionError(const std::string& w) : std::runtime_error(w) {}
};

// Deterministic SVG: d=1 windows as a bar strip, d=2 as filled outlines
// (label-colored, disconnected supports drawn per primitive or raster run).
// Vector output refuses d > 2.
void render_window_svg(std::ostream& os, const TilingWindow& win);
void render_solution_svg(std::ostream& os, const std::vector<Region>& prototiles);

// d >= 3 fallback: an axis-aligned mid-slice of the raster as ASCII PGM.
void write_pgm_slice(std::ostream& os, const Region& r, int axis, double coordinate);

}  // namespace tilekit
