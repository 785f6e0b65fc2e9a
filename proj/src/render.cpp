#include "tilekit/render.hpp"

#include <cmath>
#include <ostream>

namespace tilekit {

namespace {

// stable label color: hash into evenly spread hues
std::string label_color(int label, const std::string& name) {
    std::uint64_t h = fnv1a(name) ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(label + 1));
    int hue = static_cast<int>(h % 360);
    int sat = 55 + static_cast<int>((h >> 16) % 30);
    int light = 55 + static_cast<int>((h >> 32) % 20);
    char buf[48];
    std::snprintf(buf, sizeof buf, "hsl(%d,%d%%,%d%%)", hue, sat, light);
    return buf;
}

void svg_header(std::ostream& os, double x0, double y0, double w, double h) {
    os.precision(10);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << " " << y0 << " " << w
       << " " << h << "\">\n";
}

void rect(std::ostream& os, double x, double y, double w, double h, const std::string& fill) {
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
       << "\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"" << std::min(w, h) * 0.02
       << "\"/>\n";
}

void render_region_2d(std::ostream& os, const Region& r, const Vec& pos, const std::string& fill) {
    if (r.has_exact()) {
        for (const Primitive& p : r.exact) {
            if (p.kind == Primitive::Kind::AABox) {
                rect(os, p.data[0] + pos[0], p.data[1] + pos[1], p.data[2] - p.data[0],
                     p.data[3] - p.data[1], fill);
            } else if (p.kind == Primitive::Kind::ConvexPoly) {
                os << "<polygon points=\"";
                for (std::size_t v = 0; v + 1 < p.data.size(); v += 2)
                    os << p.data[v] + pos[0] << "," << p.data[v + 1] + pos[1] << " ";
                os << "\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"0.01\"/>\n";
            }
        }
        return;
    }
    // raster: merge horizontal runs into rects
    const Raster& g = r.raster;
    for (std::int64_t j = g.lo[1]; j < g.lo[1] + g.n[1]; ++j) {
        std::int64_t i = g.lo[0];
        while (i < g.lo[0] + g.n[0]) {
            if (!g.at(i, j, 0)) {
                ++i;
                continue;
            }
            std::int64_t run = i;
            while (run < g.lo[0] + g.n[0] && g.at(run, j, 0)) ++run;
            rect(os, static_cast<double>(i) * g.h + pos[0], static_cast<double>(j) * g.h + pos[1],
                 static_cast<double>(run - i) * g.h, g.h, fill);
            i = run;
        }
    }
}

}  // namespace

void render_window_svg(std::ostream& os, const TilingWindow& win) {
    if (win.tile_count() == 0) throw EmptyRegionError();
    if (win.dim > 2) throw UnsupportedDimensionError("vector output supports d <= 2");
    Box bb = win.tile_bbox(0);
    for (int i = 1; i < win.tile_count(); ++i) bb = box_union(bb, win.tile_bbox(i));
    if (win.dim == 1) {
        double span = bb.hi[0] - bb.lo[0];
        double bar = std::max(span * 0.04, 0.5);
        svg_header(os, bb.lo[0], 0, span, bar);
        for (int i = 0; i < win.tile_count(); ++i) {
            const PlacedTile& t = win.tile(i);
            Box b = win.tile_bbox(i);
            rect(os, b.lo[0], 0, b.hi[0] - b.lo[0], bar,
                 label_color(t.label, win.prototiles[static_cast<std::size_t>(t.label)].name));
        }
        os << "</svg>\n";
        return;
    }
    svg_header(os, bb.lo[0], bb.lo[1], bb.hi[0] - bb.lo[0], bb.hi[1] - bb.lo[1]);
    for (int i = 0; i < win.tile_count(); ++i) {
        const PlacedTile& t = win.tile(i);
        render_region_2d(os, win.prototiles[static_cast<std::size_t>(t.label)].shape, t.pos,
                         label_color(t.label, win.prototiles[static_cast<std::size_t>(t.label)].name));
    }
    os << "</svg>\n";
}

void render_solution_svg(std::ostream& os, const std::vector<Region>& prototiles) {
    if (prototiles.empty()) throw EmptyRegionError();
    int dim = prototiles[0].dim;
    if (dim > 2) throw UnsupportedDimensionError("vector output supports d <= 2");
    // lay the prototiles side by side with a gap
    double gap = 0;
    for (const Region& r : prototiles) {
        if (r.empty()) throw EmptyRegionError();
        Box b = r.bbox();
        gap = std::max(gap, b.hi[0] - b.lo[0]);
    }
    gap *= 1.2;
    double height = 1;
    for (const Region& r : prototiles) {
        Box b = r.bbox();
        height = std::max(height, dim == 1 ? 0.5 : b.hi[1] - b.lo[1]);
    }
    svg_header(os, 0, 0, gap * static_cast<double>(prototiles.size()), height * 1.2);
    for (std::size_t i = 0; i < prototiles.size(); ++i) {
        const Region& r = prototiles[i];
        Vec off(dim);
        off.c[0] = gap * static_cast<double>(i) - r.bbox().lo[0];
        std::string fill = label_color(static_cast<int>(i), "F" + std::to_string(i));
        if (dim == 1) {
            Box b = r.bbox();
            rect(os, b.lo[0] + off[0], 0.2, b.hi[0] - b.lo[0], 0.4, fill);
        } else {
            off.c[1] = 0.1 - r.bbox().lo[1];
            render_region_2d(os, r, off, fill);
        }
    }
    os << "</svg>\n";
}

void write_pgm_slice(std::ostream& os, const Region& r, int axis, double coordinate) {
    Region src = r;
    src.ensure_raster();
    const Raster& g = src.raster;
    if (src.dim < 2) throw UnsupportedDimensionError("pgm slices need d >= 2");
    std::int64_t fix = static_cast<std::int64_t>(std::floor(coordinate / g.h));
    int a0 = -1, a1 = -1;
    for (int a = 0; a < src.dim; ++a) {
        if (a == axis) continue;
        (a0 < 0 ? a0 : a1) = a;
    }
    if (a1 < 0) a1 = 2;
    std::int64_t n0 = g.n[a0], n1 = src.dim > 2 ? g.n[a1] : 1;
    os << "P2\n" << n0 << " " << (src.dim > 2 ? n1 : g.n[1]) << "\n1\n";
    if (src.dim == 2) {
        // axis selects row/column direction; slice through `coordinate`
        for (std::int64_t j = g.lo[1]; j < g.lo[1] + g.n[1]; ++j) {
            for (std::int64_t i = g.lo[0]; i < g.lo[0] + g.n[0]; ++i)
                os << (g.at(i, j, 0) ? 1 : 0) << " ";
            os << "\n";
        }
        return;
    }
    for (std::int64_t b = g.lo[a1]; b < g.lo[a1] + g.n[a1]; ++b) {
        for (std::int64_t a = g.lo[a0]; a < g.lo[a0] + g.n[a0]; ++a) {
            std::int64_t c[3];
            c[axis] = fix;
            c[a0] = a;
            c[a1] = b;
            os << (g.at(c[0], c[1], c[2]) ? 1 : 0) << " ";
        }
        os << "\n";
    }
}

}  // namespace tilekit
