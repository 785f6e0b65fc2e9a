#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "tilekit/geom.hpp"

namespace tilekit {

// Axis-aligned bounding box.
struct Box {
    Vec lo, hi;
    int dim() const { return lo.dim; }
    bool contains(const Vec& p, double tol = 0.0) const {
        for (int i = 0; i < lo.dim; ++i)
            if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
        return true;
    }
    Vec size() const { return hi - lo; }
    double diameter() const { return dist(lo, hi); }
};

inline Box box_union(const Box& a, const Box& b) {
    Box r = a;
    for (int i = 0; i < a.lo.dim; ++i) {
        r.lo.c[i] = std::min(a.lo[i], b.lo[i]);
        r.hi.c[i] = std::max(a.hi[i], b.hi[i]);
    }
    return r;
}

// Exact geometry primitive: a 1-D interval, an axis-aligned box, or a convex
// polygon (2-D, CCW vertex list). Unions of primitives describe non-convex
// supports such as polyominoes.
struct Primitive {
    enum class Kind { Interval, AABox, ConvexPoly };
    Kind kind = Kind::Interval;
    std::vector<double> data;  // Interval: a b; AABox: lo..,hi..; Poly: x0 y0 x1 y1 ..

    static Primitive interval(double a, double b);
    static Primitive box(const Vec& lo, const Vec& hi);
    static Primitive poly(const std::vector<Vec>& verts);

    int vertex_count(int dim) const;
    Box bbox(int dim) const;
    std::vector<Vec> vertices(int dim) const;
    bool contains(const Vec& p, double tol) const;
    // Distance from p to the primitive's topological boundary (0 on it).
    double boundary_distance(const Vec& p, int dim) const;
    Primitive translated(int dim, const Vec& g) const;
    // Image under an invertible linear map; boxes become polygons when the
    // map is not axis-preserving (only d<=2 supports general maps exactly).
    Primitive mapped(int dim, const Mat& m) const;
};

// Occupancy grid on the global lattice h*Z^d. Cell (i,j,k) covers
// [i*h,(i+1)*h) x ...; a cell is occupied iff its center lies in the region.
struct Raster {
    int dim = 1;
    double h = 1.0;
    std::array<std::int64_t, kMaxDim> lo{0, 0, 0};  // first cell, global coords
    std::array<std::int64_t, kMaxDim> n{0, 1, 1};   // cell counts (1 beyond dim)
    std::vector<std::uint8_t> occ;

    std::int64_t cell_count() const { return n[0] * n[1] * n[2]; }
    std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return (i - lo[0]) + n[0] * ((j - lo[1]) + n[1] * (k - lo[2]));
    }
    bool in_range(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return i >= lo[0] && i < lo[0] + n[0] && j >= lo[1] && j < lo[1] + n[1] && k >= lo[2] &&
               k < lo[2] + n[2];
    }
    bool at(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return in_range(i, j, k) && occ[index(i, j, k)] != 0;
    }
    void set(std::int64_t i, std::int64_t j, std::int64_t k, bool v) {
        occ[index(i, j, k)] = v ? 1 : 0;
    }
    Vec center(std::int64_t i, std::int64_t j, std::int64_t k) const {
        Vec p(dim);
        std::int64_t c[3] = {i, j, k};
        for (int t = 0; t < dim; ++t) p.c[t] = (static_cast<double>(c[t]) + 0.5) * h;
        return p;
    }
    bool contains_point(const Vec& p) const {
        std::int64_t c[3] = {0, 0, 0};
        for (int t = 0; t < dim; ++t) c[t] = static_cast<std::int64_t>(std::floor(p[t] / h));
        return at(c[0], c[1], c[2]);
    }
    std::int64_t popcount() const;
    bool empty() const { return popcount() == 0; }
    // Tight bounding box of occupied cells (cell extents, not centers).
    Box tight_bbox() const;
    Raster cropped() const;  // shrink to tight occupied range (plus nothing)
};

// Exact Euclidean distance transform (two-pass lower-envelope scan per axis).
// Returns squared distances, in length units, from each cell center to the
// nearest center of a marked cell; unmarked grids yield +inf everywhere.
std::vector<double> edt_squared(const Raster& r, bool to_complement);

// A compact region of R^d with dual exact/raster representations.
struct Region {
    int dim = 1;
    double h = 0.01;
    std::vector<Primitive> exact;  // empty => raster-only
    bool has_raster = false;
    Raster raster;

    bool has_exact() const { return !exact.empty(); }

    // cached distance fields for raster-only point queries (built lazily,
    // shared across copies)
    struct DistanceField {
        Raster grid;                  // padded reference grid
        std::vector<double> to_support2;
        std::vector<double> to_complement2;
    };
    mutable std::shared_ptr<const DistanceField> dist_cache;
    const DistanceField& distance_field() const;

    // 0 inside the region, else the distance to it (raster path accurate to
    // one cell diagonal)
    double support_distance(const Vec& p) const;

    static Region from_primitives(int dim, std::vector<Primitive> prims, double h);
    static Region from_raster(Raster r);

    void ensure_raster();
    bool empty() const;
    Box bbox() const;
    double volume() const;  // cell count * h^d
    bool contains(const Vec& p, double tol = 0.0) const;
    // Distance from p to the union of primitive boundaries (exact rep) or to
    // the raster boundary cells. Interior seams of a primitive union count as
    // boundary, which only makes clearance estimates conservative.
    double boundary_distance(const Vec& p) const;
    Region translated(const Vec& g) const;
    Region mapped(const Mat& m) const;  // exact mapped; raster resampled by pullback

    // Raster-level check that every occupied cell touches an interior cell
    // (2d-connectivity); the "closure of its interior" certificate.
    bool closure_of_interior_ok() const;
};

struct RegionMetrics {
    double diameter = 0;
    double inradius = 0;
    double volume = 0;
};

// Exact closed-intersection test between convex primitives (separating-axis
// test for d == 2 polygons/boxes). `inflate` widens A by that margin.
bool primitives_meet(const Primitive& a, const Primitive& b, int dim, double inflate = 0.0);

Region neighborhood(const Region& f, double R);  // N_R(F), outer-rounded
Region erode(const Region& f, double r);         // F^{-r}, inner-rounded; may be empty
double hausdorff_distance(const Region& a, const Region& b);
RegionMetrics region_metrics(const Region& f);

// Serialization: exact primitives as a vertex-list text block, raster as a
// PGM-style ASCII grid with an origin/h header.
void write_region(std::ostream& os, const Region& r);
Region read_region(std::istream& is);

struct EmptyRegionError : std::runtime_error {
    EmptyRegionError() : std::runtime_error("operation requires a nonempty region") {}
};

}  // namespace tilekit
