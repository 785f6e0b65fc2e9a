#include "tilekit/region.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace tilekit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------- Primitive

Primitive Primitive::interval(double a, double b) {
    Primitive p;
    p.kind = Kind::Interval;
    p.data = {a, b};
    return p;
}

Primitive Primitive::box(const Vec& lo, const Vec& hi) {
    Primitive p;
    p.kind = Kind::AABox;
    for (int i = 0; i < lo.dim; ++i) p.data.push_back(lo[i]);
    for (int i = 0; i < hi.dim; ++i) p.data.push_back(hi[i]);
    return p;
}

Primitive Primitive::poly(const std::vector<Vec>& verts) {
    Primitive p;
    p.kind = Kind::ConvexPoly;
    for (const Vec& v : verts) {
        p.data.push_back(v[0]);
        p.data.push_back(v[1]);
    }
    return p;
}

int Primitive::vertex_count(int dim) const {
    switch (kind) {
        case Kind::Interval:
            return 2;
        case Kind::AABox:
            return 1 << dim;
        case Kind::ConvexPoly:
            return static_cast<int>(data.size() / 2);
    }
    return 0;
}

std::vector<Vec> Primitive::vertices(int dim) const {
    std::vector<Vec> out;
    if (kind == Kind::Interval) {
        out.push_back(Vec(1, data[0]));
        out.push_back(Vec(1, data[1]));
    } else if (kind == Kind::AABox) {
        for (int mask = 0; mask < (1 << dim); ++mask) {
            Vec v(dim);
            for (int a = 0; a < dim; ++a) v.c[a] = (mask >> a & 1) ? data[dim + a] : data[a];
            out.push_back(v);
        }
    } else {
        for (std::size_t v = 0; v + 1 < data.size(); v += 2) out.push_back(Vec(2, data[v], data[v + 1]));
    }
    return out;
}

Box Primitive::bbox(int dim) const {
    Box b{Vec(dim), Vec(dim)};
    if (kind == Kind::Interval) {
        b.lo.c[0] = data[0];
        b.hi.c[0] = data[1];
    } else if (kind == Kind::AABox) {
        for (int i = 0; i < dim; ++i) {
            b.lo.c[i] = data[i];
            b.hi.c[i] = data[dim + i];
        }
    } else {
        for (int i = 0; i < 2; ++i) {
            b.lo.c[i] = kInf;
            b.hi.c[i] = -kInf;
        }
        for (std::size_t v = 0; v + 1 < data.size(); v += 2) {
            b.lo.c[0] = std::min(b.lo.c[0], data[v]);
            b.hi.c[0] = std::max(b.hi.c[0], data[v]);
            b.lo.c[1] = std::min(b.lo.c[1], data[v + 1]);
            b.hi.c[1] = std::max(b.hi.c[1], data[v + 1]);
        }
    }
    return b;
}

bool Primitive::contains(const Vec& p, double tol) const {
    if (kind == Kind::Interval) return p[0] >= data[0] - tol && p[0] <= data[1] + tol;
    if (kind == Kind::AABox) {
        int d = p.dim;
        for (int i = 0; i < d; ++i)
            if (p[i] < data[i] - tol || p[i] > data[d + i] + tol) return false;
        return true;
    }
    // convex polygon, CCW: p is inside iff it lies left of every edge
    std::size_t nv = data.size() / 2;
    for (std::size_t i = 0; i < nv; ++i) {
        std::size_t j = (i + 1) % nv;
        double ex = data[2 * j] - data[2 * i];
        double ey = data[2 * j + 1] - data[2 * i + 1];
        double px = p[0] - data[2 * i];
        double py = p[1] - data[2 * i + 1];
        double cross = ex * py - ey * px;
        double scale = std::hypot(ex, ey);
        if (cross < -tol * scale) return false;
    }
    return true;
}

namespace {
double point_segment_distance(double px, double py, double ax, double ay, double bx, double by) {
    double vx = bx - ax, vy = by - ay;
    double wx = px - ax, wy = py - ay;
    double vv = vx * vx + vy * vy;
    double t = vv > 0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    double dx = wx - t * vx, dy = wy - t * vy;
    return std::hypot(dx, dy);
}
}  // namespace

double Primitive::boundary_distance(const Vec& p, int dim) const {
    if (kind == Kind::Interval) return std::min(std::abs(p[0] - data[0]), std::abs(p[0] - data[1]));
    if (kind == Kind::AABox) {
        // distance to the boundary of the box, valid inside and outside
        bool inside = true;
        double inner = kInf, outer2 = 0;
        for (int i = 0; i < dim; ++i) {
            double lo = data[i], hi = data[dim + i];
            if (p[i] < lo) {
                inside = false;
                outer2 += (lo - p[i]) * (lo - p[i]);
            } else if (p[i] > hi) {
                inside = false;
                outer2 += (p[i] - hi) * (p[i] - hi);
            } else {
                inner = std::min(inner, std::min(p[i] - lo, hi - p[i]));
            }
        }
        if (!inside) {
            // project-to-box distance plus any slack inside remaining axes is
            // dominated by the projection distance
            return std::sqrt(outer2);
        }
        return inner;
    }
    double best = kInf;
    std::size_t nv = data.size() / 2;
    for (std::size_t i = 0; i < nv; ++i) {
        std::size_t j = (i + 1) % nv;
        best = std::min(best, point_segment_distance(p[0], p[1], data[2 * i], data[2 * i + 1],
                                                     data[2 * j], data[2 * j + 1]));
    }
    return best;
}

Primitive Primitive::translated(int dim, const Vec& g) const {
    Primitive r = *this;
    if (kind == Kind::Interval) {
        r.data[0] += g[0];
        r.data[1] += g[0];
    } else if (kind == Kind::AABox) {
        for (int i = 0; i < dim; ++i) {
            r.data[i] += g[i];
            r.data[dim + i] += g[i];
        }
    } else {
        for (std::size_t v = 0; v + 1 < r.data.size(); v += 2) {
            r.data[v] += g[0];
            r.data[v + 1] += g[1];
        }
    }
    return r;
}

Primitive Primitive::mapped(int dim, const Mat& m) const {
    if (kind == Kind::Interval) {
        double a = m.at(0, 0) * data[0];
        double b = m.at(0, 0) * data[1];
        return interval(std::min(a, b), std::max(a, b));
    }
    if (kind == Kind::AABox) {
        bool axis_aligned = true;
        for (int i = 0; i < dim && axis_aligned; ++i)
            for (int j = 0; j < dim; ++j)
                if (i != j && std::abs(m.at(i, j)) > 0) {
                    axis_aligned = false;
                    break;
                }
        if (axis_aligned) {
            Vec lo(dim), hi(dim);
            for (int i = 0; i < dim; ++i) {
                double a = m.at(i, i) * data[i];
                double b = m.at(i, i) * data[dim + i];
                lo.c[i] = std::min(a, b);
                hi.c[i] = std::max(a, b);
            }
            return box(lo, hi);
        }
        if (dim != 2) throw std::domain_error("general linear image of a box needs d == 2");
        // corners as a polygon; fix orientation below
        std::vector<Vec> verts;
        double xs[2] = {data[0], data[2]};
        double ys[2] = {data[1], data[3]};
        int order[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        for (auto& o : order) verts.push_back(apply(m, Vec(2, xs[o[0]], ys[o[1]])));
        if (det(m) < 0) std::reverse(verts.begin(), verts.end());
        return poly(verts);
    }
    std::vector<Vec> verts;
    for (std::size_t v = 0; v + 1 < data.size(); v += 2)
        verts.push_back(apply(m, Vec(2, data[v], data[v + 1])));
    if (det(m) < 0) std::reverse(verts.begin(), verts.end());
    return poly(verts);
}

bool primitives_meet(const Primitive& a, const Primitive& b, int dim, double inflate) {
    if (dim == 1 || (a.kind == Primitive::Kind::AABox && b.kind == Primitive::Kind::AABox)) {
        Box ba = a.bbox(dim), bb = b.bbox(dim);
        for (int t = 0; t < dim; ++t)
            if (ba.hi[t] + inflate < bb.lo[t] || bb.hi[t] < ba.lo[t] - inflate) return false;
        return true;
    }
    if (dim != 2) throw std::domain_error("primitives_meet: general shapes need d <= 2");
    // separating-axis test over both vertex hulls (boxes become 4-gons)
    std::vector<Vec> va = a.vertices(2), vb = b.vertices(2);
    auto axes_of = [](const std::vector<Vec>& v, std::vector<Vec>& axes) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Vec& p = v[i];
            const Vec& q = v[(i + 1) % v.size()];
            Vec n(2, -(q[1] - p[1]), q[0] - p[0]);
            double l = norm(n);
            if (l > 1e-15) axes.push_back((1.0 / l) * n);
        }
    };
    std::vector<Vec> axes;
    axes_of(va, axes);
    axes_of(vb, axes);
    if (axes.empty()) {  // both degenerate points
        return dist(va[0], vb[0]) <= inflate;
    }
    for (const Vec& ax : axes) {
        double alo = 1e300, ahi = -1e300, blo = 1e300, bhi = -1e300;
        for (const Vec& p : va) {
            double d = dot(ax, p);
            alo = std::min(alo, d);
            ahi = std::max(ahi, d);
        }
        for (const Vec& p : vb) {
            double d = dot(ax, p);
            blo = std::min(blo, d);
            bhi = std::max(bhi, d);
        }
        if (ahi + inflate < blo || bhi < alo - inflate) return false;
    }
    return true;
}

// ------------------------------------------------------------------- Raster

std::int64_t Raster::popcount() const {
    std::int64_t c = 0;
    for (std::uint8_t b : occ) c += b;
    return c;
}

Box Raster::tight_bbox() const {
    std::int64_t mn[3] = {lo[0] + n[0], lo[1] + n[1], lo[2] + n[2]};
    std::int64_t mx[3] = {lo[0] - 1, lo[1] - 1, lo[2] - 1};
    for (std::int64_t k = lo[2]; k < lo[2] + n[2]; ++k)
        for (std::int64_t j = lo[1]; j < lo[1] + n[1]; ++j)
            for (std::int64_t i = lo[0]; i < lo[0] + n[0]; ++i)
                if (occ[index(i, j, k)]) {
                    std::int64_t c[3] = {i, j, k};
                    for (int t = 0; t < 3; ++t) {
                        mn[t] = std::min(mn[t], c[t]);
                        mx[t] = std::max(mx[t], c[t]);
                    }
                }
    Box b{Vec(dim), Vec(dim)};
    for (int t = 0; t < dim; ++t) {
        b.lo.c[t] = static_cast<double>(mn[t]) * h;
        b.hi.c[t] = static_cast<double>(mx[t] + 1) * h;
    }
    return b;
}

Raster Raster::cropped() const {
    std::int64_t mn[3] = {lo[0] + n[0], lo[1] + n[1], lo[2] + n[2]};
    std::int64_t mx[3] = {lo[0] - 1, lo[1] - 1, lo[2] - 1};
    bool any = false;
    for (std::int64_t k = lo[2]; k < lo[2] + n[2]; ++k)
        for (std::int64_t j = lo[1]; j < lo[1] + n[1]; ++j)
            for (std::int64_t i = lo[0]; i < lo[0] + n[0]; ++i)
                if (occ[index(i, j, k)]) {
                    any = true;
                    std::int64_t c[3] = {i, j, k};
                    for (int t = 0; t < 3; ++t) {
                        mn[t] = std::min(mn[t], c[t]);
                        mx[t] = std::max(mx[t], c[t]);
                    }
                }
    Raster r;
    r.dim = dim;
    r.h = h;
    if (!any) {
        r.lo = {0, 0, 0};
        r.n = {0, 1, 1};
        return r;
    }
    for (int t = 0; t < 3; ++t) {
        r.lo[t] = (t < dim) ? mn[t] : 0;
        r.n[t] = (t < dim) ? (mx[t] - mn[t] + 1) : 1;
    }
    r.occ.assign(static_cast<std::size_t>(r.cell_count()), 0);
    for (std::int64_t k = r.lo[2]; k < r.lo[2] + r.n[2]; ++k)
        for (std::int64_t j = r.lo[1]; j < r.lo[1] + r.n[1]; ++j)
            for (std::int64_t i = r.lo[0]; i < r.lo[0] + r.n[0]; ++i)
                r.occ[r.index(i, j, k)] = at(i, j, k) ? 1 : 0;
    return r;
}

namespace {

Raster padded(const Raster& src, std::int64_t cells) {
    Raster r;
    r.dim = src.dim;
    r.h = src.h;
    for (int t = 0; t < 3; ++t) {
        r.lo[t] = (t < src.dim) ? src.lo[t] - cells : 0;
        r.n[t] = (t < src.dim) ? src.n[t] + 2 * cells : 1;
    }
    r.occ.assign(static_cast<std::size_t>(r.cell_count()), 0);
    for (std::int64_t k = src.lo[2]; k < src.lo[2] + src.n[2]; ++k)
        for (std::int64_t j = src.lo[1]; j < src.lo[1] + src.n[1]; ++j)
            for (std::int64_t i = src.lo[0]; i < src.lo[0] + src.n[0]; ++i)
                if (src.occ[src.index(i, j, k)]) r.occ[r.index(i, j, k)] = 1;
    return r;
}

// 1-D squared-distance lower envelope (Felzenszwalb-Huttenlocher). Cells
// with f == inf carry no parabola.
void edt_pass(const double* f, double* d, std::int64_t n, std::int64_t* v, double* z) {
    std::int64_t q0 = 0;
    while (q0 < n && f[q0] == kInf) ++q0;
    if (q0 == n) {
        for (std::int64_t q = 0; q < n; ++q) d[q] = kInf;
        return;
    }
    std::int64_t k = 0;
    v[0] = q0;
    z[0] = -kInf;
    z[1] = kInf;
    auto intersect = [&](std::int64_t q, std::int64_t p) {
        return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
               (2.0 * (q - p));
    };
    for (std::int64_t q = q0 + 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        double s = intersect(q, v[k]);
        while (k > 0 && s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    std::int64_t k2 = 0;
    for (std::int64_t q = 0; q < n; ++q) {
        while (z[k2 + 1] < static_cast<double>(q)) ++k2;
        double dq = static_cast<double>(q) - static_cast<double>(v[k2]);
        d[q] = dq * dq + f[v[k2]];
    }
}

}  // namespace

std::vector<double> edt_squared(const Raster& r, bool to_complement) {
    std::int64_t total = r.cell_count();
    std::vector<double> g(static_cast<std::size_t>(total));
    for (std::int64_t idx = 0; idx < total; ++idx) {
        bool marked = to_complement ? (r.occ[idx] == 0) : (r.occ[idx] != 0);
        g[idx] = marked ? 0.0 : kInf;
    }
    std::int64_t nx = r.n[0], ny = r.n[1], nz = r.n[2];
    std::int64_t nmax = std::max({nx, ny, nz});
    std::vector<double> f(nmax), d(nmax), z(nmax + 1);
    std::vector<std::int64_t> v(nmax);

    auto run_axis = [&](int axis) {
        std::int64_t len = (axis == 0) ? nx : (axis == 1) ? ny : nz;
        if (len <= 1) return;
        std::int64_t stride = (axis == 0) ? 1 : (axis == 1) ? nx : nx * ny;
        std::int64_t ca = (axis == 0) ? ny : nx;
        std::int64_t cb = (axis == 2) ? ny : nz;
        for (std::int64_t a = 0; a < ca; ++a)
            for (std::int64_t b = 0; b < cb; ++b) {
                std::int64_t base;
                if (axis == 0)
                    base = nx * (a + ny * b);
                else if (axis == 1)
                    base = a + nx * ny * b;
                else
                    base = a + nx * b;
                for (std::int64_t q = 0; q < len; ++q) f[q] = g[base + q * stride];
                edt_pass(f.data(), d.data(), len, v.data(), z.data());
                for (std::int64_t q = 0; q < len; ++q) g[base + q * stride] = d[q];
            }
    };
    for (int axis = 0; axis < r.dim; ++axis) run_axis(axis);
    double h2 = r.h * r.h;
    for (double& x : g)
        if (x != kInf) x *= h2;
    return g;
}

// ------------------------------------------------------------------- Region

Region Region::from_primitives(int dim, std::vector<Primitive> prims, double h) {
    check_dim(dim);
    Region r;
    r.dim = dim;
    r.h = h;
    r.exact = std::move(prims);
    r.ensure_raster();
    return r;
}

Region Region::from_raster(Raster rr) {
    Region r;
    r.dim = rr.dim;
    r.h = rr.h;
    r.raster = std::move(rr);
    r.has_raster = true;
    return r;
}

void Region::ensure_raster() {
    if (has_raster || exact.empty()) return;
    Box b = exact[0].bbox(dim);
    for (std::size_t i = 1; i < exact.size(); ++i) b = box_union(b, exact[i].bbox(dim));
    Raster r;
    r.dim = dim;
    r.h = h;
    for (int t = 0; t < 3; ++t) {
        if (t < dim) {
            r.lo[t] = static_cast<std::int64_t>(std::floor(b.lo[t] / h)) - 1;
            std::int64_t hi = static_cast<std::int64_t>(std::ceil(b.hi[t] / h)) + 1;
            r.n[t] = hi - r.lo[t];
        } else {
            r.lo[t] = 0;
            r.n[t] = 1;
        }
    }
    r.occ.assign(static_cast<std::size_t>(r.cell_count()), 0);
    for (std::int64_t k = r.lo[2]; k < r.lo[2] + r.n[2]; ++k)
        for (std::int64_t j = r.lo[1]; j < r.lo[1] + r.n[1]; ++j)
            for (std::int64_t i = r.lo[0]; i < r.lo[0] + r.n[0]; ++i) {
                Vec c = r.center(i, j, k);
                for (const Primitive& p : exact)
                    if (p.contains(c, 0.0)) {
                        r.occ[r.index(i, j, k)] = 1;
                        break;
                    }
            }
    if (r.popcount() == 0) {
        // degenerate region (point or sliver thinner than a cell): fall back
        // to the cells containing the primitive vertices so the raster is a
        // nonempty outer stand-in
        for (const Primitive& p : exact)
            for (const Vec& v : p.vertices(dim)) {
                std::int64_t c[3] = {0, 0, 0};
                for (int t = 0; t < dim; ++t)
                    c[t] = static_cast<std::int64_t>(std::floor(v[t] / h));
                if (r.in_range(c[0], c[1], c[2])) r.set(c[0], c[1], c[2], true);
            }
    }
    raster = r.cropped();
    has_raster = true;
}

bool Region::empty() const {
    if (has_raster) return raster.cell_count() == 0 || raster.popcount() == 0;
    return exact.empty();
}

Box Region::bbox() const {
    if (has_exact()) {
        Box b = exact[0].bbox(dim);
        for (std::size_t i = 1; i < exact.size(); ++i) b = box_union(b, exact[i].bbox(dim));
        return b;
    }
    return raster.tight_bbox();
}

double Region::volume() const {
    if (!has_raster) const_cast<Region*>(this)->ensure_raster();
    return static_cast<double>(raster.popcount()) * std::pow(h, dim);
}

bool Region::contains(const Vec& p, double tol) const {
    if (has_exact()) {
        for (const Primitive& pr : exact)
            if (pr.contains(p, tol)) return true;
        return false;
    }
    return raster.contains_point(p);
}

double Region::boundary_distance(const Vec& p) const {
    if (has_exact()) {
        double best = kInf;
        for (const Primitive& pr : exact) best = std::min(best, pr.boundary_distance(p, dim));
        return best;
    }
    // raster: the boundary is where support and complement meet; both
    // distance fields are cached
    const DistanceField& df = distance_field();
    std::int64_t c[3] = {0, 0, 0};
    bool in_grid = true;
    for (int t = 0; t < dim; ++t) {
        c[t] = static_cast<std::int64_t>(std::floor(p[t] / h));
        if (c[t] < df.grid.lo[t] || c[t] >= df.grid.lo[t] + df.grid.n[t]) in_grid = false;
    }
    if (in_grid) {
        std::size_t idx = static_cast<std::size_t>(df.grid.index(c[0], c[1], c[2]));
        bool inside = raster.contains_point(p);
        double d2 = inside ? df.to_complement2[idx] : df.to_support2[idx];
        return std::max(0.0, std::sqrt(d2) - 0.5 * h);
    }
    return support_distance(p);
}

Region Region::translated(const Vec& g) const {
    Region r;
    r.dim = dim;
    r.h = h;
    for (const Primitive& p : exact) r.exact.push_back(p.translated(dim, g));
    if (!r.exact.empty()) {
        r.ensure_raster();
        return r;
    }
    if (has_raster) {
        // re-sample the shifted raster on the global lattice
        Raster t;
        t.dim = dim;
        t.h = h;
        Box b = raster.tight_bbox();
        for (int i = 0; i < 3; ++i) {
            if (i < dim) {
                t.lo[i] = static_cast<std::int64_t>(std::floor((b.lo[i] + g[i]) / h)) - 1;
                std::int64_t hi = static_cast<std::int64_t>(std::ceil((b.hi[i] + g[i]) / h)) + 1;
                t.n[i] = hi - t.lo[i];
            } else {
                t.lo[i] = 0;
                t.n[i] = 1;
            }
        }
        t.occ.assign(static_cast<std::size_t>(t.cell_count()), 0);
        for (std::int64_t k = t.lo[2]; k < t.lo[2] + t.n[2]; ++k)
            for (std::int64_t j = t.lo[1]; j < t.lo[1] + t.n[1]; ++j)
                for (std::int64_t i = t.lo[0]; i < t.lo[0] + t.n[0]; ++i)
                    if (raster.contains_point(t.center(i, j, k) - g)) t.occ[t.index(i, j, k)] = 1;
        return from_raster(t.cropped());
    }
    return r;
}

Region Region::mapped(const Mat& m) const {
    Region r;
    r.dim = dim;
    r.h = h;
    if (has_exact()) {
        for (const Primitive& p : exact) r.exact.push_back(p.mapped(dim, m));
        r.ensure_raster();
        return r;
    }
    Mat minv = inverse(m);
    Box b = raster.tight_bbox();
    // image bbox from mapped corners
    Vec corner(dim);
    Box ib{Vec(dim), Vec(dim)};
    bool first = true;
    int corners = 1 << dim;
    for (int mask = 0; mask < corners; ++mask) {
        for (int t = 0; t < dim; ++t) corner.c[t] = (mask >> t & 1) ? b.hi[t] : b.lo[t];
        Vec q = apply(m, corner);
        if (first) {
            ib.lo = q;
            ib.hi = q;
            first = false;
        } else {
            for (int t = 0; t < dim; ++t) {
                ib.lo.c[t] = std::min(ib.lo[t], q[t]);
                ib.hi.c[t] = std::max(ib.hi[t], q[t]);
            }
        }
    }
    Raster t;
    t.dim = dim;
    t.h = h;
    for (int i = 0; i < 3; ++i) {
        if (i < dim) {
            t.lo[i] = static_cast<std::int64_t>(std::floor(ib.lo[i] / h)) - 1;
            std::int64_t hi = static_cast<std::int64_t>(std::ceil(ib.hi[i] / h)) + 1;
            t.n[i] = hi - t.lo[i];
        } else {
            t.lo[i] = 0;
            t.n[i] = 1;
        }
    }
    t.occ.assign(static_cast<std::size_t>(t.cell_count()), 0);
    for (std::int64_t k = t.lo[2]; k < t.lo[2] + t.n[2]; ++k)
        for (std::int64_t j = t.lo[1]; j < t.lo[1] + t.n[1]; ++j)
            for (std::int64_t i = t.lo[0]; i < t.lo[0] + t.n[0]; ++i)
                if (raster.contains_point(apply(minv, t.center(i, j, k))))
                    t.occ[t.index(i, j, k)] = 1;
    return from_raster(t.cropped());
}

const Region::DistanceField& Region::distance_field() const {
    if (!dist_cache) {
        if (!has_raster) const_cast<Region*>(this)->ensure_raster();
        auto df = std::make_shared<DistanceField>();
        std::int64_t pad = 8;
        df->grid = padded(raster, pad);
        df->to_support2 = edt_squared(df->grid, false);
        df->to_complement2 = edt_squared(df->grid, true);
        dist_cache = df;
    }
    return *dist_cache;
}

double Region::support_distance(const Vec& p) const {
    if (has_exact()) {
        double best = kInf;
        for (const Primitive& pr : exact) {
            if (pr.contains(p, 0.0)) return 0.0;
            best = std::min(best, pr.boundary_distance(p, dim));
        }
        return best;
    }
    if (!has_raster) return kInf;
    if (raster.contains_point(p)) return 0.0;
    const DistanceField& df = distance_field();
    std::int64_t c[3] = {0, 0, 0};
    bool in_grid = true;
    for (int t = 0; t < dim; ++t) {
        c[t] = static_cast<std::int64_t>(std::floor(p[t] / h));
        if (c[t] < df.grid.lo[t] || c[t] >= df.grid.lo[t] + df.grid.n[t]) in_grid = false;
    }
    double diag = 0.5 * h * std::sqrt(double(dim));
    if (in_grid) {
        double d2 = df.to_support2[static_cast<std::size_t>(df.grid.index(c[0], c[1], c[2]))];
        return std::max(0.0, std::sqrt(d2) - diag);
    }
    // beyond the padded grid (rare): exact scan over occupied cells
    double best = kInf;
    const Raster& r = raster;
    for (std::int64_t kk = r.lo[2]; kk < r.lo[2] + r.n[2]; ++kk)
        for (std::int64_t jj = r.lo[1]; jj < r.lo[1] + r.n[1]; ++jj)
            for (std::int64_t ii = r.lo[0]; ii < r.lo[0] + r.n[0]; ++ii)
                if (r.occ[r.index(ii, jj, kk)]) best = std::min(best, dist(p, r.center(ii, jj, kk)));
    return std::max(0.0, best - diag);
}

bool Region::closure_of_interior_ok() const {
    if (!has_raster) const_cast<Region*>(this)->ensure_raster();
    const Raster& r = raster;
    auto interior = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
        if (!r.at(i, j, k)) return false;
        if (!r.at(i - 1, j, k) || !r.at(i + 1, j, k)) return false;
        if (dim > 1 && (!r.at(i, j - 1, k) || !r.at(i, j + 1, k))) return false;
        if (dim > 2 && (!r.at(i, j, k - 1) || !r.at(i, j, k + 1))) return false;
        return true;
    };
    for (std::int64_t k = r.lo[2]; k < r.lo[2] + r.n[2]; ++k)
        for (std::int64_t j = r.lo[1]; j < r.lo[1] + r.n[1]; ++j)
            for (std::int64_t i = r.lo[0]; i < r.lo[0] + r.n[0]; ++i) {
                if (!r.occ[r.index(i, j, k)]) continue;
                bool ok = false;
                for (std::int64_t dk = (dim > 2 ? -1 : 0); dk <= (dim > 2 ? 1 : 0) && !ok; ++dk)
                    for (std::int64_t dj = (dim > 1 ? -1 : 0); dj <= (dim > 1 ? 1 : 0) && !ok; ++dj)
                        for (std::int64_t di = -1; di <= 1 && !ok; ++di)
                            if (interior(i + di, j + dj, k + dk)) ok = true;
                if (!ok) return false;
            }
    return true;
}

// --------------------------------------------------------------- operations

Region neighborhood(const Region& f, double R) {
    if (f.empty()) throw EmptyRegionError();
    Region src = f;
    src.ensure_raster();
    double h = src.h;
    int dim = src.dim;

    // 1-D interval unions stay exact.
    if (dim == 1 && src.has_exact()) {
        std::vector<std::pair<double, double>> iv;
        for (const Primitive& p : src.exact) iv.emplace_back(p.data[0] - R, p.data[1] + R);
        std::sort(iv.begin(), iv.end());
        std::vector<Primitive> out;
        double a = iv[0].first, b = iv[0].second;
        for (std::size_t i = 1; i < iv.size(); ++i) {
            if (iv[i].first <= b) {
                b = std::max(b, iv[i].second);
            } else {
                out.push_back(Primitive::interval(a, b));
                a = iv[i].first;
                b = iv[i].second;
            }
        }
        out.push_back(Primitive::interval(a, b));
        return Region::from_primitives(1, out, h);
    }

    std::int64_t pad = static_cast<std::int64_t>(std::ceil(R / h)) + 2;
    Raster g = padded(src.raster, pad);
    std::vector<double> d2 = edt_squared(g, false);
    double lim = R + 0.5 * h * std::sqrt(static_cast<double>(dim));
    double lim2 = lim * lim;
    Raster out = g;
    for (std::int64_t idx = 0; idx < g.cell_count(); ++idx) out.occ[idx] = d2[idx] <= lim2 ? 1 : 0;
    return Region::from_raster(out.cropped());
}

Region erode(const Region& f, double r) {
    if (f.empty()) throw EmptyRegionError();
    Region src = f;
    src.ensure_raster();
    double h = src.h;
    int dim = src.dim;

    if (dim == 1 && src.has_exact()) {
        // merge intervals first so interior seams are not treated as boundary
        std::vector<std::pair<double, double>> iv;
        for (const Primitive& p : src.exact) iv.emplace_back(p.data[0], p.data[1]);
        std::sort(iv.begin(), iv.end());
        std::vector<std::pair<double, double>> merged;
        for (auto& x : iv) {
            if (!merged.empty() && x.first <= merged.back().second + 1e-12 * std::abs(x.first)) {
                merged.back().second = std::max(merged.back().second, x.second);
            } else {
                merged.push_back(x);
            }
        }
        std::vector<Primitive> out;
        for (auto& x : merged)
            if (x.second - r >= x.first + r) out.push_back(Primitive::interval(x.first + r, x.second - r));
        if (out.empty()) {
            Region e;
            e.dim = 1;
            e.h = h;
            e.has_raster = true;
            e.raster.dim = 1;
            e.raster.h = h;
            e.raster.n = {0, 1, 1};
            return e;
        }
        return Region::from_primitives(1, out, h);
    }

    Raster g = padded(src.raster, 1);
    std::vector<double> d2 = edt_squared(g, true);
    double lim = r + 0.5 * h * std::sqrt(static_cast<double>(dim));
    double lim2 = lim * lim;
    Raster out = g;
    for (std::int64_t idx = 0; idx < g.cell_count(); ++idx)
        out.occ[idx] = (g.occ[idx] && d2[idx] >= lim2) ? 1 : 0;
    return Region::from_raster(out.cropped());
}

double hausdorff_distance(const Region& a, const Region& b) {
    if (a.empty() || b.empty()) throw EmptyRegionError();
    Region ra = a, rb = b;
    ra.ensure_raster();
    rb.ensure_raster();
    if (std::abs(ra.h - rb.h) > 1e-15) throw std::invalid_argument("hausdorff: mismatched raster h");
    double h = ra.h;
    int dim = ra.dim;

    auto one_sided = [&](const Raster& from, const Raster& to) {
        // max over 'from' cells of distance to nearest occupied cell of 'to';
        // computed on a grid covering both
        Raster g;
        g.dim = dim;
        g.h = h;
        for (int t = 0; t < 3; ++t) {
            if (t < dim) {
                std::int64_t lo = std::min(from.lo[t], to.lo[t]) - 1;
                std::int64_t hi = std::max(from.lo[t] + from.n[t], to.lo[t] + to.n[t]) + 1;
                g.lo[t] = lo;
                g.n[t] = hi - lo;
            } else {
                g.lo[t] = 0;
                g.n[t] = 1;
            }
        }
        g.occ.assign(static_cast<std::size_t>(g.cell_count()), 0);
        for (std::int64_t k = to.lo[2]; k < to.lo[2] + to.n[2]; ++k)
            for (std::int64_t j = to.lo[1]; j < to.lo[1] + to.n[1]; ++j)
                for (std::int64_t i = to.lo[0]; i < to.lo[0] + to.n[0]; ++i)
                    if (to.occ[to.index(i, j, k)]) g.occ[g.index(i, j, k)] = 1;
        std::vector<double> d2 = edt_squared(g, false);
        double worst = 0;
        for (std::int64_t k = from.lo[2]; k < from.lo[2] + from.n[2]; ++k)
            for (std::int64_t j = from.lo[1]; j < from.lo[1] + from.n[1]; ++j)
                for (std::int64_t i = from.lo[0]; i < from.lo[0] + from.n[0]; ++i)
                    if (from.occ[from.index(i, j, k)])
                        worst = std::max(worst, d2[static_cast<std::size_t>(g.index(i, j, k))]);
        return std::sqrt(worst);
    };
    return std::max(one_sided(ra.raster, rb.raster), one_sided(rb.raster, ra.raster));
}

RegionMetrics region_metrics(const Region& f) {
    if (f.empty()) throw EmptyRegionError();
    Region src = f;
    src.ensure_raster();
    const Raster& r = src.raster;
    double h = src.h;
    int dim = src.dim;
    RegionMetrics m;
    m.volume = static_cast<double>(r.popcount()) * std::pow(h, dim);

    // inradius: peak of the distance transform to the complement, shifted to
    // the cell face
    Raster g = padded(r, 1);
    std::vector<double> d2 = edt_squared(g, true);
    double peak2 = 0;
    for (std::int64_t idx = 0; idx < g.cell_count(); ++idx)
        if (g.occ[idx]) peak2 = std::max(peak2, d2[idx]);
    m.inradius = std::max(0.0, std::sqrt(peak2) - 0.5 * h);

    // diameter over corner points of occupied boundary cells
    std::vector<Vec> pts;
    for (std::int64_t k = r.lo[2]; k < r.lo[2] + r.n[2]; ++k)
        for (std::int64_t j = r.lo[1]; j < r.lo[1] + r.n[1]; ++j)
            for (std::int64_t i = r.lo[0]; i < r.lo[0] + r.n[0]; ++i) {
                if (!r.occ[r.index(i, j, k)]) continue;
                bool boundary = !r.at(i - 1, j, k) || !r.at(i + 1, j, k);
                if (dim > 1 && !boundary) boundary = !r.at(i, j - 1, k) || !r.at(i, j + 1, k);
                if (dim > 2 && !boundary) boundary = !r.at(i, j, k - 1) || !r.at(i, j, k + 1);
                if (!boundary) continue;
                int corners = 1 << dim;
                for (int mask = 0; mask < corners; ++mask) {
                    Vec p(dim);
                    std::int64_t c[3] = {i, j, k};
                    for (int t = 0; t < dim; ++t)
                        p.c[t] = static_cast<double>(c[t] + ((mask >> t) & 1)) * h;
                    pts.push_back(p);
                }
            }
    if (dim == 1) {
        double lo = kInf, hi = -kInf;
        for (const Vec& p : pts) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        m.diameter = hi - lo;
        return m;
    }
    if (dim == 2 && pts.size() > 64) {
        // convex hull (monotone chain), then brute-force over hull points
        std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
            return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
        });
        pts.erase(std::unique(pts.begin(), pts.end(),
                              [](const Vec& a, const Vec& b) { return a[0] == b[0] && a[1] == b[1]; }),
                  pts.end());
        auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
            return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        };
        std::vector<Vec> hull(2 * pts.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
            hull[k++] = pts[i];
        }
        for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
            while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
            hull[k++] = pts[i];
        }
        hull.resize(k > 0 ? k - 1 : 0);
        pts = hull;
    }
    double best2 = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) best2 = std::max(best2, norm2(pts[i] - pts[j]));
    m.diameter = std::sqrt(best2);
    return m;
}

// ------------------------------------------------------------ serialization

void write_region(std::ostream& os, const Region& r) {
    os << "region v1\n";
    os.precision(17);
    os << "dim " << r.dim << "\n";
    os << "h " << r.h << "\n";
    os.precision(17);
    for (const Primitive& p : r.exact) {
        if (p.kind == Primitive::Kind::Interval)
            os << "interval " << p.data[0] << " " << p.data[1] << "\n";
        else if (p.kind == Primitive::Kind::AABox) {
            os << "box";
            for (double x : p.data) os << " " << x;
            os << "\n";
        } else {
            os << "poly";
            for (double x : p.data) os << " " << x;
            os << "\n";
        }
    }
    if (r.has_raster) {
        const Raster& g = r.raster;
        os << "raster";
        for (int t = 0; t < r.dim; ++t) os << " " << g.lo[t];
        for (int t = 0; t < r.dim; ++t) os << " " << g.n[t];
        os << "\n";
        // PGM-style rows: x fastest, one row per (j,k)
        for (std::int64_t k = 0; k < g.n[2]; ++k)
            for (std::int64_t j = 0; j < g.n[1]; ++j) {
                for (std::int64_t i = 0; i < g.n[0]; ++i)
                    os << (g.occ[static_cast<std::size_t>(i + g.n[0] * (j + g.n[1] * k))] ? '1' : '0');
                os << "\n";
            }
    }
    os << "end\n";
}

Region read_region(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("region", 0) != 0)
        throw std::runtime_error("region: bad header");
    Region r;
    bool have_raster_meta = false;
    Raster g;
    while (std::getline(is, line)) {
        if (line == "end") break;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "dim") {
            ss >> r.dim;
        } else if (tok == "h") {
            ss >> r.h;
        } else if (tok == "interval") {
            double a, b;
            ss >> a >> b;
            r.exact.push_back(Primitive::interval(a, b));
        } else if (tok == "box") {
            std::vector<double> v(2 * r.dim);
            for (double& x : v) ss >> x;
            Primitive p;
            p.kind = Primitive::Kind::AABox;
            p.data = v;
            r.exact.push_back(p);
        } else if (tok == "poly") {
            Primitive p;
            p.kind = Primitive::Kind::ConvexPoly;
            double x;
            while (ss >> x) p.data.push_back(x);
            r.exact.push_back(p);
        } else if (tok == "raster") {
            g.dim = r.dim;
            g.h = r.h;
            for (int t = 0; t < r.dim; ++t) ss >> g.lo[t];
            for (int t = 0; t < r.dim; ++t) ss >> g.n[t];
            for (int t = r.dim; t < 3; ++t) {
                g.lo[t] = 0;
                g.n[t] = 1;
            }
            g.occ.assign(static_cast<std::size_t>(g.cell_count()), 0);
            std::size_t idx = 0;
            for (std::int64_t k = 0; k < g.n[2]; ++k)
                for (std::int64_t j = 0; j < g.n[1]; ++j) {
                    std::string row;
                    if (!std::getline(is, row)) throw std::runtime_error("region: truncated raster");
                    for (std::int64_t i = 0; i < g.n[0]; ++i)
                        g.occ[idx++] = (i < static_cast<std::int64_t>(row.size()) && row[i] == '1') ? 1 : 0;
                }
            have_raster_meta = true;
        }
    }
    if (!r.exact.empty()) {
        r.ensure_raster();
    } else if (have_raster_meta) {
        r.raster = g;
        r.has_raster = true;
    }
    return r;
}

}  // namespace tilekit
