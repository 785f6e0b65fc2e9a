#include "tilekit/window.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tilekit/expansion.hpp"

namespace tilekit {

namespace {

// distance from point p to the support of prototile `proto` placed at `pos`
double support_distance(const Prototile& proto, const Vec& pos, const Vec& p) {
    return proto.shape.support_distance(p - pos);
}

}  // namespace

Box TilingWindow::tile_bbox(int i) const {
    need_index();
    return bboxes_[static_cast<std::size_t>(i)];
}

Region TilingWindow::tile_support(int i) const {
    const PlacedTile& t = patch.tiles[static_cast<std::size_t>(i)];
    return prototiles[static_cast<std::size_t>(t.label)].shape.translated(t.pos);
}

double TilingWindow::max_tile_diameter() const {
    if (dM_ < 0) {
        double m = 0;
        for (const Prototile& p : prototiles) m = std::max(m, region_metrics(p.shape).diameter);
        dM_ = m;
    }
    return dM_;
}

double TilingWindow::min_tile_inradius() const {
    if (eta_ < 0) {
        double m = std::numeric_limits<double>::infinity();
        for (const Prototile& p : prototiles) m = std::min(m, region_metrics(p.shape).inradius);
        eta_ = m;
    }
    return eta_;
}

void TilingWindow::finalize() {
    grid_.clear();
    ident_.clear();
    bboxes_.clear();
    dM_ = eta_ = -1;
    need_index();
}

void TilingWindow::need_index() const {
    if (!bboxes_.empty() || patch.tiles.empty()) return;
    bboxes_.reserve(patch.tiles.size());
    double dM = 0;
    std::vector<Box> proto_boxes;
    proto_boxes.reserve(prototiles.size());
    for (const Prototile& p : prototiles) {
        Box b = p.shape.bbox();
        proto_boxes.push_back(b);
        dM = std::max(dM, b.diameter());
    }
    grid_pitch_ = std::max(dM, 16 * h);
    for (std::size_t t = 0; t < patch.tiles.size(); ++t) {
        const PlacedTile& pt = patch.tiles[t];
        Box b = proto_boxes[static_cast<std::size_t>(pt.label)];
        b.lo = b.lo + pt.pos;
        b.hi = b.hi + pt.pos;
        bboxes_.push_back(b);
        std::int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            lo[a] = static_cast<std::int64_t>(std::floor(b.lo[a] / grid_pitch_));
            hi[a] = static_cast<std::int64_t>(std::floor(b.hi[a] / grid_pitch_));
        }
        for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
            for (std::int64_t y = lo[1]; y <= hi[1]; ++y)
                for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
                    CellKey ck;
                    ck.k[0] = x;
                    ck.k[1] = y;
                    ck.k[2] = z;
                    grid_[ck].push_back(static_cast<int>(t));
                }
        CellKey ik = quantize(pt.pos, h);
        ik.k[0] = ik.k[0] * 37 + pt.label;  // fold label into the identity key
        ident_[ik].push_back(static_cast<int>(t));
    }
}

std::vector<int> TilingWindow::tiles_meeting_ball(const Vec& c, double R) const {
    need_index();
    std::vector<int> out;
    if (bboxes_.empty()) return out;
    std::int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) {
        lo[a] = static_cast<std::int64_t>(std::floor((c[a] - R - 1e-9) / grid_pitch_));
        hi[a] = static_cast<std::int64_t>(std::floor((c[a] + R + 1e-9) / grid_pitch_));
    }
    std::vector<int> cand;
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
        for (std::int64_t y = lo[1]; y <= hi[1]; ++y)
            for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
                CellKey ck;
                ck.k[0] = x;
                ck.k[1] = y;
                ck.k[2] = z;
                auto it = grid_.find(ck);
                if (it == grid_.end()) continue;
                cand.insert(cand.end(), it->second.begin(), it->second.end());
            }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (int t : cand) {
        const Box& b = bboxes_[static_cast<std::size_t>(t)];
        double d2 = 0;
        for (int a = 0; a < dim; ++a) {
            double d = std::max({b.lo[a] - c[a], c[a] - b.hi[a], 0.0});
            d2 += d * d;
        }
        if (d2 > (R + 1e-9) * (R + 1e-9)) continue;
        const PlacedTile& pt = patch.tiles[static_cast<std::size_t>(t)];
        if (support_distance(prototiles[static_cast<std::size_t>(pt.label)], pt.pos, c) <= R + 1e-9)
            out.push_back(t);
    }
    return out;
}

std::vector<int> TilingWindow::tiles_at_point(const Vec& x) const { return tiles_meeting_ball(x, 0.0); }

std::optional<int> TilingWindow::find_tile(int label, const Vec& pos) const {
    need_index();
    // probe the quantization buckets adjacent to pos so half-grid values match
    for (int mask = 0; mask < (1 << dim); ++mask) {
        Vec probe = pos;
        for (int a = 0; a < dim; ++a)
            if (mask >> a & 1) probe.c[a] += 0.5 * h;
        CellKey ik = quantize(probe, h);
        ik.k[0] = ik.k[0] * 37 + label;
        auto it = ident_.find(ik);
        if (it == ident_.end()) continue;
        for (int t : it->second) {
            const PlacedTile& pt = patch.tiles[static_cast<std::size_t>(t)];
            if (pt.label == label && approx_eq(pt.pos, pos, 0.5 * h)) return t;
        }
    }
    for (int mask = 1; mask < (1 << dim); ++mask) {
        Vec probe = pos;
        for (int a = 0; a < dim; ++a)
            if (mask >> a & 1) probe.c[a] -= 0.5 * h;
        CellKey ik = quantize(probe, h);
        ik.k[0] = ik.k[0] * 37 + label;
        auto it = ident_.find(ik);
        if (it == ident_.end()) continue;
        for (int t : it->second) {
            const PlacedTile& pt = patch.tiles[static_cast<std::size_t>(t)];
            if (pt.label == label && approx_eq(pt.pos, pos, 0.5 * h)) return t;
        }
    }
    return std::nullopt;
}

Patch patch_of(const TilingWindow& win, const Region& f, std::vector<int>* tolerance_band) {
    if (f.empty()) throw EmptyRegionError();
    Box fb = f.bbox();
    double dM = win.max_tile_diameter();
    Vec mid = 0.5 * (fb.lo + fb.hi);
    double frad = 0.5 * fb.diameter();
    // completeness: every tile meeting F must be a window tile
    if (!win.ball_inside_valid(mid, frad + dM))
        throw OutOfWindowError("patch_of: F plus a d_M margin exceeds the window's valid ball");

    Patch out;
    std::vector<int> cand = win.tiles_meeting_ball(mid, frad + dM + 2 * win.h);
    Region fr = f;
    fr.ensure_raster();
    for (int t : cand) {
        const PlacedTile& pt = win.tile(t);
        const Prototile& proto = win.prototiles[static_cast<std::size_t>(pt.label)];
        bool meets = false;
        bool near = false;
        if (f.has_exact() && proto.shape.has_exact()) {
            // exact closed-set intersection on primitives
            for (const Primitive& fp : f.exact) {
                for (const Primitive& sp : proto.shape.exact) {
                    Primitive placed = sp.translated(win.dim, pt.pos);
                    if (primitives_meet(fp, placed, win.dim)) {
                        meets = true;
                        break;
                    }
                    if (primitives_meet(fp, placed, win.dim, win.h)) near = true;
                }
                if (meets) break;
            }
        } else {
            // raster route, a one-cell tolerance band applies
            const Raster& g = fr.raster;
            for (std::int64_t k = g.lo[2]; k < g.lo[2] + g.n[2] && !meets; ++k)
                for (std::int64_t j = g.lo[1]; j < g.lo[1] + g.n[1] && !meets; ++j)
                    for (std::int64_t i = g.lo[0]; i < g.lo[0] + g.n[0] && !meets; ++i)
                        if (g.occ[g.index(i, j, k)]) {
                            double d = support_distance(proto, pt.pos, g.center(i, j, k));
                            if (d <= 0.5 * win.h) meets = true;
                            else if (d <= win.h * std::sqrt(double(win.dim))) near = true;
                        }
            if (!meets) {
                // support-side cells inside F (supports thinner than F's raster)
                const Raster& sr = proto.shape.raster;
                for (std::int64_t k = sr.lo[2]; k < sr.lo[2] + sr.n[2] && !meets; ++k)
                    for (std::int64_t j = sr.lo[1]; j < sr.lo[1] + sr.n[1] && !meets; ++j)
                        for (std::int64_t i = sr.lo[0]; i < sr.lo[0] + sr.n[0] && !meets; ++i)
                            if (sr.occ[sr.index(i, j, k)] &&
                                f.contains(sr.center(i, j, k) + pt.pos, 0.0))
                                meets = true;
            }
        }
        if (meets)
            out.tiles.push_back(pt);
        else if (near && tolerance_band)
            tolerance_band->push_back(t);
    }
    return out;
}

Decomposition prototile_decomposition(const std::vector<RawTile>& tiles, double h) {
    if (tiles.empty()) throw std::invalid_argument("prototile_decomposition: empty patch");
    Decomposition out;
    std::vector<int> first_seen;
    std::vector<int> input_labels;
    for (std::size_t t = 0; t < tiles.size(); ++t) {
        const RawTile& rt = tiles[t];
        Vec anchor = rt.support.bbox().lo;
        int found = -1;
        for (std::size_t p = 0; p < input_labels.size(); ++p)
            if (input_labels[p] == rt.label) {
                found = static_cast<int>(p);
                break;
            }
        Region canon = rt.support.translated(-anchor);
        if (found < 0) {
            Prototile proto;
            proto.name = "t" + std::to_string(rt.label);
            proto.shape = canon;
            out.prototiles.push_back(proto);
            first_seen.push_back(static_cast<int>(t));
            input_labels.push_back(rt.label);
            found = static_cast<int>(out.prototiles.size()) - 1;
        } else {
            double d = hausdorff_distance(out.prototiles[static_cast<std::size_t>(found)].shape, canon);
            if (d > 2 * h * std::sqrt(double(canon.dim)))
                throw LabelGeometryMismatchError(
                    "two tiles share label " + std::to_string(rt.label) +
                    " but are not translates (hausdorff " + std::to_string(d) + ")");
        }
        PlacedTile pt;
        pt.label = found;
        pt.pos = anchor;
        out.placements.tiles.push_back(pt);
    }
    out.multiset.points.resize(out.prototiles.size());
    for (const PlacedTile& pt : out.placements.tiles)
        out.multiset.points[static_cast<std::size_t>(pt.label)].push_back(pt.pos);
    return out;
}

TileMetrics tile_metrics(const TilingWindow& win) {
    TileMetrics m;
    m.d_M = win.max_tile_diameter();
    m.eta = win.min_tile_inradius();
    return m;
}

DeloneMultiset delone_multiset(const TilingWindow& win) {
    DeloneMultiset ms;
    ms.points.resize(win.prototiles.size());
    for (const PlacedTile& pt : win.patch.tiles)
        ms.points[static_cast<std::size_t>(pt.label)].push_back(pt.pos);
    double min_gap = std::numeric_limits<double>::infinity();
    for (auto& pts : ms.points) {
        std::vector<Vec> sorted = pts;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Vec& a, const Vec& b) { return lex_less(a, b); });
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
            for (std::size_t j = i + 1; j < std::min(sorted.size(), i + 8); ++j)
                min_gap = std::min(min_gap, dist(sorted[i], sorted[j]));
    }
    ms.r_pack = std::isfinite(min_gap) ? 0.5 * min_gap : 0.0;
    double cov = 0;
    for (int t = 0; t < win.tile_count(); ++t) {
        Box b = win.tile_bbox(t);
        for (int mask = 0; mask < (1 << win.dim); ++mask) {
            Vec corner(win.dim);
            for (int a = 0; a < win.dim; ++a) corner.c[a] = (mask >> a & 1) ? b.hi[a] : b.lo[a];
            if (!win.ball_inside_valid(corner, 0)) continue;
            double best = std::numeric_limits<double>::infinity();
            for (int s : win.tiles_meeting_ball(corner, win.max_tile_diameter()))
                best = std::min(best, dist(corner, win.tile(s).pos));
            if (std::isfinite(best)) cov = std::max(cov, best);
        }
    }
    ms.r_cov = cov;
    return ms;
}

AnchoredPatch anchored_patch_key(const Patch& p, double q, const std::vector<std::string>* label_keys) {
    AnchoredPatch out;
    if (p.tiles.empty()) {
        out.key = "[]";
        return out;
    }
    int least_label = p.tiles[0].label;
    for (const PlacedTile& t : p.tiles) least_label = std::min(least_label, t.label);
    bool first = true;
    for (const PlacedTile& t : p.tiles) {
        if (t.label != least_label) continue;
        if (first || lex_less(t.pos, out.anchor)) out.anchor = t.pos;
        first = false;
    }
    std::vector<std::string> parts;
    parts.reserve(p.tiles.size());
    for (std::size_t i = 0; i < p.tiles.size(); ++i) {
        const PlacedTile& t = p.tiles[i];
        CellKey ck = quantize(t.pos - out.anchor, q);
        std::ostringstream ss;
        if (label_keys)
            ss << (*label_keys)[static_cast<std::size_t>(t.label)];
        else
            ss << t.label;
        ss << ':';
        for (int a = 0; a < t.pos.dim; ++a) ss << ck.k[a] << (a + 1 < t.pos.dim ? "," : "");
        if (static_cast<int>(i) == p.marked) ss << "*";
        parts.push_back(ss.str());
    }
    std::sort(parts.begin(), parts.end());
    std::string key = "[";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        key += parts[i];
        if (i + 1 < parts.size()) key += ";";
    }
    key += "]";
    out.key = key;
    return out;
}

std::optional<Vec> patch_equivalent(const TilingWindow& win, const Patch& p1, const Patch& p2) {
    if (p1.tiles.size() != p2.tiles.size()) return std::nullopt;
    if (p1.tiles.empty()) return Vec::zero(win.dim);
    if ((p1.marked >= 0) != (p2.marked >= 0)) return std::nullopt;
    AnchoredPatch a1 = anchored_patch_key(p1, win.h);
    AnchoredPatch a2 = anchored_patch_key(p2, win.h);
    Vec g = a2.anchor - a1.anchor;
    // full verification at tolerance (the keys alone can split on half-grid
    // rounding, so verify geometrically)
    for (const PlacedTile& t : p1.tiles) {
        bool ok = false;
        for (const PlacedTile& s : p2.tiles)
            if (s.label == t.label && approx_eq(s.pos, t.pos + g, 0.75 * win.h)) {
                ok = true;
                break;
            }
        if (!ok) return std::nullopt;
    }
    if (p1.marked >= 0) {
        const PlacedTile& m1 = p1.tiles[static_cast<std::size_t>(p1.marked)];
        const PlacedTile& m2 = p2.tiles[static_cast<std::size_t>(p2.marked)];
        if (m1.label != m2.label || !approx_eq(m1.pos + g, m2.pos, 0.75 * win.h)) return std::nullopt;
    }
    return g;
}

std::vector<Vec> find_occurrences(const TilingWindow& win, const Patch& p) {
    std::vector<Vec> out;
    if (p.tiles.empty()) return out;
    AnchoredPatch ap = anchored_patch_key(p, win.h);
    int least_label = p.tiles[0].label;
    for (const PlacedTile& t : p.tiles) least_label = std::min(least_label, t.label);
    for (const PlacedTile& cand : win.patch.tiles) {
        if (cand.label != least_label) continue;
        Vec g = cand.pos - ap.anchor;
        bool ok = true;
        for (const PlacedTile& t : p.tiles) {
            if (!win.find_tile(t.label, t.pos + g)) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(g);
    }
    return out;
}

RepetitivityEstimate repetitivity_radius(const TilingWindow& win, const Patch& p,
                                         double sample_spacing) {
    RepetitivityEstimate est;
    std::vector<Vec> occ = find_occurrences(win, p);
    if (occ.empty()) throw PatchNotFoundError("repetitivity_radius: patch does not occur in window");

    std::vector<Vec> corners;
    for (const PlacedTile& t : p.tiles) {
        Box b = win.prototiles[static_cast<std::size_t>(t.label)].shape.bbox();
        for (int mask = 0; mask < (1 << win.dim); ++mask) {
            Vec c(win.dim);
            for (int a = 0; a < win.dim; ++a) c.c[a] = (mask >> a & 1) ? b.hi[a] : b.lo[a];
            corners.push_back(c + t.pos);
        }
    }
    auto enclosing_radius = [&](const Vec& x, const Vec& g) {
        double worst = 0;
        for (const Vec& c : corners) worst = std::max(worst, dist(x, c + g));
        return worst;
    };

    double patch_rad = 0;
    for (const Vec& c : corners) patch_rad = std::max(patch_rad, dist(c, corners[0]));
    double margin = patch_rad + win.max_tile_diameter();
    double avail = win.radius - margin;
    if (avail <= 0 || occ.size() == 1) {
        est.degenerate = true;
        est.lower = est.upper = win.radius;
        est.witness = win.center;
        return est;
    }
    double spacing = sample_spacing > 0 ? sample_spacing : std::max(win.h * 16, avail / 256);
    double worst = 0;
    Vec worst_x = win.center;
    std::int64_t steps = static_cast<std::int64_t>(std::floor(avail / spacing));
    std::int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int a = 0; a < win.dim; ++a) {
        lo[a] = -steps;
        hi[a] = steps;
    }
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
        for (std::int64_t y = lo[1]; y <= hi[1]; ++y)
            for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
                Vec s = win.center;
                double off[3] = {double(x), double(y), double(z)};
                for (int a = 0; a < win.dim; ++a) s.c[a] += off[a] * spacing;
                if (dist(s, win.center) > avail) continue;
                double best = std::numeric_limits<double>::infinity();
                for (const Vec& g : occ) best = std::min(best, enclosing_radius(s, g));
                if (best > worst) {
                    worst = best;
                    worst_x = s;
                }
            }
    est.lower = worst;
    est.upper = worst + spacing * std::sqrt(double(win.dim));
    est.witness = worst_x;
    return est;
}

TilingWindow transform_window(const Mat& map, const TilingWindow& win) {
    TilingWindow out;
    out.dim = win.dim;
    out.h = win.h;
    std::vector<Vec> anchors;
    for (const Prototile& p : win.prototiles) {
        Prototile q = p;
        // keep the anchored-at-min-corner convention: map, then re-anchor
        Region mapped = p.shape.mapped(map);
        Vec anchor = mapped.bbox().lo;
        anchors.push_back(anchor);
        q.shape = mapped.translated(-anchor);
        out.prototiles.push_back(q);
    }
    out.patch.marked = win.patch.marked;
    for (const PlacedTile& t : win.patch.tiles) {
        PlacedTile s = t;
        // support = shape + pos maps to mapped(shape) + map(pos)
        s.pos = apply(map, t.pos) + anchors[static_cast<std::size_t>(t.label)];
        out.patch.tiles.push_back(s);
    }
    out.center = apply(map, win.center);
    out.radius = sigma_min(map) * win.radius;
    out.finalize();
    return out;
}

void write_window(std::ostream& os, const TilingWindow& win) {
    os.precision(17);
    os << "tiling-window v1\n";
    os << "dim " << win.dim << "\n";
    os << "h " << win.h << "\n";
    os << "valid";
    for (int a = 0; a < win.dim; ++a) os << " " << win.center[a];
    os << " " << win.radius << "\n";
    os << "labels " << win.prototiles.size() << "\n";
    for (std::size_t i = 0; i < win.prototiles.size(); ++i) {
        const Prototile& p = win.prototiles[i];
        os << "prototile " << i << " " << (p.name.empty() ? "t" + std::to_string(i) : p.name) << "\n";
        write_region(os, p.shape);
    }
    for (const PlacedTile& t : win.patch.tiles) {
        os << "place " << t.label;
        for (int a = 0; a < win.dim; ++a) os << " " << t.pos[a];
        os << "\n";
    }
    os << "end\n";
}

TilingWindow read_window(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("tiling-window", 0) != 0)
        throw std::runtime_error("window: bad header");
    TilingWindow w;
    while (std::getline(is, line)) {
        if (line == "end") break;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "dim") {
            ss >> w.dim;
            w.center = Vec::zero(w.dim);
        } else if (tok == "h") {
            ss >> w.h;
        } else if (tok == "valid") {
            w.center = Vec::zero(w.dim);
            for (int a = 0; a < w.dim; ++a) ss >> w.center.c[a];
            ss >> w.radius;
        } else if (tok == "labels") {
            std::size_t n;
            ss >> n;
            w.prototiles.resize(n);
        } else if (tok == "prototile") {
            std::size_t idx;
            std::string name;
            ss >> idx >> name;
            Prototile p;
            p.name = name;
            p.shape = read_region(is);
            p.shape.h = w.h;
            if (idx >= w.prototiles.size()) w.prototiles.resize(idx + 1);
            w.prototiles[idx] = p;
        } else if (tok == "place") {
            PlacedTile t;
            ss >> t.label;
            t.pos = Vec::zero(w.dim);
            for (int a = 0; a < w.dim; ++a) ss >> t.pos.c[a];
            w.patch.tiles.push_back(t);
        }
    }
    w.finalize();
    return w;
}

}  // namespace tilekit
