#include "tilekit/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "tilekit/expansion.hpp"

namespace tilekit {

LocatorSet locator_set(const TilingWindow& win, double r) {
    LocatorSet out;
    out.r = r;
    Vec origin = Vec::zero(win.dim);
    double dM = win.max_tile_diameter();
    if (!win.ball_inside_valid(origin, r + dM))
        throw OriginOutsideError("locator_set: N_r(0) plus margin exceeds the valid ball");
    std::vector<int> ts = win.tiles_meeting_ball(origin, r);
    for (int t : ts) out.base.tiles.push_back(win.tile(t));
    if (out.base.tiles.empty()) throw OriginOutsideError("locator_set: empty base patch");

    // base patch circumradius about 0, for the scan margin
    double rad = 0;
    for (const PlacedTile& t : out.base.tiles) {
        Box b = win.prototiles[static_cast<std::size_t>(t.label)].shape.bbox();
        for (int mask = 0; mask < (1 << win.dim); ++mask) {
            Vec c(win.dim);
            for (int a = 0; a < win.dim; ++a) c.c[a] = ((mask >> a & 1) ? b.hi[a] : b.lo[a]) + t.pos[a];
            rad = std::max(rad, norm(c));
        }
    }
    out.scan_radius = win.radius - rad - dM - 2 * win.h;
    if (out.scan_radius <= 0) throw OriginOutsideError("locator_set: window too small to scan");

    // candidates from anchor-label occurrences; q = candidate - anchor
    int least_label = out.base.tiles[0].label;
    for (const PlacedTile& t : out.base.tiles) least_label = std::min(least_label, t.label);
    Vec anchor;
    bool first = true;
    for (const PlacedTile& t : out.base.tiles) {
        if (t.label != least_label) continue;
        if (first || lex_less(t.pos, anchor)) anchor = t.pos;
        first = false;
    }
    for (const PlacedTile& cand : win.patch.tiles) {
        if (cand.label != least_label) continue;
        Vec g = cand.pos - anchor;
        if (norm(g) > out.scan_radius) continue;
        bool ok = true;
        for (const PlacedTile& t : out.base.tiles)
            if (!win.find_tile(t.label, t.pos + g)) {
                ok = false;
                break;
            }
        if (ok) out.q.push_back(g);
    }
    std::sort(out.q.begin(), out.q.end(), [](const Vec& a, const Vec& b) { return lex_less(a, b); });
    return out;
}

DerivedVoronoiTiling derived_voronoi(const TilingWindow& win, double r, double R_r) {
    LocatorSet ls = locator_set(win, r);
    if (ls.q.size() < 2) throw DegenerateLocatorsError("derived_voronoi: fewer than 2 locators");

    DerivedVoronoiTiling out;
    out.r = r;
    out.locators = ls.q;
    out.center = Vec::zero(win.dim);

    if (R_r <= 0) {
        RepetitivityEstimate est = repetitivity_radius(win, ls.base);
        R_r = est.upper;
    }
    out.R_r = R_r;

    // labels: class of the radius-2R(r) patch around each locator, marked by
    // the locator position (over-refinement is harmless and keeps the class
    // locally derivable)
    double label_margin = 2 * R_r + win.max_tile_diameter() + 2 * win.h;
    out.radius = std::min(ls.scan_radius, win.radius - label_margin);
    std::map<std::string, int> class_of;
    for (const Vec& q : ls.q) {
        // locators whose label patch exceeds the certified region keep the
        // sentinel -1 rather than minting a spurious class
        if (!win.ball_inside_valid(q, 2 * R_r + win.max_tile_diameter())) {
            out.labels.push_back(-1);
            continue;
        }
        std::vector<int> ts = win.tiles_meeting_ball(q, 2 * R_r);
        Patch p;
        for (int t : ts) p.tiles.push_back(win.tile(t));
        AnchoredPatch ap = anchored_patch_key(p, win.h);
        CellKey off = quantize(q - ap.anchor, win.h);
        std::ostringstream ss;
        ss << ap.key << "@";
        for (int a = 0; a < win.dim; ++a) ss << off.k[a] << ",";
        std::string key = ss.str();
        auto it = class_of.find(key);
        int label;
        if (it == class_of.end()) {
            label = static_cast<int>(class_of.size());
            class_of[key] = label;
        } else {
            label = it->second;
        }
        out.labels.push_back(label);
    }
    out.label_keys.resize(class_of.size());
    for (const auto& kv : class_of) out.label_keys[static_cast<std::size_t>(kv.second)] = kv.first;

    // cells
    if (win.dim == 1) {
        // exact midpoint intervals, clipped to the certified region
        std::vector<std::size_t> order(ls.q.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return ls.q[a][0] < ls.q[b][0]; });
        out.cells.resize(ls.q.size());
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            double q = ls.q[order[oi]][0];
            double lo = (oi == 0) ? -out.radius : 0.5 * (ls.q[order[oi - 1]][0] + q);
            double hi = (oi + 1 == order.size()) ? out.radius : 0.5 * (q + ls.q[order[oi + 1]][0]);
            lo = std::max(lo, -out.radius);
            hi = std::min(hi, out.radius);
            if (hi > lo)
                out.cells[order[oi]] = Region::from_primitives(1, {Primitive::interval(lo, hi)}, win.h);
        }
        return out;
    }

    // d >= 2: raster nearest-neighbour cells over the certified ball
    double h = win.h;
    Box bb{Vec(win.dim), Vec(win.dim)};
    for (int a = 0; a < win.dim; ++a) {
        bb.lo.c[a] = -out.radius;
        bb.hi.c[a] = out.radius;
    }
    Raster grid;
    grid.dim = win.dim;
    grid.h = h;
    for (int a = 0; a < 3; ++a) {
        if (a < win.dim) {
            grid.lo[a] = static_cast<std::int64_t>(std::floor(bb.lo[a] / h)) - 1;
            grid.n[a] = static_cast<std::int64_t>(std::ceil(bb.hi[a] / h)) + 2 - grid.lo[a];
        } else {
            grid.lo[a] = 0;
            grid.n[a] = 1;
        }
    }
    std::vector<Raster> cell_rasters(ls.q.size());
    for (auto& cr : cell_rasters) {
        cr = grid;
        cr.occ.assign(static_cast<std::size_t>(grid.cell_count()), 0);
    }
    for (std::int64_t kk = grid.lo[2]; kk < grid.lo[2] + grid.n[2]; ++kk)
        for (std::int64_t jj = grid.lo[1]; jj < grid.lo[1] + grid.n[1]; ++jj)
            for (std::int64_t ii = grid.lo[0]; ii < grid.lo[0] + grid.n[0]; ++ii) {
                Vec c = grid.center(ii, jj, kk);
                if (norm(c) > out.radius) continue;
                double best = std::numeric_limits<double>::infinity();
                std::size_t who = 0;
                for (std::size_t qi = 0; qi < ls.q.size(); ++qi) {
                    double d = dist(c, ls.q[qi]);
                    if (d < best - 1e-12 ||
                        (std::abs(d - best) <= 1e-12 && lex_less(ls.q[qi], ls.q[who]))) {
                        best = d;
                        who = qi;
                    }
                }
                cell_rasters[who].set(ii, jj, kk, true);
            }
    out.cells.resize(ls.q.size());
    for (std::size_t qi = 0; qi < ls.q.size(); ++qi) {
        Raster crop = cell_rasters[qi].cropped();
        if (crop.cell_count() > 0) out.cells[qi] = Region::from_raster(crop);
    }
    return out;
}

namespace {

// Compare two derived tilings (already rescaled to a common frame) up to a
// label bijection: locator sets must coincide inside the common ball and the
// induced label map must be a consistent bijection.
bool tilings_match(const DerivedVoronoiTiling& a, const DerivedVoronoiTiling& b, double tol) {
    double rho = std::min(a.radius, b.radius) * 0.9;
    if (rho <= 0) return false;
    std::vector<std::size_t> ia, ib;
    for (std::size_t i = 0; i < a.locators.size(); ++i)
        if (norm(a.locators[i]) <= rho) ia.push_back(i);
    for (std::size_t i = 0; i < b.locators.size(); ++i)
        if (norm(b.locators[i]) <= rho) ib.push_back(i);
    if (ia.size() != ib.size() || ia.empty()) return false;
    auto cmp_a = [&](std::size_t x, std::size_t y) { return lex_less(a.locators[x], a.locators[y]); };
    auto cmp_b = [&](std::size_t x, std::size_t y) { return lex_less(b.locators[x], b.locators[y]); };
    std::sort(ia.begin(), ia.end(), cmp_a);
    std::sort(ib.begin(), ib.end(), cmp_b);
    std::map<int, int> fwd, bwd;
    for (std::size_t t = 0; t < ia.size(); ++t) {
        if (!approx_eq(a.locators[ia[t]], b.locators[ib[t]], tol)) return false;
        int la = a.labels[ia[t]], lb = b.labels[ib[t]];
        if (la < 0 || lb < 0) return false;  // uncertified labels cannot match
        auto f = fwd.find(la);
        if (f == fwd.end()) {
            fwd[la] = lb;
        } else if (f->second != lb) {
            return false;
        }
        auto g = bwd.find(lb);
        if (g == bwd.end()) {
            bwd[lb] = la;
        } else if (g->second != la) {
            return false;
        }
    }
    return true;
}

DerivedVoronoiTiling rescale(const DerivedVoronoiTiling& t, const Mat& inv_pow, double ratio_pow) {
    DerivedVoronoiTiling out;
    out.r = t.r / ratio_pow;
    out.R_r = t.R_r / ratio_pow;
    out.labels = t.labels;
    out.label_keys = t.label_keys;
    out.center = apply(inv_pow, t.center);
    out.radius = t.radius / ratio_pow;
    for (const Vec& q : t.locators) out.locators.push_back(apply(inv_pow, q));
    // cell geometry is implied by the locators; matching compares locators
    // and labels, so cells are not rescaled here
    return out;
}

}  // namespace

PsiFinitenessResult psi_finiteness_probe(const TilingWindow& win, const Mat& psi, double r0,
                                         int levels, int M) {
    PsiFinitenessResult res;
    res.report.stage = "psi-finiteness";
    res.report.anchor = "check:psi-finiteness";
    double smin = sigma_min(psi), smax = sigma_max(psi);
    if (smin <= 1.0) throw std::invalid_argument("psi_finiteness_probe: psi must expand");
    if (smax / smin > 1.0 + 1e-9)
        throw std::invalid_argument("psi_finiteness_probe: psi must be a similitude");
    double s = smax;
    res.report.config["ratio"] = s;
    res.report.config["levels"] = levels;
    res.report.config["M"] = M;
    res.report.metrics["det_sign"] = det(psi) > 0 ? 1 : -1;

    // level-0 repetitivity estimate, scaled to deeper levels (exact scaling
    // for similitudes; re-estimating per level can over-refine labels)
    DerivedVoronoiTiling t0 = derived_voronoi(win, r0);
    double R0 = t0.R_r;

    std::vector<DerivedVoronoiTiling> bases;
    std::vector<int> base_level;
    Mat inv = inverse(psi);
    double tol = 4 * win.h;
    for (int j = 0; j <= levels; ++j) {
        double rj = r0 * std::pow(s, j);
        DerivedVoronoiTiling tj = (j == 0) ? t0 : derived_voronoi(win, rj, R0 * std::pow(s, j));
        Mat inv_pow = mat_pow(inv, j);
        DerivedVoronoiTiling rescaled = rescale(tj, inv_pow, std::pow(s, j));
        int match = -1;
        for (std::size_t b = 0; b < bases.size(); ++b)
            if (tilings_match(rescaled, bases[b], tol)) {
                match = static_cast<int>(b);
                break;
            }
        if (match < 0) {
            if (static_cast<int>(bases.size()) < M) {
                bases.push_back(rescaled);
                base_level.push_back(j);
                match = static_cast<int>(bases.size()) - 1;
            } else {
                res.first_unmatched_level = j;
                res.base_of_level.push_back(-1);
                nlohmann::json w;
                w["unmatched_level"] = j;
                w["r"] = rj;
                res.report.fail_with(w);
                break;
            }
        }
        res.base_of_level.push_back(match);
        res.report.metrics["level_" + std::to_string(j) + "_base"] = match;
        res.report.metrics["level_" + std::to_string(j) + "_locators"] =
            static_cast<double>(tj.locators.size());
    }
    res.bases_used = static_cast<int>(bases.size());
    res.report.metrics["bases_used"] = res.bases_used;
    res.report.metrics["levels_matched"] =
        static_cast<double>(res.base_of_level.size() - (res.first_unmatched_level >= 0 ? 1 : 0));
    return res;
}

}  // namespace tilekit
