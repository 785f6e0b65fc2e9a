#include "tilekit/selfaffinize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace tilekit {

int choose_k(double lambda, double eta, double d_M) {
    if (lambda <= 1 || eta <= 0 || d_M <= 0) throw std::invalid_argument("choose_k: bad metrics");
    double threshold = 2.0 + d_M / eta;
    double pw = lambda;
    for (int k = 1; k <= 256; ++k) {
        if (pw > threshold) return k;
        pw *= lambda;
    }
    throw std::runtime_error("choose_k: no k <= 256 satisfies the bound");
}

double collar_radius(double R_ld, double lambda, double d_M) {
    if (lambda <= 1) throw std::invalid_argument("collar_radius: lambda must be > 1");
    return R_ld * lambda / ((lambda - 1) * (lambda - 1)) + d_M / (lambda - 1);
}

namespace {

// distance from p to the boundary network near p (min over nearby tiles of the
// distance to that tile's support boundary)
double boundary_network_distance(const TilingWindow& win, const Vec& p) {
    double dM = win.max_tile_diameter();
    double best = std::numeric_limits<double>::infinity();
    for (int t : win.tiles_meeting_ball(p, dM)) {
        const PlacedTile& pt = win.tile(t);
        const Region& shape = win.prototiles[static_cast<std::size_t>(pt.label)].shape;
        best = std::min(best, shape.boundary_distance(p - pt.pos));
    }
    return best;
}

}  // namespace

TilingWindow collar_recode(const TilingWindow& win, double L, int max_labels) {
    double dM = win.max_tile_diameter();
    // a tile meeting the new ball has support within new_radius + d_M, and its
    // L-collar query needs another d_M of completeness margin inside `win`
    double slack = 8 * win.h * std::sqrt(double(win.dim));
    double new_radius = win.radius - L - 2 * dM - slack;
    if (new_radius <= dM) throw WindowTooSmallError("collar_recode: valid radius would vanish");

    // base-label view of the window, so recoding is idempotent
    std::vector<int> base_of(win.prototiles.size());
    std::vector<std::string> base_keys(win.prototiles.size());
    for (std::size_t i = 0; i < win.prototiles.size(); ++i) {
        base_of[i] = win.prototiles[i].base >= 0 ? win.prototiles[i].base : static_cast<int>(i);
        base_keys[i] = "b" + std::to_string(base_of[i]);
    }

    struct NewLabel {
        int old_label;
        std::string key;
    };
    std::map<std::string, int> class_of;
    std::vector<NewLabel> classes;
    TilingWindow out;
    out.dim = win.dim;
    out.h = win.h;
    out.center = win.center;
    out.radius = new_radius;

    for (int t = 0; t < win.tile_count(); ++t) {
        const PlacedTile& pt = win.tile(t);
        Box b = win.tile_bbox(t);
        Vec mid = 0.5 * (b.lo + b.hi);
        double rad = 0.5 * b.diameter();
        if (dist(mid, win.center) + rad > new_radius + dM) continue;
        Region nb = neighborhood(win.tile_support(t), L);
        Patch collar = patch_of(win, nb);
        // anchored at the marked tile; labels replaced by base labels
        std::vector<std::string> parts;
        for (const PlacedTile& s : collar.tiles) {
            CellKey ck = quantize(s.pos - pt.pos, win.h);
            std::ostringstream ss;
            ss << base_keys[static_cast<std::size_t>(s.label)] << ':';
            for (int a = 0; a < win.dim; ++a) ss << ck.k[a] << ",";
            parts.push_back(ss.str());
        }
        std::sort(parts.begin(), parts.end());
        std::string key = base_keys[static_cast<std::size_t>(pt.label)] + "|";
        for (const std::string& s : parts) key += s + ";";

        auto it = class_of.find(key);
        int label;
        if (it == class_of.end()) {
            label = static_cast<int>(classes.size());
            class_of[key] = label;
            classes.push_back({pt.label, key});
            if (static_cast<int>(classes.size()) > max_labels)
                throw LabelBudgetError("collar_recode: more than " + std::to_string(max_labels) +
                                       " collar classes");
        } else {
            label = it->second;
        }
        PlacedTile nt;
        nt.label = label;
        nt.pos = pt.pos;
        out.patch.tiles.push_back(nt);
    }
    if (out.patch.tiles.empty()) throw WindowTooSmallError("collar_recode: no tiles survived");

    // order classes by key so labels are stable across runs and windows
    std::vector<int> order(classes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return classes[static_cast<std::size_t>(a)].key < classes[static_cast<std::size_t>(b)].key; });
    std::vector<int> rank(classes.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    for (PlacedTile& t : out.patch.tiles) t.label = rank[static_cast<std::size_t>(t.label)];
    out.prototiles.resize(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const NewLabel& nl = classes[i];
        Prototile p;
        p.shape = win.prototiles[static_cast<std::size_t>(nl.old_label)].shape;
        p.base = base_of[static_cast<std::size_t>(nl.old_label)];
        p.key = nl.key;
        std::ostringstream nm;
        nm << "c" << std::hex << fnv1a(nl.key);
        p.name = nm.str();
        out.prototiles[static_cast<std::size_t>(rank[i])] = p;
    }
    out.finalize();
    return out;
}

ReferencePoints choose_reference_points(const TilingWindow& win, const Mat& phi_k, int k,
                                        double delta_min, int grid_per_axis) {
    ReferencePoints refs;
    refs.k = k;
    refs.delta = std::numeric_limits<double>::infinity();
    Mat inv = inverse(phi_k);
    int m = win.label_count();
    refs.c.resize(static_cast<std::size_t>(m));

    // positions per label
    std::vector<std::vector<Vec>> lambda(static_cast<std::size_t>(m));
    for (const PlacedTile& t : win.patch.tiles) lambda[static_cast<std::size_t>(t.label)].push_back(t.pos);

    for (int i = 0; i < m; ++i) {
        const Region& shape = win.prototiles[static_cast<std::size_t>(i)].shape;
        Box bb = shape.bbox();
        double best = -1;
        Vec best_c = bb.lo;
        double jitter = std::fmod(0.6180339887498949 * (i + 1), 1.0);
        std::int64_t steps[3] = {1, 1, 1};
        for (int a = 0; a < win.dim; ++a) steps[a] = grid_per_axis;
        for (std::int64_t z = 0; z < steps[2]; ++z)
            for (std::int64_t y = 0; y < steps[1]; ++y)
                for (std::int64_t x = 0; x < steps[0]; ++x) {
                    Vec c(win.dim);
                    double idx[3] = {double(x), double(y), double(z)};
                    for (int a = 0; a < win.dim; ++a)
                        c.c[a] = bb.lo[a] +
                                 (idx[a] + 0.5 + 0.25 * jitter) / (steps[a] + 0.5) * (bb.hi[a] - bb.lo[a]);
                    if (!shape.contains(c, 0.0)) continue;
                    double clear = shape.boundary_distance(c);
                    if (clear <= best) continue;
                    for (const Vec& g : lambda[static_cast<std::size_t>(i)]) {
                        Vec p = apply(inv, c + g);
                        if (!win.ball_inside_valid(p, win.h)) continue;  // constraint not visible
                        clear = std::min(clear, boundary_network_distance(win, p));
                        if (clear <= best) break;
                    }
                    if (clear > best) {
                        best = clear;
                        best_c = c;
                    }
                }
        if (best < delta_min)
            throw NoClearPointError("no reference point with clearance >= " +
                                    std::to_string(delta_min) + " for label " + std::to_string(i) +
                                    " (best " + std::to_string(best) + ")");
        if (best < win.h) {
            nlohmann::json w;
            w["label"] = i;
            w["clearance"] = best;
            w["note"] = "clearance below one raster cell";
            refs.warnings.push_back(w);
        }
        refs.c[static_cast<std::size_t>(i)] = best_c;
        refs.delta = std::min(refs.delta, best);
    }
    return refs;
}

PseudoSubstitution build_pseudo_substitution(const TilingWindow& win, const Mat& phi_k, int k,
                                             const ReferencePoints& refs) {
    PseudoSubstitution ps;
    ps.k = k;
    ps.phi_k = phi_k;
    ps.refs = refs;
    int m = win.label_count();
    ps.children.resize(static_cast<std::size_t>(m));
    Mat inv = inverse(phi_k);
    double dM = win.max_tile_diameter();

    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (int t = 0; t < win.tile_count(); ++t) {
        const PlacedTile& parent = win.tile(t);
        const Region& shape = win.prototiles[static_cast<std::size_t>(parent.label)].shape;
        Box bb = shape.bbox();
        // image of the parent support under phi^k must fit in the window with
        // a one-tile margin, else children may be missing
        Vec corners_mid(win.dim);
        double rad = 0;
        {
            Box ib{Vec(win.dim), Vec(win.dim)};
            bool first = true;
            for (int mask = 0; mask < (1 << win.dim); ++mask) {
                Vec c(win.dim);
                for (int a = 0; a < win.dim; ++a)
                    c.c[a] = ((mask >> a & 1) ? bb.hi[a] : bb.lo[a]) + parent.pos[a];
                Vec q = apply(phi_k, c);
                if (first) {
                    ib.lo = q;
                    ib.hi = q;
                    first = false;
                } else {
                    for (int a = 0; a < win.dim; ++a) {
                        ib.lo.c[a] = std::min(ib.lo[a], q[a]);
                        ib.hi.c[a] = std::max(ib.hi[a], q[a]);
                    }
                }
            }
            corners_mid = 0.5 * (ib.lo + ib.hi);
            rad = 0.5 * ib.diameter();
        }
        if (!win.ball_inside_valid(corners_mid, rad + dM + 2 * win.h)) continue;

        PseudoSubstitution::Occurrence occ;
        occ.label = parent.label;
        occ.parent_tile = t;
        occ.pos = parent.pos;
        Vec shift = apply(phi_k, parent.pos);
        for (int s : win.tiles_meeting_ball(corners_mid, rad + dM)) {
            const PlacedTile& child = win.tile(s);
            Vec ref = refs.c[static_cast<std::size_t>(child.label)] + child.pos;
            Vec p = apply(inv, ref) - parent.pos;
            if (!shape.contains(p, 0.0)) continue;
            double bd = shape.boundary_distance(p);
            if (bd <= 0.0) continue;  // on the boundary: not interior
            occ.child_tiles.push_back(s);
            PlacedTile normal;
            normal.label = child.label;
            normal.pos = child.pos - shift;
            occ.normal.push_back(normal);
        }
        std::sort(occ.normal.begin(), occ.normal.end(), [](const PlacedTile& a, const PlacedTile& b) {
            if (a.label != b.label) return a.label < b.label;
            return lex_less(a.pos, b.pos);
        });
        if (occ.normal.empty())
            throw EmptyImageError("f(T) empty for an occurrence of label " +
                                  std::to_string(parent.label) + " (k too small?)");
        if (!seen[static_cast<std::size_t>(parent.label)]) {
            seen[static_cast<std::size_t>(parent.label)] = true;
            ps.children[static_cast<std::size_t>(parent.label)] = occ.normal;
        }
        ps.occurrences.push_back(std::move(occ));
    }
    for (int i = 0; i < m; ++i)
        if (!seen[static_cast<std::size_t>(i)])
            throw WindowTooSmallError("no occurrence of label " + std::to_string(i) +
                                      " is processable at k = " + std::to_string(k));
    return ps;
}

VerificationReport verify_S1_S4(const PseudoSubstitution& ps, const TilingWindow& win) {
    VerificationReport rep;
    rep.stage = "pseudo-substitution";
    rep.anchor = "check:s1-s4";
    rep.config["k"] = ps.k;
    double tol = 0.5 * win.h;
    int m = win.label_count();

    // (S1): identical normalized children across occurrences of a label
    int s1_viol = 0;
    for (const auto& occ : ps.occurrences) {
        const auto& want = ps.children[static_cast<std::size_t>(occ.label)];
        bool same = occ.normal.size() == want.size();
        for (std::size_t i = 0; same && i < want.size(); ++i)
            same = occ.normal[i].label == want[i].label &&
                   approx_eq(occ.normal[i].pos, want[i].pos, tol);
        if (!same) {
            ++s1_viol;
            if (rep.witnesses.size() < 8) {
                nlohmann::json w;
                w["check"] = "S1";
                w["label"] = occ.label;
                w["occurrence"] = std::vector<double>(occ.pos.c, occ.pos.c + win.dim);
                w["children_here"] = occ.normal.size();
                w["children_expected"] = want.size();
                rep.fail_with(w);
            }
        }
    }
    rep.metrics["s1_violations"] = s1_viol;

    // (S2): each eligible scaled tile claimed exactly once
    std::unordered_map<int, int> claims;
    for (const auto& occ : ps.occurrences)
        for (int s : occ.child_tiles) ++claims[s];
    int s2_viol = 0;
    for (const auto& kv : claims)
        if (kv.second != 1) {
            ++s2_viol;
            if (rep.witnesses.size() < 8) {
                nlohmann::json w;
                w["check"] = "S2";
                w["tile"] = kv.first;
                w["claims"] = kv.second;
                rep.fail_with(w);
            }
        }
    // coverage side of (S2): a tile whose scaled reference point lies in the
    // interior of a processed parent must have been claimed
    std::vector<char> processed(static_cast<std::size_t>(win.tile_count()), 0);
    for (const auto& occ : ps.occurrences)
        processed[static_cast<std::size_t>(occ.parent_tile)] = 1;
    Mat inv = inverse(ps.phi_k);
    for (int s = 0; s < win.tile_count(); ++s) {
        if (claims.count(s)) continue;
        const PlacedTile& child = win.tile(s);
        Vec ref = ps.refs.c[static_cast<std::size_t>(child.label)] + child.pos;
        Vec p = apply(inv, ref);
        if (!win.ball_inside_valid(p, 0)) continue;
        for (int t : win.tiles_at_point(p)) {
            if (!processed[static_cast<std::size_t>(t)]) continue;
            const PlacedTile& par = win.tile(t);
            const Region& shape = win.prototiles[static_cast<std::size_t>(par.label)].shape;
            if (shape.boundary_distance(p - par.pos) > 0) {
                ++s2_viol;
                if (rep.witnesses.size() < 8) {
                    nlohmann::json w;
                    w["check"] = "S2";
                    w["tile"] = s;
                    w["claims"] = 0;
                    w["parent"] = t;
                    rep.fail_with(w);
                }
                break;
            }
        }
    }
    rep.metrics["s2_violations"] = s2_viol;

    // (S3): every claimed child's scaled support meets its parent support;
    // true by the interior-reference-point rule, re-verified through the
    // reference points themselves
    int s3_viol = 0;
    for (int i = 0; i < m; ++i) {
        const Region& shape = win.prototiles[static_cast<std::size_t>(i)].shape;
        if (!shape.contains(ps.refs.c[static_cast<std::size_t>(i)], 0.0) ||
            shape.boundary_distance(ps.refs.c[static_cast<std::size_t>(i)]) <= 0) {
            ++s3_viol;
            nlohmann::json w;
            w["check"] = "S3";
            w["label"] = i;
            w["note"] = "reference point not interior to its prototile";
            rep.fail_with(w);
        }
    }
    rep.metrics["s3_violations"] = s3_viol;

    // (S4): a scaled tile whose support sits strictly inside a parent's
    // interior must belong to f(parent). Subset certified by sampling the
    // child's raster cells through phi^{-k}; a sample within h/2 of the
    // parent boundary voids the certificate (tolerance band).
    int s4_viol = 0;
    double dM = win.max_tile_diameter();
    for (const auto& occ : ps.occurrences) {
        const PlacedTile& parent = win.tile(occ.parent_tile);
        const Region& pshape = win.prototiles[static_cast<std::size_t>(parent.label)].shape;
        Box bb = pshape.bbox();
        Vec mid = 0.5 * (bb.lo + bb.hi) + parent.pos;
        double rad = 0.5 * bb.diameter();
        Vec smid = apply(ps.phi_k, mid);
        double srad = rad * sigma_max(ps.phi_k);
        std::vector<int> claimed = occ.child_tiles;
        std::sort(claimed.begin(), claimed.end());
        for (int s : win.tiles_meeting_ball(smid, srad + dM)) {
            Region child = win.tile_support(s);
            child.ensure_raster();
            const Raster& cr = child.raster;
            bool inside = true;
            for (std::int64_t kk = cr.lo[2]; kk < cr.lo[2] + cr.n[2] && inside; ++kk)
                for (std::int64_t jj = cr.lo[1]; jj < cr.lo[1] + cr.n[1] && inside; ++jj)
                    for (std::int64_t ii = cr.lo[0]; ii < cr.lo[0] + cr.n[0] && inside; ++ii) {
                        if (!cr.occ[cr.index(ii, jj, kk)]) continue;
                        Vec p = apply(inv, cr.center(ii, jj, kk)) - parent.pos;
                        if (!pshape.contains(p, 0.0) || pshape.boundary_distance(p) <= 0.5 * win.h)
                            inside = false;
                    }
            if (!inside) continue;
            if (!std::binary_search(claimed.begin(), claimed.end(), s)) {
                ++s4_viol;
                if (rep.witnesses.size() < 8) {
                    nlohmann::json w;
                    w["check"] = "S4";
                    w["parent"] = occ.parent_tile;
                    w["tile"] = s;
                    rep.fail_with(w);
                }
            }
        }
    }
    rep.metrics["s4_violations"] = s4_viol;
    rep.metrics["occurrences"] = static_cast<double>(ps.occurrences.size());
    if (s1_viol + s2_viol + s3_viol + s4_viol > 0) rep.status = VerificationReport::Status::Fail;
    return rep;
}

DigitSystem extract_digits(const PseudoSubstitution& ps, const TilingWindow& win,
                           const ExpansionMap& phi) {
    int m = win.label_count();
    double tol = 0.75 * win.h;
    // cross-occurrence consistency (an (S1) failure surfaces here as well)
    for (const auto& occ : ps.occurrences) {
        const auto& want = ps.children[static_cast<std::size_t>(occ.label)];
        bool same = occ.normal.size() == want.size();
        for (std::size_t i = 0; same && i < want.size(); ++i)
            same = occ.normal[i].label == want[i].label &&
                   approx_eq(occ.normal[i].pos, want[i].pos, tol);
        if (!same)
            throw InconsistentDigitsError("label " + std::to_string(occ.label) +
                                          " has occurrence-dependent children; recode first");
    }
    DigitSystem d;
    d.phi = phi;
    d.k = ps.k;
    d.m = m;
    d.D.assign(static_cast<std::size_t>(m), std::vector<std::vector<Vec>>(static_cast<std::size_t>(m)));
    for (int j = 0; j < m; ++j)
        for (const PlacedTile& c : ps.children[static_cast<std::size_t>(j)])
            d.D[static_cast<std::size_t>(c.label)][static_cast<std::size_t>(j)].push_back(c.pos);
    // guaranteed by the k bound: no empty column
    for (int j = 0; j < m; ++j) {
        std::size_t total = 0;
        for (int i = 0; i < m; ++i) total += d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].size();
        if (total == 0) throw EmptyImageError("empty digit column " + std::to_string(j));
    }
    return d;
}

}  // namespace tilekit
