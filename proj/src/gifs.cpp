#include "tilekit/gifs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tilekit {

namespace {

struct Enclosure {
    std::vector<Box> box;  // per label
};

// Interval-arithmetic hull map: E'_j = phi^{-k} hull(U_i (E_i + D_ij)).
// Contracts to an enclosure of the attractor family.
Enclosure enclosure_boxes(const DigitSystem& d) {
    int dim = d.phi.dim;
    Mat inv = inverse(d.effective());
    double maxd = 0;
    for (auto& row : d.D)
        for (auto& set : row)
            for (const Vec& v : set) maxd = std::max(maxd, max_abs(v));
    double s = 1.0 / d.lambda_k();
    double M = maxd * s / (1.0 - s) + 1.0;
    Enclosure e;
    for (int j = 0; j < d.m; ++j) {
        Box b{Vec(dim), Vec(dim)};
        for (int a = 0; a < dim; ++a) {
            b.lo.c[a] = -M;
            b.hi.c[a] = M;
        }
        e.box.push_back(b);
    }
    for (int round = 0; round < 120; ++round) {
        Enclosure nxt = e;
        for (int j = 0; j < d.m; ++j) {
            bool first = true;
            Box acc{Vec(dim), Vec(dim)};
            for (int i = 0; i < d.m; ++i)
                for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                    Box b = e.box[static_cast<std::size_t>(i)];
                    b.lo = b.lo + dig;
                    b.hi = b.hi + dig;
                    acc = first ? b : box_union(acc, b);
                    first = false;
                }
                if (first) continue;
            // map the hull through phi^{-k} via its corners
            Box mapped{Vec(dim), Vec(dim)};
            bool mf = true;
            for (int mask = 0; mask < (1 << dim); ++mask) {
                Vec c(dim);
                for (int a = 0; a < dim; ++a) c.c[a] = (mask >> a & 1) ? acc.hi[a] : acc.lo[a];
                Vec q = apply(inv, c);
                if (mf) {
                    mapped.lo = q;
                    mapped.hi = q;
                    mf = false;
                } else {
                    for (int a = 0; a < dim; ++a) {
                        mapped.lo.c[a] = std::min(mapped.lo[a], q[a]);
                        mapped.hi.c[a] = std::max(mapped.hi[a], q[a]);
                    }
                }
            }
            nxt.box[static_cast<std::size_t>(j)] = mapped;
        }
        e = nxt;
    }
    return e;
}

Raster make_grid(int dim, double h, const Box& b, double pad) {
    Raster r;
    r.dim = dim;
    r.h = h;
    for (int a = 0; a < 3; ++a) {
        if (a < dim) {
            r.lo[a] = static_cast<std::int64_t>(std::floor((b.lo[a] - pad) / h)) - 1;
            std::int64_t hi = static_cast<std::int64_t>(std::ceil((b.hi[a] + pad) / h)) + 1;
            r.n[a] = hi - r.lo[a];
        } else {
            r.lo[a] = 0;
            r.n[a] = 1;
        }
    }
    r.occ.assign(static_cast<std::size_t>(r.cell_count()), 0);
    return r;
}

}  // namespace

int adjoint_iteration_bound(double tol, double contraction, double diam0) {
    double target = tol * (1.0 - contraction) / std::max(diam0, 1e-12);
    if (target >= 1.0) return 1;
    return static_cast<int>(std::ceil(std::log(target) / std::log(contraction)));
}

PrototileSolution solve_adjoint(const DigitSystem& d, const std::vector<Region>* init, double tol,
                                int max_iter, double h) {
    int dim = d.phi.dim;
    Mat eff = d.effective();
    double contraction = 1.0 / d.lambda_k();
    if (contraction >= 1.0) throw std::invalid_argument("solve_adjoint: map does not contract");

    SubstitutionMatrix s = substitution_matrix(d);
    if (!is_primitive(s, 4 * d.m + 8))
        std::fputs("solve_adjoint: warning: substitution matrix not verifiably primitive\n", stderr);

    Enclosure enc = enclosure_boxes(d);
    double pad = 4 * h;
    std::vector<Region> cur;
    std::vector<Box> cur_box;
    if (init) {
        if (static_cast<int>(init->size()) != d.m)
            throw IndexMismatchError("solve_adjoint: init size mismatch");
        for (const Region& r : (*init)) {
            Region c = r;
            c.ensure_raster();
            cur.push_back(c);
            cur_box.push_back(c.bbox());
        }
    } else {
        for (int j = 0; j < d.m; ++j) {
            cur.push_back(Region::from_primitives(
                dim, {Primitive::box(enc.box[static_cast<std::size_t>(j)].lo,
                                     enc.box[static_cast<std::size_t>(j)].hi)},
                h));
            cur_box.push_back(enc.box[static_cast<std::size_t>(j)]);
        }
    }
    double budget = 1.0;
    for (const Box& b : cur_box) budget = std::max(budget, b.diameter());
    for (const Box& b : enc.box) budget = std::max(budget, b.diameter());
    budget = 8 * budget + 8;

    Mat inv = inverse(eff);
    // one step of the interval-arithmetic hull map, tracking the iterates'
    // own enclosure (inits larger than the attractor hull shrink into it)
    auto hull_step = [&](const std::vector<Box>& boxes) {
        std::vector<Box> out(static_cast<std::size_t>(d.m));
        for (int j = 0; j < d.m; ++j) {
            bool first = true;
            Box acc{Vec(dim), Vec(dim)};
            for (int i = 0; i < d.m; ++i)
                for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                    Box b = boxes[static_cast<std::size_t>(i)];
                    b.lo = b.lo + dig;
                    b.hi = b.hi + dig;
                    acc = first ? b : box_union(acc, b);
                    first = false;
                }
            Box mapped{Vec(dim), Vec(dim)};
            bool mf = true;
            for (int mask = 0; mask < (1 << dim); ++mask) {
                Vec c(dim);
                for (int a = 0; a < dim; ++a) c.c[a] = (mask >> a & 1) ? acc.hi[a] : acc.lo[a];
                Vec q = apply(inv, c);
                if (mf) {
                    mapped.lo = q;
                    mapped.hi = q;
                    mf = false;
                } else {
                    for (int a = 0; a < dim; ++a) {
                        mapped.lo.c[a] = std::min(mapped.lo[a], q[a]);
                        mapped.hi.c[a] = std::max(mapped.hi[a], q[a]);
                    }
                }
            }
            out[static_cast<std::size_t>(j)] = mapped;
        }
        return out;
    };

    PrototileSolution sol;
    sol.contraction = contraction;
    double step = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= max_iter; ++iter) {
        std::vector<Box> nxt_box = hull_step(cur_box);
        for (const Box& b : nxt_box)
            if (b.diameter() > budget)
                throw RasterOverflowError("solve_adjoint: enclosure growth (bad digits?)");
        std::vector<Region> nxt;
        nxt.reserve(static_cast<std::size_t>(d.m));
        for (int j = 0; j < d.m; ++j) {
            const Box& eb = nxt_box[static_cast<std::size_t>(j)];
            Raster g = make_grid(dim, h, eb, pad);
            // pullback sampling: cell occupied iff phi^k(center) - dig lands
            // in some current K_i
            for (std::int64_t kk = g.lo[2]; kk < g.lo[2] + g.n[2]; ++kk)
                for (std::int64_t jj = g.lo[1]; jj < g.lo[1] + g.n[1]; ++jj)
                    for (std::int64_t ii = g.lo[0]; ii < g.lo[0] + g.n[0]; ++ii) {
                        Vec y = apply(eff, g.center(ii, jj, kk));
                        bool occ = false;
                        for (int i = 0; i < d.m && !occ; ++i)
                            for (const Vec& dig :
                                 d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                                if (cur[static_cast<std::size_t>(i)].raster.contains_point(y - dig)) {
                                    occ = true;
                                    break;
                                }
                            }
                        if (occ) g.occ[g.index(ii, jj, kk)] = 1;
                    }
            Raster crop = g.cropped();
            if (crop.cell_count() == 0)
                throw RasterOverflowError("solve_adjoint: iterate vanished for label " +
                                          std::to_string(j));
            nxt.push_back(Region::from_raster(crop));
        }
        step = 0;
        for (int j = 0; j < d.m; ++j)
            step = std::max(step, hausdorff_distance(cur[static_cast<std::size_t>(j)],
                                                     nxt[static_cast<std::size_t>(j)]));
        cur = std::move(nxt);
        cur_box = std::move(nxt_box);
        sol.iterations = iter;
        if (step <= tol * (1.0 - contraction) || step == 0.0) {
            sol.F = cur;
            sol.hausdorff_error = step / (1.0 - contraction);
            return sol;
        }
    }
    throw MaxIterExceededError("solve_adjoint: no convergence to tol " + std::to_string(tol) +
                               " within " + std::to_string(max_iter) +
                               " iterations (last step " + std::to_string(step) + ")");
}

TilingWindow build_tiling(const PrototileSolution& sol, const TilingWindow& source) {
    TilingWindow out;
    out.dim = source.dim;
    out.h = source.h;
    double C = 0;
    std::vector<Vec> anchors;
    for (std::size_t i = 0; i < sol.F.size(); ++i) {
        const Region& f = sol.F[i];
        Prototile p;
        Vec a = f.bbox().lo;
        anchors.push_back(a);
        p.shape = f.translated(-a);
        p.name = source.prototiles[i].name + "'";
        p.base = source.prototiles[i].base;
        p.key = source.prototiles[i].key;
        out.prototiles.push_back(p);
        C = std::max(C, hausdorff_distance(source.prototiles[i].shape, f));
    }
    for (const PlacedTile& t : source.patch.tiles) {
        PlacedTile s = t;
        s.pos = t.pos + anchors[static_cast<std::size_t>(t.label)];
        out.patch.tiles.push_back(s);
    }
    out.center = source.center;
    out.radius = std::max(0.0, source.radius - C - 2 * source.h);
    out.finalize();
    return out;
}

VerificationReport verify_representability(const PrototileSolution& sol, const TilingWindow& source,
                                           const Vec& ball_center, double ball_radius) {
    VerificationReport rep;
    rep.stage = "representability";
    rep.anchor = "check:representability";
    int dim = source.dim;
    double h = source.h;
    if (!source.ball_inside_valid(ball_center, ball_radius))
        throw OutOfWindowError("verify_representability: ball exceeds the certified region");

    Box bb{ball_center, ball_center};
    for (int a = 0; a < dim; ++a) {
        bb.lo.c[a] -= ball_radius;
        bb.hi.c[a] += ball_radius;
    }
    Raster counts = make_grid(dim, h, bb, 0);
    std::vector<int> claim(static_cast<std::size_t>(counts.cell_count()), 0);

    // paint every placed attractor tile
    double dM = 0;
    for (const Region& f : sol.F) dM = std::max(dM, f.bbox().diameter());
    std::vector<std::vector<int>> per_cell_tiles(static_cast<std::size_t>(counts.cell_count()));
    for (int t = 0; t < source.tile_count(); ++t) {
        const PlacedTile& pt = source.tile(t);
        const Region& f = sol.F[static_cast<std::size_t>(pt.label)];
        Box fb = f.bbox();
        // skip tiles that cannot reach the ball
        bool reach = true;
        for (int a = 0; a < dim; ++a)
            if (fb.hi[a] + pt.pos[a] < bb.lo[a] - h || fb.lo[a] + pt.pos[a] > bb.hi[a] + h) reach = false;
        if (!reach) continue;
        std::int64_t clo[3] = {0, 0, 0}, chi[3] = {0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            clo[a] = std::max(counts.lo[a],
                              static_cast<std::int64_t>(std::floor((fb.lo[a] + pt.pos[a]) / h)) - 1);
            chi[a] = std::min(counts.lo[a] + counts.n[a] - 1,
                              static_cast<std::int64_t>(std::ceil((fb.hi[a] + pt.pos[a]) / h)) + 1);
        }
        for (std::int64_t kk = (dim > 2 ? clo[2] : 0); kk <= (dim > 2 ? chi[2] : 0); ++kk)
            for (std::int64_t jj = (dim > 1 ? clo[1] : 0); jj <= (dim > 1 ? chi[1] : 0); ++jj)
                for (std::int64_t ii = clo[0]; ii <= chi[0]; ++ii) {
                    if (!counts.in_range(ii, jj, kk)) continue;
                    Vec c = counts.center(ii, jj, kk);
                    if (dist(c, ball_center) > ball_radius) continue;
                    if (f.raster.contains_point(c - pt.pos)) {
                        std::int64_t idx = counts.index(ii, jj, kk);
                        ++claim[static_cast<std::size_t>(idx)];
                        if (per_cell_tiles[static_cast<std::size_t>(idx)].size() < 4)
                            per_cell_tiles[static_cast<std::size_t>(idx)].push_back(t);
                    }
                }
    }

    double cell_vol = std::pow(h, dim);
    std::int64_t hole_cells = 0, overlap_cells = 0, total_cells = 0;
    for (std::int64_t kk = counts.lo[2]; kk < counts.lo[2] + counts.n[2]; ++kk)
        for (std::int64_t jj = counts.lo[1]; jj < counts.lo[1] + counts.n[1]; ++jj)
            for (std::int64_t ii = counts.lo[0]; ii < counts.lo[0] + counts.n[0]; ++ii) {
                Vec c = counts.center(ii, jj, kk);
                if (dist(c, ball_center) > ball_radius) continue;
                ++total_cells;
                std::int64_t idx = counts.index(ii, jj, kk);
                int n = claim[static_cast<std::size_t>(idx)];
                if (n == 0) {
                    ++hole_cells;
                    if (rep.witnesses.size() < 8) {
                        nlohmann::json w;
                        w["kind"] = "coverage-hole";
                        w["point"] = std::vector<double>(c.c, c.c + dim);
                        rep.witnesses.push_back(w);
                    }
                } else if (n > 1) {
                    ++overlap_cells;
                    if (rep.witnesses.size() < 8) {
                        nlohmann::json w;
                        w["kind"] = "overlap";
                        w["point"] = std::vector<double>(c.c, c.c + dim);
                        w["tiles"] = per_cell_tiles[static_cast<std::size_t>(idx)];
                        rep.witnesses.push_back(w);
                    }
                }
            }
    double deficiency = static_cast<double>(hole_cells) * cell_vol;
    double overlap = static_cast<double>(overlap_cells) * cell_vol;
    // boundary cells legitimately double-count; pairs scale with tile count
    double eps = 4.0 * cell_vol * std::max<std::int64_t>(1, source.tile_count());
    rep.metrics["deficiency_volume"] = deficiency;
    rep.metrics["max_overlap_volume"] = overlap;
    rep.metrics["epsilon"] = eps;
    rep.metrics["checked_cells"] = static_cast<double>(total_cells);
    if (deficiency > eps || overlap > eps) rep.status = VerificationReport::Status::Fail;
    if (rep.status != VerificationReport::Status::Fail) rep.witnesses.clear();
    return rep;
}

VerificationReport verify_self_affine(const std::vector<Region>& protos, const DigitSystem& d,
                                      const TilingWindow& win) {
    VerificationReport rep;
    rep.stage = "self-affine";
    rep.anchor = "check:self-affine";
    Mat eff = d.effective();
    int dim = win.dim;
    double h = win.h;
    double tol_support = h * (2 * std::sqrt(double(dim)) + sigma_max(eff));
    rep.metrics["support_tolerance"] = tol_support;

    // (i) inflation support identity per label
    double worst = 0;
    for (int j = 0; j < d.m; ++j) {
        Region lhs = protos[static_cast<std::size_t>(j)].mapped(eff);
        // union of children supports
        Raster acc;
        bool first = true;
        Region un;
        for (int i = 0; i < d.m; ++i)
            for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                Region child = protos[static_cast<std::size_t>(i)].translated(dig);
                child.ensure_raster();
                if (first) {
                    acc = child.raster;
                    first = false;
                } else {
                    // merge rasters on a common grid
                    Box u = box_union(Region::from_raster(acc).bbox(), child.bbox());
                    Raster merged = make_grid(dim, h, u, 0);
                    for (std::int64_t kk = merged.lo[2]; kk < merged.lo[2] + merged.n[2]; ++kk)
                        for (std::int64_t jj = merged.lo[1]; jj < merged.lo[1] + merged.n[1]; ++jj)
                            for (std::int64_t ii = merged.lo[0]; ii < merged.lo[0] + merged.n[0]; ++ii)
                                if (acc.at(ii, jj, kk) || child.raster.at(ii, jj, kk))
                                    merged.set(ii, jj, kk, true);
                    acc = merged.cropped();
                }
            }
        if (first) continue;
        un = Region::from_raster(acc);
        double mis = hausdorff_distance(lhs, un);
        worst = std::max(worst, mis);
        if (mis > tol_support) {
            nlohmann::json w;
            w["check"] = "support-identity";
            w["label"] = j;
            w["mismatch"] = mis;
            rep.fail_with(w);
        }
    }
    rep.metrics["max_support_mismatch"] = worst;

    // (ii) translation equivariance of the induced subdivision on the window
    double dM = win.max_tile_diameter();
    double lam = d.lambda_k();
    double maxd = 0;
    for (auto& row : d.D)
        for (auto& set : row)
            for (const Vec& v : set) maxd = std::max(maxd, norm(v));
    int checked = 0, viol = 0;
    for (const PlacedTile& t : win.patch.tiles) {
        Vec base = apply(eff, t.pos);
        bool all_visible = dist(base, win.center) + maxd + dM <= win.radius;
        if (!all_visible) continue;
        for (int i = 0; i < d.m; ++i)
            for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(t.label)]) {
                ++checked;
                if (!win.find_tile(i, base + dig)) {
                    ++viol;
                    if (rep.witnesses.size() < 8) {
                        nlohmann::json w;
                        w["check"] = "equivariance";
                        w["parent_label"] = t.label;
                        w["child_label"] = i;
                        w["point"] = std::vector<double>((base + dig).c, (base + dig).c + dim);
                        rep.fail_with(w);
                    }
                }
            }
    }
    (void)lam;
    rep.metrics["equivariance_checked"] = checked;
    rep.metrics["equivariance_violations"] = viol;
    if (viol > 0) rep.status = VerificationReport::Status::Fail;
    return rep;
}

double mld_radius_bound(const std::vector<Region>& original, const PrototileSolution& sol) {
    if (original.size() != sol.F.size())
        throw IndexMismatchError("mld_radius_bound: label count mismatch");
    double c = 0;
    for (std::size_t i = 0; i < original.size(); ++i)
        c = std::max(c, hausdorff_distance(original[i], sol.F[i]));
    return c;
}

void write_solution(std::ostream& os, const PrototileSolution& sol, const DigitSystem& d) {
    nlohmann::json manifest;
    manifest["labels"] = sol.F.size();
    manifest["hausdorff_error"] = sol.hausdorff_error;
    manifest["iterations"] = sol.iterations;
    manifest["contraction"] = sol.contraction;
    char hexhash[32];
    std::snprintf(hexhash, sizeof hexhash, "%016llx",
                  static_cast<unsigned long long>(d.content_hash()));
    manifest["digit_system_hash"] = hexhash;
    os << "solution v1\n" << manifest.dump(2) << "\n";
    for (const Region& f : sol.F) write_region(os, f);
}

}  // namespace tilekit
