#include "tilekit/generate.hpp"

#include <algorithm>
#include <cmath>

namespace tilekit {

namespace {

std::vector<int> rewrite(const WordSystem& ws, const std::vector<int>& word) {
    std::vector<int> out;
    for (int c : word) {
        const std::vector<int>& r = ws.rules[static_cast<std::size_t>(c)];
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

double word_length(const WordSystem& ws, const std::vector<int>& word) {
    double s = 0;
    for (int c : word) s += ws.lengths[static_cast<std::size_t>(c)];
    return s;
}

}  // namespace

TilingWindow word_window(const WordSystem& ws, const std::vector<int>& left,
                         const std::vector<int>& right, int iterations, double h, double margin) {
    std::vector<int> lw = left, rw = right;
    for (int i = 0; i < iterations; ++i) {
        lw = rewrite(ws, lw);
        rw = rewrite(ws, rw);
    }
    TilingWindow win;
    win.dim = 1;
    win.h = h;
    for (std::size_t i = 0; i < ws.names.size(); ++i) {
        Prototile p;
        p.name = ws.names[i];
        p.shape = Region::from_primitives(1, {Primitive::interval(0, ws.lengths[i])}, h);
        p.key = p.name;
        win.prototiles.push_back(p);
    }
    double llen = word_length(ws, lw);
    double x = -llen;
    for (int c : lw) {
        PlacedTile t;
        t.label = c;
        t.pos = Vec(1, x);
        win.patch.tiles.push_back(t);
        x += ws.lengths[static_cast<std::size_t>(c)];
    }
    for (int c : rw) {
        PlacedTile t;
        t.label = c;
        t.pos = Vec(1, x);
        win.patch.tiles.push_back(t);
        x += ws.lengths[static_cast<std::size_t>(c)];
    }
    double rlen = x;
    win.center = Vec(1, (rlen - llen) / 2.0);
    win.radius = (llen + rlen) / 2.0 - margin;
    if (win.radius <= 0) throw std::invalid_argument("word_window: window too small");
    win.finalize();
    return win;
}

TilingWindow word_window_radius(const WordSystem& ws, const std::vector<int>& left,
                                const std::vector<int>& right, double min_radius, int step,
                                double h, double margin) {
    for (int iters = 0; iters <= 64; iters += step) {
        std::vector<int> lw = left, rw = right;
        for (int i = 0; i < iters; ++i) {
            lw = rewrite(ws, lw);
            rw = rewrite(ws, rw);
        }
        double llen = word_length(ws, lw), rlen = word_length(ws, rw);
        if ((llen + rlen) / 2.0 - margin >= min_radius) return word_window(ws, left, right, iters, h, margin);
        if (lw.size() + rw.size() > 80u * 1000u * 1000u) break;
    }
    throw std::runtime_error("word_window_radius: radius not reachable");
}

TilingWindow window_from_digits(const DigitSystem& d, const std::vector<Prototile>& prototiles,
                                const Multiset& seed, double radius, double h) {
    TilingWindow win;
    win.dim = d.phi.dim;
    win.h = h;
    win.prototiles = prototiles;
    win.center = Vec::zero(win.dim);

    double dM = 0, eta = std::numeric_limits<double>::infinity();
    for (const Prototile& p : prototiles) {
        RegionMetrics mm = region_metrics(p.shape);
        dM = std::max(dM, mm.diameter);
        eta = std::min(eta, mm.inradius);
    }
    double clip = radius + 3 * dM;

    // seed sanity: Phi(seed) must contain seed
    MultisetImage img = apply_multiset_map(d, seed);
    for (std::size_t i = 0; i < seed.size(); ++i)
        for (const Vec& p : seed[i]) {
            bool found = false;
            for (const Vec& q : img.sets[i])
                if (approx_eq(p, q, 1e-6)) {
                    found = true;
                    break;
                }
            if (!found)
                throw std::invalid_argument("window_from_digits: seed is not self-reproducing");
        }

    double lam = d.lambda_k();
    int iters = static_cast<int>(std::ceil(std::log(std::max(2.0, clip / std::max(eta, 1e-6))) /
                                           std::log(lam))) +
                2;
    Multiset cur = seed;
    for (int t = 0; t < iters; ++t) {
        Multiset nxt = apply_multiset_map(d, cur).sets;
        for (auto& pts : nxt) {
            std::vector<Vec> kept;
            for (const Vec& p : pts)
                if (norm(p) <= clip) kept.push_back(p);
            pts = std::move(kept);
        }
        cur = std::move(nxt);
    }
    for (std::size_t i = 0; i < cur.size(); ++i)
        for (const Vec& p : cur[i]) {
            PlacedTile t;
            t.label = static_cast<int>(i);
            t.pos = p;
            win.patch.tiles.push_back(t);
        }
    win.radius = radius;
    win.finalize();

    // certify the valid ball by sampling coverage at pitch eta/2
    double pitch = std::max(h, eta / 2);
    double certified = radius;
    std::int64_t steps = static_cast<std::int64_t>(std::floor(radius / pitch));
    std::int64_t span[3] = {0, 0, 0};
    for (int a = 0; a < win.dim; ++a) span[a] = steps;
    for (std::int64_t z = -span[2]; z <= span[2]; ++z)
        for (std::int64_t y = -span[1]; y <= span[1]; ++y)
            for (std::int64_t x = -span[0]; x <= span[0]; ++x) {
                Vec s(win.dim);
                double off[3] = {double(x), double(y), double(z)};
                for (int a = 0; a < win.dim; ++a) s.c[a] = off[a] * pitch;
                double r = norm(s);
                if (r > radius || r >= certified) continue;
                if (win.tiles_at_point(s).empty()) certified = std::min(certified, r - pitch);
            }
    if (certified < radius * 0.5)
        throw std::runtime_error("window_from_digits: coverage certification failed (radius " +
                                 std::to_string(certified) + " of " + std::to_string(radius) + ")");
    win.radius = std::max(0.0, certified - dM);
    return win;
}

std::optional<Multiset> find_self_seed(const DigitSystem& d,
                                       const std::vector<Prototile>& prototiles, int max_level) {
    double dM = 0, eta = std::numeric_limits<double>::infinity();
    for (const Prototile& p : prototiles) {
        RegionMetrics mm = region_metrics(p.shape);
        dM = std::max(dM, mm.diameter);
        eta = std::min(eta, mm.inradius);
    }
    double rho = 3 * dM;
    for (int level = 1; level <= max_level; ++level)
        for (int j = 0; j < d.m; ++j) {
            Multiset t0(static_cast<std::size_t>(d.m));
            t0[static_cast<std::size_t>(j)].push_back(Vec::zero(d.phi.dim));
            for (int l = 0; l < level; ++l) t0 = apply_multiset_map(d, t0).sets;
            // candidate recenterings, deterministic order
            std::vector<Vec> centers;
            for (const auto& pts : t0) centers.insert(centers.end(), pts.begin(), pts.end());
            std::sort(centers.begin(), centers.end(),
                      [](const Vec& a, const Vec& b) { return lex_less(a, b); });
            for (const Vec& t : centers) {
                Multiset cand(static_cast<std::size_t>(d.m));
                for (std::size_t i = 0; i < t0.size(); ++i)
                    for (const Vec& p : t0[i])
                        if (norm(p - t) <= rho) cand[i].push_back(p - t);
                // 0 interior to the candidate's support?
                bool covers0 = false;
                for (std::size_t i = 0; i < cand.size() && !covers0; ++i)
                    for (const Vec& p : cand[i])
                        if (prototiles[i].shape.contains(-1.0 * p, 0.0) &&
                            prototiles[i].shape.boundary_distance(-1.0 * p) > eta / 4) {
                            covers0 = true;
                            break;
                        }
                if (!covers0) continue;
                Multiset img = apply_multiset_map(d, cand).sets;
                bool grows = true;
                for (std::size_t i = 0; i < cand.size() && grows; ++i)
                    for (const Vec& p : cand[i]) {
                        bool found = false;
                        for (const Vec& q : img[i])
                            if (approx_eq(p, q, 1e-6)) {
                                found = true;
                                break;
                            }
                        if (!found) {
                            grows = false;
                            break;
                        }
                    }
                if (grows) return cand;
            }
        }
    return std::nullopt;
}

}  // namespace tilekit
