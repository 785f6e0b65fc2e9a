#pragma once

// Shared window builders for the test suites.

#include <cmath>
#include <map>

#include "tilekit/digits.hpp"
#include "tilekit/generate.hpp"
#include "tilekit/window.hpp"

namespace testsupport {

using namespace tilekit;

inline double tau() { return (1.0 + std::sqrt(5.0)) / 2.0; }

// a -> ab, b -> a with interval prototiles [0,tau], [0,1]
inline WordSystem fib_system() {
    WordSystem ws;
    ws.names = {"a", "b"};
    ws.lengths = {tau(), 1.0};
    ws.rules = {{0, 1}, {0}};
    return ws;
}

// right-sided window (valid ball inside the sigma-fixed half line from seed a)
inline TilingWindow fib_right_window(double radius, double h = 1e-3) {
    WordSystem ws = fib_system();
    TilingWindow w = word_window_radius(ws, {}, {0}, radius + 4, 1, h, 2.0);
    return w;
}

// two-sided window from the even-iterate fixed seed a|a (0 interior)
inline TilingWindow fib_two_sided_window(double radius, double h = 1e-3) {
    WordSystem ws = fib_system();
    return word_window_radius(ws, {0}, {0}, radius, 2, h, 2.0);
}

// periodic unit tiling, one label
inline TilingWindow periodic_window(double radius, double h = 1e-3) {
    WordSystem ws;
    ws.names = {"u"};
    ws.lengths = {1.0};
    ws.rules = {{0, 0}};
    return word_window_radius(ws, {0}, {0}, radius, 1, h, 1.0);
}

// base-3 digit system (k = 1): D = {0, 1, 2}
inline DigitSystem base3_digits(double /*h*/ = 1e-3) {
    DigitSystem d;
    d.phi.dim = 1;
    d.phi.matrix = Mat::scalar(1, 3.0);
    d.phi.ell = 1;
    d.phi.lambda = 3.0;
    d.k = 1;
    d.m = 1;
    d.D.assign(1, std::vector<std::vector<Vec>>(1));
    d.D[0][0] = {Vec(1, 0.0), Vec(1, 1.0), Vec(1, 2.0)};
    return d;
}

inline TilingWindow base3_window(double radius, double h = 1e-3) {
    std::vector<Prototile> protos(1);
    protos[0].name = "u";
    protos[0].shape = Region::from_primitives(1, {Primitive::interval(0, 1)}, h);
    Multiset seed(1);
    seed[0].push_back(Vec(1, -1.0));
    seed[0].push_back(Vec(1, 0.0));
    return window_from_digits(base3_digits(h), protos, seed, radius, h);
}

// Fibonacci k = 1 digits in min-corner coordinates: a-children {a@0, b@tau},
// b-child {a@0}
inline DigitSystem fib_digits() {
    DigitSystem d;
    d.phi.dim = 1;
    d.phi.matrix = Mat::scalar(1, tau());
    d.phi.ell = 1;
    d.phi.lambda = tau();
    d.k = 1;
    d.m = 2;
    d.D.assign(2, std::vector<std::vector<Vec>>(2));
    d.D[0][0] = {Vec(1, 0.0)};
    d.D[1][0] = {Vec(1, tau())};
    d.D[0][1] = {Vec(1, 0.0)};
    return d;
}

// chair tiling: four L-tromino orientations (missing cell (1,1),(1,0),(0,0),(0,1)),
// phi = 2I, four children each
inline std::vector<Prototile> chair_prototiles(double h = 1.0 / 32) {
    auto cellbox = [&](double x, double y) {
        return Primitive::box(Vec(2, x, y), Vec(2, x + 1, y + 1));
    };
    std::vector<std::vector<std::pair<int, int>>> cells = {
        {{0, 0}, {1, 0}, {0, 1}},  // M11
        {{0, 0}, {0, 1}, {1, 1}},  // M10
        {{1, 0}, {0, 1}, {1, 1}},  // M00
        {{0, 0}, {1, 0}, {1, 1}},  // M01
    };
    std::vector<Prototile> out;
    const char* names[4] = {"L0", "L1", "L2", "L3"};
    for (int i = 0; i < 4; ++i) {
        Prototile p;
        p.name = names[i];
        std::vector<Primitive> prims;
        for (auto& c : cells[static_cast<std::size_t>(i)])
            prims.push_back(cellbox(c.first, c.second));
        p.shape = Region::from_primitives(2, prims, h);
        out.push_back(p);
    }
    return out;
}

inline DigitSystem chair_digits() {
    DigitSystem d;
    d.phi.dim = 2;
    d.phi.matrix = Mat::scalar(2, 2.0);
    d.phi.ell = 1;
    d.phi.lambda = 2.0;
    d.k = 1;
    d.m = 4;
    d.D.assign(4, std::vector<std::vector<Vec>>(4));
    auto v = [](double x, double y) { return Vec(2, x, y); };
    // 2*L0 = L0@(0,0), L0@(1,1), L3@(2,0), L1@(0,2)
    d.D[0][0] = {v(0, 0), v(1, 1)};
    d.D[1][0] = {v(0, 2)};
    d.D[3][0] = {v(2, 0)};
    // 2*L1 = L1@(0,2), L1@(1,1), L0@(0,0), L2@(2,2)
    d.D[1][1] = {v(0, 2), v(1, 1)};
    d.D[0][1] = {v(0, 0)};
    d.D[2][1] = {v(2, 2)};
    // 2*L2 = L2@(2,2), L2@(1,1), L1@(0,2), L3@(2,0)
    d.D[2][2] = {v(1, 1), v(2, 2)};
    d.D[1][2] = {v(0, 2)};
    d.D[3][2] = {v(2, 0)};
    // 2*L3 = L3@(2,0), L3@(1,1), L2@(2,2), L0@(0,0)
    d.D[3][3] = {v(1, 1), v(2, 0)};
    d.D[2][3] = {v(2, 2)};
    d.D[0][3] = {v(0, 0)};
    return d;
}

inline Multiset chair_seed() {
    Multiset seed(4);
    seed[0].push_back(Vec(2, 0.0, 0.0));
    seed[1].push_back(Vec(2, 0.0, -2.0));
    seed[2].push_back(Vec(2, -2.0, -2.0));
    seed[3].push_back(Vec(2, -2.0, 0.0));
    return seed;
}

inline TilingWindow chair_window(double radius, double h = 1.0 / 32) {
    return window_from_digits(chair_digits(), chair_prototiles(h), chair_seed(), radius, h);
}

// Boundary-shifted Fibonacci: the boundary before tile n moves right by
// delta iff letters n-3, n-2 are both 'a' (a locally-determined rule whose
// context reaches past the immediate neighbours). Labels refine to
// (letter, left shift, right shift), the minimum translational finiteness
// demands, so the window's labels genuinely under-determine the hierarchy
// until a collar recode. MLD to Fibonacci by construction, not self-similar.
inline TilingWindow shifted_fib_window(double radius, double delta = 0.1, double h = 1e-3) {
    TilingWindow base = fib_right_window(radius + 16, h);
    struct Item {
        int lab;
        double lo;
    };
    std::vector<Item> items;
    for (int i = 0; i < base.tile_count(); ++i)
        items.push_back({base.tile(i).label, base.tile(i).pos[0]});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.lo < b.lo; });
    auto shift_at = [&](std::ptrdiff_t i) {
        if (i < 3 || i >= static_cast<std::ptrdiff_t>(items.size())) return 0.0;
        return (items[static_cast<std::size_t>(i - 3)].lab == 0 &&
                items[static_cast<std::size_t>(i - 2)].lab == 0)
                   ? delta
                   : 0.0;
    };
    TilingWindow out;
    out.dim = 1;
    out.h = h;
    out.center = base.center;
    out.radius = base.radius - 12;
    double t = tau();
    std::map<std::string, int> label_of;
    for (std::size_t i = 0; i < items.size(); ++i) {
        double sl = shift_at(static_cast<std::ptrdiff_t>(i));
        double sr = shift_at(static_cast<std::ptrdiff_t>(i) + 1);
        double len = (items[i].lab == 0 ? t : 1.0) + sr - sl;
        std::string name = std::string(items[i].lab == 0 ? "a" : "b") + (sl > 0 ? "s" : "0") +
                           (sr > 0 ? "s" : "0");
        auto it = label_of.find(name);
        int lab;
        if (it == label_of.end()) {
            lab = static_cast<int>(out.prototiles.size());
            label_of[name] = lab;
            Prototile p;
            p.name = name;
            p.shape = Region::from_primitives(1, {Primitive::interval(0, len)}, h);
            out.prototiles.push_back(p);
        } else {
            lab = it->second;
        }
        PlacedTile pt;
        pt.label = lab;
        pt.pos = Vec(1, items[i].lo + sl);
        out.patch.tiles.push_back(pt);
    }
    out.finalize();
    return out;
}

// Fibonacci letters painted on unit tiles: the geometry is periodic while the
// labels carry the word, so no collar radius ever determines a x2 hierarchy.
// A pure negative for (S1).
inline TilingWindow fib_word_unit_window(double radius, double h = 1e-3) {
    WordSystem ws;
    ws.names = {"a", "b"};
    ws.lengths = {1.0, 1.0};
    ws.rules = {{0, 1}, {0}};
    return word_window_radius(ws, {}, {0}, radius + 4, 1, h, 2.0);
}

}  // namespace testsupport
