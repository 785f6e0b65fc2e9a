#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace tilekit;
using namespace testsupport;

TEST_SUITE("patch_of") {
    TEST_CASE("point queries on a periodic window") {
        TilingWindow w = periodic_window(20);
        // interior point: exactly one tile
        Region pt = Region::from_primitives(1, {Primitive::interval(0.5, 0.5)}, w.h);
        Patch p = patch_of(w, pt);
        REQUIRE(p.size() == 1);
        CHECK(p.tiles[0].pos[0] == doctest::Approx(0.0));
        // shared boundary point: the two touching tiles
        Region bd = Region::from_primitives(1, {Primitive::interval(1.0, 1.0)}, w.h);
        Patch q = patch_of(w, bd);
        // oracle: brute force over all window tiles
        int oracle = 0;
        for (int i = 0; i < w.tile_count(); ++i) {
            double lo = w.tile(i).pos[0];
            if (lo <= 1.0 + 1e-12 && lo + 1.0 >= 1.0 - 1e-12) ++oracle;
        }
        CHECK(oracle == 2);
        CHECK(q.size() == 2);
    }

    TEST_CASE("window tile's own support returns the tile") {
        TilingWindow w = fib_two_sided_window(40);
        int idx = w.tiles_at_point(w.center).empty() ? 0 : w.tiles_at_point(w.center)[0];
        Patch p = patch_of(w, w.tile_support(idx));
        bool found = false;
        for (const PlacedTile& t : p.tiles)
            if (t.label == w.tile(idx).label && approx_eq(t.pos, w.tile(idx).pos, 1e-9)) found = true;
        CHECK(found);
    }

    TEST_CASE("monotone in F") {
        TilingWindow w = fib_two_sided_window(40);
        Region small = Region::from_primitives(1, {Primitive::interval(-2, 3)}, w.h);
        Region big = Region::from_primitives(1, {Primitive::interval(-4, 6)}, w.h);
        Patch ps = patch_of(w, small), pb = patch_of(w, big);
        for (const PlacedTile& t : ps.tiles) {
            bool in_big = false;
            for (const PlacedTile& s : pb.tiles)
                if (s.label == t.label && approx_eq(s.pos, t.pos, 1e-9)) in_big = true;
            CHECK(in_big);
        }
    }

    TEST_CASE("out-of-window queries throw") {
        TilingWindow w = periodic_window(10);
        Region far = Region::from_primitives(1, {Primitive::interval(30, 31)}, w.h);
        CHECK_THROWS_AS(patch_of(w, far), OutOfWindowError);
    }
}

TEST_SUITE("decomposition") {
    TEST_CASE("single tile") {
        std::vector<RawTile> tiles;
        tiles.push_back({Region::from_primitives(1, {Primitive::interval(3, 4)}, 1e-3), 7});
        Decomposition d = prototile_decomposition(tiles, 1e-3);
        REQUIRE(d.prototiles.size() == 1);
        CHECK(d.multiset.points[0].size() == 1);
        CHECK(d.multiset.points[0][0][0] == doctest::Approx(3.0));
    }

    TEST_CASE("fibonacci window decomposes to two prototiles") {
        TilingWindow w = fib_two_sided_window(30);
        std::vector<RawTile> tiles;
        for (int i = 0; i < w.tile_count(); ++i) tiles.push_back({w.tile_support(i), w.tile(i).label});
        Decomposition d = prototile_decomposition(tiles, w.h);
        REQUIRE(d.prototiles.size() == 2);
        // round trip: every tile reproduced as prototile + translation
        for (std::size_t lab = 0; lab < d.prototiles.size(); ++lab)
            for (const Vec& g : d.multiset.points[lab]) {
                Region rebuilt = d.prototiles[lab].shape.translated(g);
                bool matched = false;
                for (int i = 0; i < w.tile_count() && !matched; ++i)
                    if (hausdorff_distance(rebuilt, w.tile_support(i)) <= 2 * w.h) matched = true;
                CHECK(matched);
            }
    }

    TEST_CASE("label collision is rejected") {
        std::vector<RawTile> tiles;
        tiles.push_back({Region::from_primitives(1, {Primitive::interval(0, 1)}, 1e-3), 1});
        tiles.push_back({Region::from_primitives(1, {Primitive::interval(2, 4)}, 1e-3), 1});
        CHECK_THROWS_AS(prototile_decomposition(tiles, 1e-3), LabelGeometryMismatchError);
    }
}

TEST_SUITE("tile metrics") {
    TEST_CASE("fibonacci") {
        TilingWindow w = fib_two_sided_window(30);
        TileMetrics m = tile_metrics(w);
        CHECK(m.d_M == doctest::Approx(tau()).epsilon(0.01));
        CHECK(m.eta == doctest::Approx(0.5).epsilon(0.02));
    }
    TEST_CASE("base-3") {
        TilingWindow w = base3_window(30);
        TileMetrics m = tile_metrics(w);
        CHECK(m.d_M == doctest::Approx(1.0).epsilon(0.01));
        CHECK(m.eta == doctest::Approx(0.5).epsilon(0.02));
    }
    TEST_CASE("chair") {
        TilingWindow w = chair_window(10);
        TileMetrics m = tile_metrics(w);
        CHECK(m.d_M == doctest::Approx(2 * std::sqrt(2.0)).epsilon(0.02));
        // oracle value for the L-tromino inradius is 2 - sqrt(2)
        CHECK(m.eta == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(0.05));
    }
}

TEST_SUITE("patch equivalence") {
    TEST_CASE("translate and relabel") {
        TilingWindow w = periodic_window(20);
        Patch p1;
        for (int t : w.tiles_meeting_ball(Vec(1, 0.5), 2)) p1.tiles.push_back(w.tile(t));
        Patch p2 = p1;
        for (PlacedTile& t : p2.tiles) t.pos = t.pos + Vec(1, 3.0);
        auto g = patch_equivalent(w, p1, p2);
        REQUIRE(g.has_value());
        CHECK((*g)[0] == doctest::Approx(3.0));
        Patch p3 = p1;
        p3.tiles[0].label = 1;  // relabeled
        CHECK_FALSE(patch_equivalent(w, p1, p3).has_value());
    }

    TEST_CASE("symmetry and transitivity") {
        TilingWindow w = fib_two_sided_window(50);
        Patch p1;
        for (int t : w.tiles_meeting_ball(Vec(1, 0.5), 3)) p1.tiles.push_back(w.tile(t));
        std::vector<Vec> occ = find_occurrences(w, p1);
        REQUIRE(occ.size() >= 3);
        Patch p2 = p1, p3 = p1;
        for (PlacedTile& t : p2.tiles) t.pos = t.pos + occ[1];
        for (PlacedTile& t : p3.tiles) t.pos = t.pos + occ[2];
        auto g12 = patch_equivalent(w, p1, p2);
        auto g21 = patch_equivalent(w, p2, p1);
        auto g13 = patch_equivalent(w, p1, p3);
        auto g23 = patch_equivalent(w, p2, p3);
        REQUIRE(g12.has_value());
        REQUIRE(g21.has_value());
        REQUIRE(g13.has_value());
        REQUIRE(g23.has_value());
        CHECK((*g12)[0] == doctest::Approx(-(*g21)[0]));
        CHECK((*g13)[0] == doctest::Approx((*g12)[0] + (*g23)[0]));
    }

    TEST_CASE("fibonacci return vector matches an exhaustive scan") {
        TilingWindow w = fib_two_sided_window(60);
        // patch "a b a" nearest 0
        Patch p;
        for (int t : w.tiles_meeting_ball(Vec(1, 0.5), 1.8)) p.tiles.push_back(w.tile(t));
        std::vector<Vec> occ = find_occurrences(w, p);
        REQUIRE(occ.size() >= 2);
        // oracle: brute-force scan over all translations anchored at a-tiles
        std::vector<double> oracle;
        for (const PlacedTile& c : w.patch.tiles) {
            if (c.label != 0) continue;
            bool ok = true;
            AnchoredPatch ap = anchored_patch_key(p, w.h);
            Vec g = c.pos - ap.anchor;
            for (const PlacedTile& t : p.tiles)
                if (!w.find_tile(t.label, t.pos + g)) {
                    ok = false;
                    break;
                }
            if (ok) oracle.push_back(g[0]);
        }
        std::sort(oracle.begin(), oracle.end());
        REQUIRE(occ.size() == oracle.size());
        std::vector<double> got;
        for (const Vec& g : occ) got.push_back(g[0]);
        std::sort(got.begin(), got.end());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(oracle[i]));
    }
}

TEST_SUITE("repetitivity") {
    TEST_CASE("periodic single tile") {
        TilingWindow w = periodic_window(20);
        Patch p;
        p.tiles.push_back(w.tile(w.tiles_at_point(Vec(1, 0.5))[0]));
        RepetitivityEstimate est = repetitivity_radius(w, p, 0.05);
        CHECK_FALSE(est.degenerate);
        CHECK(est.upper <= 1.5 + 0.2);
    }

    TEST_CASE("whole window is degenerate") {
        TilingWindow w = periodic_window(10);
        Patch p = w.patch;
        RepetitivityEstimate est = repetitivity_radius(w, p);
        CHECK(est.degenerate);
        CHECK(est.upper == doctest::Approx(w.radius));
    }

    TEST_CASE("fibonacci single b tile gap bound") {
        TilingWindow w = fib_two_sided_window(60);
        Patch p;
        for (const PlacedTile& t : w.patch.tiles)
            if (t.label == 1 && std::abs(t.pos[0]) < 4) {
                p.tiles.push_back(t);
                break;
            }
        REQUIRE(p.size() == 1);
        RepetitivityEstimate est = repetitivity_radius(w, p, 0.1);
        CHECK(est.upper <= std::pow(tau(), 3) + 0.3);
    }

    TEST_CASE("absent patch throws") {
        TilingWindow w = periodic_window(10);
        // two unit tiles at offset 0.5 never occur in the periodic tiling
        Patch p;
        PlacedTile t;
        t.label = 0;
        t.pos = Vec(1, 0.0);
        p.tiles.push_back(t);
        t.pos = Vec(1, 0.5);
        p.tiles.push_back(t);
        CHECK_THROWS_AS(repetitivity_radius(w, p), PatchNotFoundError);
    }
}

TEST_SUITE("transform_window") {
    TEST_CASE("identity") {
        TilingWindow w = fib_two_sided_window(30);
        TilingWindow v = transform_window(Mat::identity(1), w);
        CHECK(v.tile_count() == w.tile_count());
        CHECK(v.radius == doctest::Approx(w.radius));
    }

    TEST_CASE("scaling maps supports") {
        TilingWindow w = base3_window(20);
        TilingWindow v = transform_window(Mat::scalar(1, 3.0), w);
        // the tile at [0,1] maps to [0,3]
        auto ts = v.tiles_at_point(Vec(1, 1.5));
        REQUIRE(ts.size() == 1);
        Region s = v.tile_support(ts[0]);
        CHECK(s.bbox().lo[0] == doctest::Approx(0.0).epsilon(0.01));
        CHECK(s.bbox().hi[0] == doctest::Approx(3.0).epsilon(0.01));
    }

    TEST_CASE("round trip via the inverse") {
        TilingWindow w = fib_two_sided_window(30);
        Mat phi = Mat::scalar(1, tau());
        TilingWindow v = transform_window(inverse(phi), transform_window(phi, w));
        REQUIRE(v.tile_count() == w.tile_count());
        CHECK(v.radius == doctest::Approx(w.radius).epsilon(1e-9));
        for (int i = 0; i < 5; ++i) {
            CHECK(v.tile(i).label == w.tile(i).label);
            CHECK(v.tile(i).pos[0] == doctest::Approx(w.tile(i).pos[0]));
        }
    }

    TEST_CASE("psi([F]) = [psi F] on random boxes") {
        TilingWindow w = fib_two_sided_window(50);
        Mat phi = Mat::scalar(1, tau());
        TilingWindow pw = transform_window(phi, w);
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> u(-20, 20);
        int compared = 0;
        for (int trial = 0; trial < 100; ++trial) {
            double a = u(rng), b = a + 0.3 + std::abs(u(rng)) / 10;
            Region f = Region::from_primitives(1, {Primitive::interval(a, b)}, w.h);
            Region pf = f.mapped(phi);
            Patch lhs_src = patch_of(w, f);
            // map the patch through phi
            Patch lhs;
            for (const PlacedTile& t : lhs_src.tiles) {
                auto found = pw.find_tile(t.label, Vec(1, t.pos[0] * tau()));
                REQUIRE(found.has_value());
                lhs.tiles.push_back(pw.tile(*found));
            }
            Patch rhs = patch_of(pw, pf);
            REQUIRE(lhs.size() == rhs.size());
            auto key_l = anchored_patch_key(lhs, w.h);
            auto key_r = anchored_patch_key(rhs, w.h);
            CHECK(key_l.key == key_r.key);
            CHECK(approx_eq(key_l.anchor, key_r.anchor, 0.5 * w.h));
            ++compared;
        }
        CHECK(compared == 100);
    }
}

TEST_SUITE("window serialization") {
    TEST_CASE("round trip") {
        TilingWindow w = fib_two_sided_window(20);
        std::stringstream ss;
        write_window(ss, w);
        TilingWindow v = read_window(ss);
        REQUIRE(v.tile_count() == w.tile_count());
        CHECK(v.radius == doctest::Approx(w.radius));
        CHECK(v.prototiles.size() == w.prototiles.size());
        for (int i = 0; i < w.tile_count(); ++i) {
            CHECK(v.tile(i).label == w.tile(i).label);
            CHECK(approx_eq(v.tile(i).pos, w.tile(i).pos, 1e-12));
        }
    }
}
