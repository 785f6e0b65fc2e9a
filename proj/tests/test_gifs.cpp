#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tilekit/gifs.hpp"

using namespace tilekit;
using namespace testsupport;

TEST_SUITE("adjoint solver") {
    TEST_CASE("base-3 recovers the unit interval from box init") {
        DigitSystem d = base3_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 1e-6, 64, 1e-3);
        REQUIRE(sol.F.size() == 1);
        Region expect = Region::from_primitives(1, {Primitive::interval(0, 1)}, 1e-3);
        CHECK(hausdorff_distance(sol.F[0], expect) <= 2e-3);
        CHECK(sol.hausdorff_error <= 1e-6);
        // iteration certificate: within the contraction bound from the
        // enclosure diameter
        int bound = adjoint_iteration_bound(1e-6, sol.contraction, 2.0);
        CHECK(sol.iterations <= bound);
    }

    TEST_CASE("fibonacci recovers the two intervals") {
        DigitSystem d = fib_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 1e-2, 256, 1e-3);
        REQUIRE(sol.F.size() == 2);
        Region fa = Region::from_primitives(1, {Primitive::interval(0, tau())}, 1e-3);
        Region fb = Region::from_primitives(1, {Primitive::interval(0, 1)}, 1e-3);
        CHECK(hausdorff_distance(sol.F[0], fa) <= 2e-3);
        CHECK(hausdorff_distance(sol.F[1], fb) <= 2e-3);
    }

    TEST_CASE("chair digits reproduce the tromino supports") {
        double h = 1.0 / 32;
        DigitSystem d = chair_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 4 * h, 64, h);
        REQUIRE(sol.F.size() == 4);
        std::vector<Prototile> protos = chair_prototiles(h);
        for (int i = 0; i < 4; ++i)
            CHECK(hausdorff_distance(sol.F[static_cast<std::size_t>(i)],
                                     protos[static_cast<std::size_t>(i)].shape) <= 2 * h);
    }

    TEST_CASE("two inits agree within 2 tol") {
        double tol = 4e-3;
        DigitSystem d = fib_digits();
        PrototileSolution a = solve_adjoint(d, nullptr, tol, 256, 1e-3);
        std::vector<Region> init;
        init.push_back(Region::from_primitives(1, {Primitive::interval(-0.3, tau() + 0.4)}, 1e-3));
        init.push_back(Region::from_primitives(1, {Primitive::interval(-0.2, 1.7)}, 1e-3));
        PrototileSolution b = solve_adjoint(d, &init, tol, 256, 1e-3);
        for (int i = 0; i < 2; ++i)
            CHECK(hausdorff_distance(a.F[static_cast<std::size_t>(i)],
                                     b.F[static_cast<std::size_t>(i)]) <= 2 * tol);
    }

    TEST_CASE("successive steps contract from a fat init") {
        DigitSystem d = fib_digits();
        std::vector<Region> init;
        init.push_back(Region::from_primitives(1, {Primitive::interval(-0.5, tau() + 0.5)}, 1e-3));
        init.push_back(Region::from_primitives(1, {Primitive::interval(-0.5, 1.5)}, 1e-3));
        PrototileSolution sol = solve_adjoint(d, &init, 5e-3, 256, 1e-3);
        CHECK(sol.contraction == doctest::Approx(1.0 / tau()));
        CHECK(sol.hausdorff_error <= 5e-3);
        CHECK(sol.iterations >= 3);
        Region fa = Region::from_primitives(1, {Primitive::interval(0, tau())}, 1e-3);
        CHECK(hausdorff_distance(sol.F[0], fa) <= 4 * 5e-3);
    }

    TEST_CASE("max iterations is an error") {
        DigitSystem d = fib_digits();
        std::vector<Region> init;
        init.push_back(Region::from_primitives(1, {Primitive::interval(-2, tau() + 2)}, 1e-3));
        init.push_back(Region::from_primitives(1, {Primitive::interval(-2, 3)}, 1e-3));
        CHECK_THROWS_AS(solve_adjoint(d, &init, 1e-12, 2, 1e-3), MaxIterExceededError);
    }
}

TEST_SUITE("volume identity") {
    TEST_CASE("det(phi^k) vol(F_j) = sum_i S(i,j) vol(F_i)") {
        struct SysCase {
            DigitSystem d;
            double h;
        };
        std::vector<SysCase> cases = {{base3_digits(), 1e-3}, {fib_digits(), 1e-3},
                                      {chair_digits(), 1.0 / 32}};
        for (auto& sc : cases) {
            PrototileSolution sol = solve_adjoint(sc.d, nullptr, 8 * sc.h, 256, sc.h);
            SubstitutionMatrix s = substitution_matrix(sc.d);
            double vol_eps = 0;
            for (const Region& f : sol.F)
                vol_eps = std::max(vol_eps, 8 * sc.h * std::pow(region_metrics(f).diameter,
                                                                 sc.d.phi.dim - 1 + 1));
            double detk = std::abs(det(sc.d.effective()));
            for (int j = 0; j < sc.d.m; ++j) {
                double lhs = detk * sol.F[static_cast<std::size_t>(j)].volume();
                double rhs = 0;
                for (int i = 0; i < sc.d.m; ++i)
                    rhs += static_cast<double>(s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) *
                           sol.F[static_cast<std::size_t>(i)].volume();
                CHECK(std::abs(lhs - rhs) <= sc.d.m * vol_eps);
            }
        }
    }
    TEST_CASE("fibonacci identity in closed form") {
        // tau * tau = tau + 1 and tau * 1 = tau
        CHECK(tau() * tau() == doctest::Approx(tau() + 1));
    }
}

TEST_SUITE("build tiling and representability") {
    TEST_CASE("base-3 solution tiles a ball with no holes or overlaps") {
        DigitSystem d = base3_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 1e-6, 64, 1e-3);
        TilingWindow w = base3_window(30);
        VerificationReport rep = verify_representability(sol, w, Vec(1, 0.0), 20.0);
        CHECK(rep.passed());
        CHECK(rep.metrics["deficiency_volume"] <= rep.metrics["epsilon"]);
        CHECK(rep.metrics["max_overlap_volume"] <= rep.metrics["epsilon"]);
    }

    TEST_CASE("fibonacci window") {
        DigitSystem d = fib_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 2e-3, 256, 1e-3);
        TilingWindow w = fib_right_window(80);
        VerificationReport rep = verify_representability(sol, w, w.center, w.radius * 0.8);
        CHECK(rep.passed());
    }

    TEST_CASE("deleting a translation leaves a re-verifiable hole") {
        DigitSystem d = base3_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 1e-6, 64, 1e-3);
        TilingWindow w = base3_window(30);
        // delete the tile at the origin
        TilingWindow broken = w;
        Patch np;
        for (const PlacedTile& t : w.patch.tiles)
            if (!(t.label == 0 && std::abs(t.pos[0]) < 0.25)) np.tiles.push_back(t);
        REQUIRE(np.tiles.size() + 1 == w.patch.tiles.size());
        broken.patch = np;
        broken.finalize();
        VerificationReport rep = verify_representability(sol, broken, Vec(1, 0.0), 20.0);
        REQUIRE_FALSE(rep.passed());
        REQUIRE_FALSE(rep.witnesses.empty());
        bool hole_at_origin = false;
        for (const auto& wit : rep.witnesses)
            if (wit["kind"] == "coverage-hole") {
                double x = wit["point"][0].get<double>();
                // re-verify: the point is uncovered in the broken window
                bool covered = false;
                for (const PlacedTile& t : broken.patch.tiles)
                    if (sol.F[static_cast<std::size_t>(t.label)].contains(Vec(1, x - t.pos[0]), 0.0))
                        covered = true;
                CHECK_FALSE(covered);
                if (std::abs(x) <= 1.1) hole_at_origin = true;
            }
        CHECK(hole_at_origin);
    }

    TEST_CASE("build_tiling re-anchors and preserves placements") {
        DigitSystem d = fib_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 2e-3, 256, 1e-3);
        TilingWindow w = fib_right_window(60);
        TilingWindow tp = build_tiling(sol, w);
        CHECK(tp.tile_count() == w.tile_count());
        CHECK(tp.label_count() == w.label_count());
        // supports match the original ones within the solver error
        for (int i = 0; i < 10; ++i) {
            double c = hausdorff_distance(tp.tile_support(i), w.tile_support(i));
            CHECK(c <= 4e-3);
        }
    }
}

TEST_SUITE("self-affinity checks") {
    TEST_CASE("base-3 and fibonacci pass on their solutions") {
        {
            DigitSystem d = base3_digits();
            PrototileSolution sol = solve_adjoint(d, nullptr, 1e-6, 64, 1e-3);
            TilingWindow w = base3_window(40);
            VerificationReport rep = verify_self_affine(sol.F, d, w);
            CHECK(rep.passed());
            CHECK(rep.metrics["equivariance_checked"] > 20);
        }
        {
            DigitSystem d = fib_digits();
            PrototileSolution sol = solve_adjoint(d, nullptr, 2e-3, 256, 1e-3);
            TilingWindow w = fib_right_window(120);
            VerificationReport rep = verify_self_affine(sol.F, d, w);
            CHECK(rep.passed());
        }
    }

    TEST_CASE("mld radius bound") {
        DigitSystem d = base3_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 1e-6, 64, 1e-3);
        std::vector<Region> original = {Region::from_primitives(1, {Primitive::interval(0, 1)}, 1e-3)};
        CHECK(mld_radius_bound(original, sol) <= 2e-3);
        std::vector<Region> two(2, original[0]);
        CHECK_THROWS_AS(mld_radius_bound(two, sol), IndexMismatchError);
    }

    TEST_CASE("solution manifest serializes") {
        DigitSystem d = base3_digits();
        PrototileSolution sol = solve_adjoint(d, nullptr, 1e-6, 64, 1e-3);
        std::stringstream ss;
        write_solution(ss, sol, d);
        std::string text = ss.str();
        CHECK(text.find("digit_system_hash") != std::string::npos);
        CHECK(text.find("region v1") != std::string::npos);
    }
}
