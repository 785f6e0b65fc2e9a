#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tilekit/expansion.hpp"
#include "tilekit/region.hpp"

using namespace tilekit;

namespace {
const double kTau = (1.0 + std::sqrt(5.0)) / 2.0;

Region interval_region(double a, double b, double h = 1e-3) {
    return Region::from_primitives(1, {Primitive::interval(a, b)}, h);
}
}  // namespace

TEST_SUITE("expansion") {
    TEST_CASE("scalar map") {
        Mat m(1);
        m.at(0, 0) = 3;
        ExpansionMap e = adapted_expansion(m, 8, 1e-9);
        CHECK(e.ell == 1);
        CHECK(e.lambda == doctest::Approx(3.0));
    }

    TEST_CASE("rotation times two is a similitude") {
        Mat m(2);
        m.at(0, 0) = 0;
        m.at(0, 1) = 2;
        m.at(1, 0) = -2;
        m.at(1, 1) = 0;
        ExpansionMap e = adapted_expansion(m, 8, 1e-9);
        CHECK(e.ell == 1);
        CHECK(e.lambda == doctest::Approx(2.0));
    }

    TEST_CASE("hyperbolic matrix is rejected") {
        // eigenvalues tau^2 and tau^-2; the small one kills expansion
        Mat m(2);
        m.at(0, 0) = 2;
        m.at(0, 1) = 1;
        m.at(1, 0) = 1;
        m.at(1, 1) = 1;
        CHECK_THROWS_AS(adapted_expansion(m, 8, 1e-9), NotExpandingError);
    }

    TEST_CASE("power trick kicks in when sigma_min(phi) <= 1") {
        // expanding eigenvalues but a squashed singular direction
        Mat m(2);
        m.at(0, 0) = 1.2;
        m.at(0, 1) = 4.0;
        m.at(1, 0) = 0.0;
        m.at(1, 1) = 1.2;
        ExpansionMap e = adapted_expansion(m, 32, 1e-9);
        CHECK(e.ell > 1);
        CHECK(sigma_min(e.powered()) == doctest::Approx(e.lambda));
        CHECK(e.lambda > 1.0);
    }

    TEST_CASE("expansion certificate on random vectors") {
        Mat m(2);
        m.at(0, 0) = 0;
        m.at(0, 1) = 2;
        m.at(1, 0) = -2;
        m.at(1, 1) = 0;
        ExpansionMap e = adapted_expansion(m, 8, 1e-9);
        Mat p = e.powered();
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> u(-10, 10);
        for (int t = 0; t < 1000; ++t) {
            Vec v(2, u(rng), u(rng));
            if (norm(v) < 1e-9) continue;
            CHECK(norm(apply(p, v)) >= e.lambda * norm(v) - 1e-9);
        }
    }
}

TEST_SUITE("region basics") {
    TEST_CASE("neighborhood of an interval") {
        Region f = interval_region(0, 1);
        Region n0 = neighborhood(f, 0);
        CHECK(hausdorff_distance(f, n0) <= 2e-3);
        Region nh = neighborhood(f, 0.5);
        Region expect = interval_region(-0.5, 1.5);
        CHECK(hausdorff_distance(nh, expect) <= 2e-3);
    }

    TEST_CASE("rounded square area") {
        double h = 0.01;
        Region sq = Region::from_primitives(2, {Primitive::box(Vec(2, 0, 0), Vec(2, 1, 1))}, h);
        Region n = neighborhood(sq, 1.0);
        double expect = 1.0 + 4.0 + M_PI;
        CHECK(std::abs(n.volume() - expect) < 0.15);
    }

    TEST_CASE("erode interval") {
        Region f = interval_region(0, 3);
        Region e0 = erode(f, 0);
        CHECK(hausdorff_distance(f, e0) <= 2e-3);
        Region e1 = erode(f, 1);
        CHECK(hausdorff_distance(e1, interval_region(1, 2)) <= 2e-3);
    }

    TEST_CASE("erode can empty out, and that is not an error") {
        Region f = interval_region(0, 1);
        Region e = erode(f, 0.75);
        CHECK(e.empty());
    }

    TEST_CASE("N_r(F^{-r}) stays inside F for a disk") {
        double h = 0.01;
        // disk as a 64-gon
        std::vector<Vec> verts;
        for (int i = 0; i < 64; ++i) {
            double a = 2 * M_PI * i / 64;
            verts.push_back(Vec(2, std::cos(a), std::sin(a)));
        }
        Region disk = Region::from_primitives(2, {Primitive::poly(verts)}, h);
        Region er = erode(disk, 0.3);
        Region back = neighborhood(er, 0.3);
        // back subset of disk, up to a one-cell tolerance band
        const Raster& rb = back.raster;
        double slack = 2.0 * h;
        for (std::int64_t j = rb.lo[1]; j < rb.lo[1] + rb.n[1]; ++j)
            for (std::int64_t i = rb.lo[0]; i < rb.lo[0] + rb.n[0]; ++i)
                if (rb.at(i, j, 0)) {
                    Vec c = rb.center(i, j, 0);
                    CHECK(norm(c) <= 1.0 + slack);
                }
    }

    TEST_CASE("hausdorff distances") {
        Region a = interval_region(0, 1);
        CHECK(hausdorff_distance(a, a) == doctest::Approx(0.0));
        Region b = interval_region(0, 2);
        CHECK(hausdorff_distance(a, b) == doctest::Approx(1.0).epsilon(0.01));
        CHECK_THROWS_AS(hausdorff_distance(a, erode(a, 2.0)), EmptyRegionError);
    }

    TEST_CASE("hausdorff square vs disk matches a sampling oracle") {
        double h = 0.02;
        Region sq =
            Region::from_primitives(2, {Primitive::box(Vec(2, -1, -1), Vec(2, 1, 1))}, h);
        std::vector<Vec> verts;
        for (int i = 0; i < 128; ++i) {
            double a = 2 * M_PI * i / 128;
            verts.push_back(Vec(2, std::cos(a), std::sin(a)));
        }
        Region disk = Region::from_primitives(2, {Primitive::poly(verts)}, h);
        // oracle: dense point sampling of both sets
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(-1, 1);
        double worst = 0;
        for (int t = 0; t < 20000; ++t) {
            Vec p(2, u(rng), u(rng));
            // point of the square; distance to the disk
            double dd = std::max(0.0, norm(p) - 1.0);
            worst = std::max(worst, dd);
        }
        // the square's corner is the farthest point: sqrt(2)-1
        CHECK(worst == doctest::Approx(std::sqrt(2.0) - 1).epsilon(0.02));
        CHECK(hausdorff_distance(sq, disk) == doctest::Approx(std::sqrt(2.0) - 1).epsilon(0.05));
    }

    TEST_CASE("metrics of simple shapes") {
        auto m1 = region_metrics(interval_region(0, 1));
        CHECK(m1.diameter == doctest::Approx(1.0).epsilon(0.01));
        CHECK(m1.inradius == doctest::Approx(0.5).epsilon(0.01));
        CHECK(m1.volume == doctest::Approx(1.0).epsilon(0.01));

        double h = 0.01;
        Region rect = Region::from_primitives(2, {Primitive::box(Vec(2, 0, 0), Vec(2, 2, 1))}, h);
        auto m2 = region_metrics(rect);
        CHECK(m2.diameter == doctest::Approx(std::sqrt(5.0)).epsilon(0.02));
        CHECK(m2.inradius == doctest::Approx(0.5).epsilon(0.03));
        CHECK(m2.volume == doctest::Approx(2.0).epsilon(0.02));

        // L-tromino: three unit cells
        Region ltro = Region::from_primitives(
            2,
            {Primitive::box(Vec(2, 0, 0), Vec(2, 2, 1)), Primitive::box(Vec(2, 0, 1), Vec(2, 1, 2))},
            h);
        auto m3 = region_metrics(ltro);
        CHECK(m3.volume == doctest::Approx(3.0).epsilon(0.02));
        // brute-force oracle for the inradius: max over a dense grid of the
        // exact distance to the complement of the L
        double oracle = 0;
        for (double x = 0.005; x < 2; x += 0.005)
            for (double y = 0.005; y < 2; y += 0.005) {
                if (y >= 1 && x >= 1) continue;
                double d = std::min(std::min(x, y), std::min(2 - x, 2 - y));
                if (x <= 1 && y <= 1)
                    d = std::min(d, std::hypot(1 - x, 1 - y));  // reentrant corner
                else if (x >= 1)
                    d = std::min(d, 1 - y);
                else
                    d = std::min(d, 1 - x);
                oracle = std::max(oracle, d);
            }
        CHECK(oracle == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(0.02));
        CHECK(m3.inradius == doctest::Approx(oracle).epsilon(0.03));
        CHECK(m3.diameter == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.02));
    }

    TEST_CASE("closure of interior check") {
        Region f = interval_region(0, 1, 0.01);
        CHECK(f.closure_of_interior_ok());
        // a 1-cell-thin 2-D sliver has no interior cells
        Raster r;
        r.dim = 2;
        r.h = 0.01;
        r.lo = {0, 0, 0};
        r.n = {10, 1, 1};
        r.occ.assign(10, 1);
        Region sliver = Region::from_raster(r);
        CHECK_FALSE(sliver.closure_of_interior_ok());
    }
}

TEST_SUITE("region properties") {
    TEST_CASE("neighborhood monotone, erode antitone") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(0.1, 1.5);
        Region f = Region::from_primitives(
            2, {Primitive::box(Vec(2, 0, 0), Vec(2, 1.3, 0.8))}, 0.02);
        double r1 = u(rng), r2 = u(rng);
        if (r1 > r2) std::swap(r1, r2);
        Region n1 = neighborhood(f, r1), n2 = neighborhood(f, r2);
        const Raster& a = n1.raster;
        for (std::int64_t j = a.lo[1]; j < a.lo[1] + a.n[1]; ++j)
            for (std::int64_t i = a.lo[0]; i < a.lo[0] + a.n[0]; ++i)
                if (a.at(i, j, 0)) CHECK(n2.raster.at(i, j, 0));
        Region e1 = erode(f, r1);
        Region e2 = erode(f, r2);
        if (!e2.empty()) {
            const Raster& b = e2.raster;
            for (std::int64_t j = b.lo[1]; j < b.lo[1] + b.n[1]; ++j)
                for (std::int64_t i = b.lo[0]; i < b.lo[0] + b.n[0]; ++i)
                    if (b.at(i, j, 0)) CHECK(e1.raster.at(i, j, 0));
        }
    }

    TEST_CASE("linear erosion bound: psi(F^{-R/gamma}) inside (psi F)^{-R}") {
        double h = 0.01;
        Region f = Region::from_primitives(
            2, {Primitive::box(Vec(2, 0, 0), Vec(2, 1, 1))}, h);
        Mat psi(2);
        psi.at(0, 0) = 2;
        psi.at(0, 1) = 0.5;
        psi.at(1, 0) = 0;
        psi.at(1, 1) = 2;
        double gamma = sigma_min(psi);
        double R = 0.6;
        Region lhs = erode(f, R / gamma).mapped(psi);
        Region rhs = erode(f.mapped(psi), R);
        const Raster& a = lhs.raster;
        int misses = 0;
        for (std::int64_t j = a.lo[1]; j < a.lo[1] + a.n[1]; ++j)
            for (std::int64_t i = a.lo[0]; i < a.lo[0] + a.n[0]; ++i)
                if (a.at(i, j, 0)) {
                    // allow a one-cell tolerance band
                    bool ok = false;
                    for (std::int64_t dj = -1; dj <= 1 && !ok; ++dj)
                        for (std::int64_t di = -1; di <= 1 && !ok; ++di)
                            if (rhs.raster.at(i + di, j + dj, 0)) ok = true;
                    if (!ok) ++misses;
                }
        CHECK(misses == 0);
    }

    TEST_CASE("hausdorff triangle inequality on random triples") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> u(-2, 2);
        for (int t = 0; t < 10; ++t) {
            double a0 = u(rng), b0 = u(rng), c0 = u(rng);
            Region A = interval_region(a0, a0 + 1 + std::abs(u(rng)), 0.005);
            Region B = interval_region(b0, b0 + 1 + std::abs(u(rng)), 0.005);
            Region C = interval_region(c0, c0 + 1 + std::abs(u(rng)), 0.005);
            double ab = hausdorff_distance(A, B);
            double bc = hausdorff_distance(B, C);
            double ac = hausdorff_distance(A, C);
            CHECK(ac <= ab + bc + 0.02);
        }
    }

    TEST_CASE("serialization round trip") {
        Region f = Region::from_primitives(
            2, {Primitive::box(Vec(2, 0, 0), Vec(2, 1, 1)), Primitive::box(Vec(2, 1, 0), Vec(2, 2, 0.5))},
            0.05);
        std::stringstream ss;
        write_region(ss, f);
        Region g = read_region(ss);
        CHECK(g.dim == f.dim);
        CHECK(g.h == f.h);
        CHECK(hausdorff_distance(f, g) == doctest::Approx(0.0));
        CHECK(g.volume() == doctest::Approx(f.volume()));
    }
}
