#pragma once

#include "tilekit/report.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

struct OriginOutsideError : std::runtime_error {
    explicit OriginOutsideError(const std::string& w) : std::runtime_error(w) {}
};
struct DegenerateLocatorsError : std::runtime_error {
    explicit DegenerateLocatorsError(const std::string& w) : std::runtime_error(w) {}
};

// All q in the eroded window with [N_r(0)] = P - q for some window patch P.
struct LocatorSet {
    double r = 0;
    Patch base;              // P_r = [N_r(0)]
    std::vector<Vec> q;      // locator positions (0 included)
    double scan_radius = 0;  // positions certified up to here
};
LocatorSet locator_set(const TilingWindow& win, double r);

// Nearest-locator cells, labelled by the class of the radius-2R(r) patch
// around each locator. R_r may be supplied (e.g. scaled from a coarser
// level); zero means estimate it from the window.
struct DerivedVoronoiTiling {
    double r = 0;
    double R_r = 0;
    std::vector<Vec> locators;
    std::vector<Region> cells;          // nearest-locator regions, aligned with locators
    std::vector<int> labels;            // class indices, aligned with locators
    std::vector<std::string> label_keys;
    Vec center;
    double radius = 0;  // cells and labels are certified inside this ball
};
DerivedVoronoiTiling derived_voronoi(const TilingWindow& win, double r, double R_r = 0);

// Greedy psi-finiteness probe: match each level's derived tiling, rescaled
// back by psi^{-j}, against at most M base tilings up to a label bijection.
struct PsiFinitenessResult {
    VerificationReport report;
    std::vector<int> base_of_level;  // index into bases, -1 if unmatched
    int bases_used = 0;
    int first_unmatched_level = -1;
};
PsiFinitenessResult psi_finiteness_probe(const TilingWindow& win, const Mat& psi, double r0,
                                         int levels, int M);

}  // namespace tilekit
