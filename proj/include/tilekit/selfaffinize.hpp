#pragma once

#include <optional>

#include "tilekit/digits.hpp"
#include "tilekit/report.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

// Smallest k with lambda^k > 2 + d_M / eta.
int choose_k(double lambda, double eta, double d_M);

// Infimum collar radius L > R*lambda/(lambda-1)^2 + d_M/(lambda-1); callers
// add their own margin.
double collar_radius(double R_ld, double lambda, double d_M);

struct NoClearPointError : std::runtime_error {
    explicit NoClearPointError(const std::string& w) : std::runtime_error(w) {}
};
struct EmptyImageError : std::runtime_error {
    explicit EmptyImageError(const std::string& w) : std::runtime_error(w) {}
};
struct InconsistentDigitsError : std::runtime_error {
    explicit InconsistentDigitsError(const std::string& w) : std::runtime_error(w) {}
};
struct LabelBudgetError : std::runtime_error {
    explicit LabelBudgetError(const std::string& w) : std::runtime_error(w) {}
};

// Relabel every tile by the class of its marked L-collar. Collar classes are
// computed over base (pre-recode) labels, so recoding twice with the same L
// is idempotent. Supports are unchanged; the valid radius shrinks by
// L + d_M. New label names are content hashes of the anchored collar.
TilingWindow collar_recode(const TilingWindow& win, double L, int max_labels = 4096);

struct ReferencePoints {
    std::vector<Vec> c;   // one interior point per prototile
    double delta = 0;     // certified clearance on the window
    int k = 1;
    std::vector<nlohmann::json> warnings;
};

// Deterministic grid search for reference points: maximize the minimum of
// the distance to the own-tile boundary and the distances from each visible
// phi^{-k}(c + g) to the window's boundary network, then require >= delta_min.
ReferencePoints choose_reference_points(const TilingWindow& win, const Mat& phi_k, int k,
                                        double delta_min, int grid_per_axis = 48);

// f(T_j) for each prototile: the phi^{-k}-scaled tiles whose scaled reference
// points fall in the interior of supp(T_j). Children are stored in digit
// coordinates (s with child = phi^{-k}(T_i + s)), normalized per occurrence.
struct PseudoSubstitution {
    int k = 1;
    Mat phi_k;  // the effective map phi^k
    ReferencePoints refs;
    // children[j] = f(T_j) of the first processed occurrence
    std::vector<std::vector<PlacedTile>> children;
    // every processed occurrence, for (S1)-(S4) checking
    struct Occurrence {
        int label = 0;
        int parent_tile = -1;            // window tile index of the parent
        Vec pos;                         // parent tile position in the window
        std::vector<int> child_tiles;    // window tile indices claimed by this parent
        std::vector<PlacedTile> normal;  // normalized children (digit coordinates)
    };
    std::vector<Occurrence> occurrences;
};

PseudoSubstitution build_pseudo_substitution(const TilingWindow& win, const Mat& phi_k, int k,
                                             const ReferencePoints& refs);

VerificationReport verify_S1_S4(const PseudoSubstitution& ps, const TilingWindow& win);

DigitSystem extract_digits(const PseudoSubstitution& ps, const TilingWindow& win,
                           const ExpansionMap& phi);

}  // namespace tilekit
