#pragma once

#include "tilekit/digits.hpp"
#include "tilekit/report.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

// Attractors F_i of the adjoint set equations phi^k F_j = U_i (F_i + D_ij),
// kept in digit coordinates (no re-anchoring), with a certified Hausdorff
// error bound from the contraction tail.
struct PrototileSolution {
    std::vector<Region> F;
    double hausdorff_error = 0;
    int iterations = 0;
    double contraction = 0;  // lambda^{-k}
};

struct MaxIterExceededError : std::runtime_error {
    explicit MaxIterExceededError(const std::string& w) : std::runtime_error(w) {}
};
struct RasterOverflowError : std::runtime_error {
    explicit RasterOverflowError(const std::string& w) : std::runtime_error(w) {}
};
struct IndexMismatchError : std::runtime_error {
    explicit IndexMismatchError(const std::string& w) : std::runtime_error(w) {}
};

// init == nullptr uses the "balls" mode: max-norm balls (boxes) obtained by
// iterating the interval-arithmetic hull map to a fixed enclosure. Inits
// should contain (or closely track) the attractor: the raster pullback is
// monotone and loses nothing from above, while strict subsets converge only
// as epsilon-dense dust with a raster-scale step floor.
PrototileSolution solve_adjoint(const DigitSystem& d, const std::vector<Region>* init, double tol,
                                int max_iter, double h);

// Iteration count bound for reaching `tol` from diameter diam0 at
// contraction c (the certificate the solver is held to).
int adjoint_iteration_bound(double tol, double contraction, double diam0);

// T' = attractor tiles placed at the source window's translations. Prototile
// shapes are re-anchored to bbox min corners; placements absorb the shift.
TilingWindow build_tiling(const PrototileSolution& sol, const TilingWindow& source);

// Coverage deficiency and pairwise overlap of {F_i + Lambda_i} on a ball.
VerificationReport verify_representability(const PrototileSolution& sol, const TilingWindow& source,
                                           const Vec& ball_center, double ball_radius);

// Def-style self-affinity of the prototiles against the digit system, checked
// on the source window's translations: (i) the inflation support identity
// per label, (ii) translation equivariance of the induced subdivision.
VerificationReport verify_self_affine(const std::vector<Region>& protos, const DigitSystem& d,
                                      const TilingWindow& win);

// C = max_j hausdorff(A_j, F_j), the LD radius both ways.
double mld_radius_bound(const std::vector<Region>& original, const PrototileSolution& sol);

void write_solution(std::ostream& os, const PrototileSolution& sol, const DigitSystem& d);

}  // namespace tilekit
