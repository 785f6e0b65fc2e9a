#pragma once

#include <stdexcept>

#include "tilekit/geom.hpp"

namespace tilekit {

// An expanding linear map phi together with a power ell such that phi^ell
// expands every vector in the Euclidean norm; lambda is the certified lower
// expansion constant sigma_min(phi^ell) > 1.
struct ExpansionMap {
    int dim = 1;
    Mat matrix;     // phi
    int ell = 1;    // the map actually used is matrix^ell
    double lambda = 0;

    Mat powered() const { return mat_pow(matrix, ell); }
};

struct NotExpandingError : std::runtime_error {
    explicit NotExpandingError(const std::string& w) : std::runtime_error(w) {}
};
struct PowerExhaustedError : std::runtime_error {
    explicit PowerExhaustedError(const std::string& w) : std::runtime_error(w) {}
};

// Smallest ell <= max_power with sigma_min(matrix^ell) > 1. Throws
// NotExpanding when some eigenvalue modulus is <= 1 + tol, PowerExhausted
// when no admissible ell exists.
ExpansionMap adapted_expansion(const Mat& matrix, int max_power, double tol);

double sigma_min(const Mat& m);
double sigma_max(const Mat& m);

}  // namespace tilekit
