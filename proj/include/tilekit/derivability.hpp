#pragma once

#include "tilekit/report.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

// Result of a finite-window local-derivability check. A pass is a
// certificate only against violations visible at the sampling spacing; the
// margin is recorded. A fail carries a re-verifiable witness pair.
struct LDReport {
    enum class Status { Pass, Fail, Inconclusive } status = Status::Pass;
    double radius = 0;
    double spacing = 0;
    std::int64_t samples = 0;
    std::int64_t buckets = 0;
    bool has_witness = false;
    Vec witness_x, witness_y;
    std::string note;

    bool passed() const { return status == Status::Pass; }
    nlohmann::json to_json() const;
};

struct NoPassingRadiusError : std::runtime_error {
    explicit NoPassingRadiusError(const std::string& w) : std::runtime_error(w) {}
};

// Does a matching R-neighborhood in W1 force matching tiles in W2?
// Samples a grid of the given spacing plus all tile anchor points.
LDReport check_ld(const TilingWindow& w1, const TilingWindow& w2, double R, double spacing);

// Recompute a witness pair from scratch: antecedent holds, consequent fails.
bool verify_ld_witness(const TilingWindow& w1, const TilingWindow& w2, double R, const Vec& x,
                       const Vec& y);

std::pair<LDReport, LDReport> check_mld(const TilingWindow& w1, const TilingWindow& w2, double R1,
                                        double R2, double spacing);

double compose_ld_radius(double r1, double r2);

struct ScaledLdRadii {
    double step = 0;   // R * lambda^{-(ell+1)}
    double total = 0;  // R / (lambda - 1)
};
ScaledLdRadii scaled_ld_radii(double R, double lambda, int ell);

struct MinLdBracket {
    double r_pass = 0;
    double r_fail = 0;
};
// Bisection over check_ld; requires a pass at R_max.
MinLdBracket estimate_min_ld_radius(const TilingWindow& w1, const TilingWindow& w2, double R_max,
                                    double spacing, double resolution = 0);

}  // namespace tilekit
