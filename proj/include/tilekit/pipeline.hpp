#pragma once

#include <optional>
#include <string>

#include "tilekit/derivability.hpp"
#include "tilekit/gifs.hpp"
#include "tilekit/selfaffinize.hpp"
#include "tilekit/sysspec.hpp"

namespace tilekit {

struct PipelineOptions {
    int force_k = 0;        // 0 = auto: smallest verifying k up to the Eq-(5) bound
    double force_L = -1;    // < 0 = auto (recode only if the unrecoded window fails)
    double tol = 0;         // 0 = default 2h
    double delta_min = 0;   // 0 = default h
    double ld_spacing = 0;  // 0 = auto
    int max_labels = 4096;
    int solver_max_iter = 512;
};

// The verified substitution structure of a window: possibly recoded, with
// the chosen k, reference points, pseudo-substitution and digit system.
struct Construction {
    TilingWindow window;
    bool recoded = false;
    double L = 0;
    double measured_R_ld = -1;
    int k = 1;
    ReferencePoints refs;
    PseudoSubstitution ps;
    DigitSystem digits;
    VerificationReport s1s4;
    VerificationReport fixed_point;
};

Construction construct_substitution(const TilingWindow& input, const ExpansionMap& phi,
                                    const PipelineOptions& opts);

struct PipelineResult {
    ExpansionMap phi;
    TileMetrics metrics;
    Construction cons;
    SubstitutionMatrix S;
    std::optional<int> primitivity;
    PrototileSolution sol;
    TilingWindow tprime;
    double C = 0;
    VerificationReport representability;
    VerificationReport self_affine_prime;
    VerificationReport self_affine_input;
    LDReport mld_forward, mld_backward;
    bool ok = false;
    bool inconclusive = false;
    nlohmann::json summary;
};

PipelineResult run_pipeline_on_window(const TilingWindow& input, const Mat& phi_matrix,
                                      const PipelineOptions& opts);

// Parse-build-run-write; returns the CLI exit code (0 pass, 1 fail, 3
// inconclusive). Artifacts and JSON reports land in out_dir.
int run_pipeline(const SystemSpec& spec, const std::string& out_dir);

}  // namespace tilekit
