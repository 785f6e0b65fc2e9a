#include "tilekit/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace tilekit {

namespace {

struct AttemptFailure {
    std::string what;
};

// one (window, k) attempt: refs -> f -> (S1)-(S4) -> digits -> fixed point
std::optional<Construction> attempt(const TilingWindow& win, const ExpansionMap& phi, int k,
                                    double delta_min, std::string* why) {
    Mat eff = mat_pow(phi.powered(), k);
    try {
        Construction c;
        c.window = win;
        c.k = k;
        c.refs = choose_reference_points(win, eff, k, delta_min);
        c.ps = build_pseudo_substitution(win, eff, k, c.refs);
        c.s1s4 = verify_S1_S4(c.ps, win);
        if (!c.s1s4.passed()) {
            *why = "(S1)-(S4) failed at k=" + std::to_string(k);
            return std::nullopt;
        }
        c.digits = extract_digits(c.ps, win, phi);
        c.digits.k = k;
        c.fixed_point = verify_fixed_point(c.digits, win);
        if (!c.fixed_point.passed()) {
            *why = "fixed-point check failed at k=" + std::to_string(k);
            return std::nullopt;
        }
        return c;
    } catch (const std::exception& ex) {
        *why = std::string(ex.what()) + " (k=" + std::to_string(k) + ")";
        return std::nullopt;
    }
}

}  // namespace

Construction construct_substitution(const TilingWindow& input, const ExpansionMap& phi,
                                    const PipelineOptions& opts) {
    double h = input.h;
    double delta_min = opts.delta_min > 0 ? opts.delta_min : h;
    TileMetrics tm = tile_metrics(input);
    int k_hi = opts.force_k > 0 ? opts.force_k : choose_k(phi.lambda, tm.eta, tm.d_M);
    int k_lo = opts.force_k > 0 ? opts.force_k : 1;

    std::string last_why = "no attempt made";

    // stage A: the window as-is (unless a positive L is forced)
    if (opts.force_L <= 0) {
        for (int k = k_lo; k <= k_hi; ++k) {
            std::string why;
            if (auto c = attempt(input, phi, k, delta_min, &why)) return *c;
            last_why = why;
        }
        if (opts.force_L == 0)
            throw InconsistentDigitsError("construction failed without recoding: " + last_why);
    }

    // stage B: collar recode; L from the empirical LD radius unless forced
    double L = opts.force_L;
    double measured = -1;
    if (L <= 0) {
        Mat inv = inverse(phi.powered());
        TilingWindow scaled = transform_window(inv, input);
        double spacing = opts.ld_spacing > 0 ? opts.ld_spacing
                                             : std::max(h, input.radius / 20000.0);
        double r_max = 2 * tm.d_M;
        std::optional<MinLdBracket> bracket;
        while (r_max < input.radius / 4) {
            try {
                bracket = estimate_min_ld_radius(input, scaled, r_max, spacing,
                                                 std::max(h, r_max / 256));
                break;
            } catch (const NoPassingRadiusError&) {
                r_max *= 2;
            }
        }
        if (!bracket)
            throw InconsistentDigitsError(
                "input does not derive its own scale-down at any tested radius; "
                "not pseudo-self-affine? (last attempt radius " +
                std::to_string(r_max) + ")");
        measured = bracket->r_pass;
        // the measured relation is T -> phi^{-1}T; the collar bound wants the
        // phi T -> T radius, an operator-norm factor larger
        double R_paper = sigma_max(phi.powered()) * measured;
        L = collar_radius(R_paper, phi.lambda, tm.d_M) * 1.25 + 4 * h;
    }

    TilingWindow recoded = collar_recode(input, L, opts.max_labels);
    for (int k = k_lo; k <= k_hi; ++k) {
        std::string why;
        if (auto c = attempt(recoded, phi, k, delta_min, &why)) {
            c->recoded = true;
            c->L = L;
            c->measured_R_ld = measured;
            return *c;
        }
        last_why = why;
    }
    throw InconsistentDigitsError("construction failed even after recoding at L=" +
                                  std::to_string(L) + ": " + last_why);
}

PipelineResult run_pipeline_on_window(const TilingWindow& input, const Mat& phi_matrix,
                                      const PipelineOptions& opts) {
    PipelineResult res;
    res.phi = adapted_expansion(phi_matrix, 16, 1e-9);
    res.metrics = tile_metrics(input);
    res.cons = construct_substitution(input, res.phi, opts);
    const TilingWindow& W = res.cons.window;
    double h = W.h;

    res.S = substitution_matrix(res.cons.digits);
    res.primitivity = is_primitive(res.S, 4 * res.cons.digits.m + 8);

    double tol = opts.tol > 0 ? opts.tol : 2 * h;
    res.sol = solve_adjoint(res.cons.digits, nullptr, tol, opts.solver_max_iter, h);

    std::vector<Region> original;
    for (const Prototile& p : W.prototiles) original.push_back(p.shape);
    res.C = mld_radius_bound(original, res.sol);

    res.tprime = build_tiling(res.sol, W);

    double ball = W.radius - res.C - res.metrics.d_M - 8 * h;
    res.representability = verify_representability(res.sol, W, W.center, std::max(ball, 4 * h));
    res.self_affine_prime = verify_self_affine(res.sol.F, res.cons.digits, W);
    res.self_affine_input = verify_self_affine(original, res.cons.digits, W);

    double mld_radius = std::max(res.C, 2 * h) + 2 * h;
    // spacing targets ~2e5 samples over the common region
    double spacing = opts.ld_spacing > 0
                         ? opts.ld_spacing
                         : std::max(h, 2 * W.radius / std::pow(2e5, 1.0 / W.dim));
    res.mld_forward = check_ld(W, res.tprime, mld_radius, spacing);
    res.mld_backward = check_ld(res.tprime, W, mld_radius, spacing);

    res.ok = res.cons.s1s4.passed() && res.cons.fixed_point.passed() &&
             res.representability.passed() && res.self_affine_prime.passed() &&
             res.mld_forward.passed() && res.mld_backward.passed() && res.primitivity.has_value();
    res.inconclusive = !res.primitivity.has_value() && res.cons.s1s4.passed() &&
                       res.cons.fixed_point.passed() && res.representability.passed() &&
                       res.self_affine_prime.passed() && res.mld_forward.passed() &&
                       res.mld_backward.passed();

    nlohmann::json& s = res.summary;
    s["stages"] = nlohmann::json::array();
    s["metrics"]["d_M"] = res.metrics.d_M;
    s["metrics"]["eta"] = res.metrics.eta;
    s["metrics"]["lambda"] = res.phi.lambda;
    s["metrics"]["power_ell"] = res.phi.ell;
    s["metrics"]["k"] = res.cons.k;
    s["metrics"]["recoded"] = res.cons.recoded;
    s["metrics"]["L"] = res.cons.L;
    if (res.cons.measured_R_ld >= 0) s["metrics"]["measured_R_ld"] = res.cons.measured_R_ld;
    s["metrics"]["labels"] = res.cons.digits.m;
    s["metrics"]["clearance_delta"] = res.cons.refs.delta;
    s["metrics"]["primitivity_power"] = res.primitivity ? *res.primitivity : -1;
    s["metrics"]["solver_iterations"] = res.sol.iterations;
    s["metrics"]["solver_error"] = res.sol.hausdorff_error;
    s["metrics"]["mld_radius_C"] = res.C;
    s["metrics"]["self_affine_input_mismatch"] =
        res.self_affine_input.metrics.count("max_support_mismatch")
            ? res.self_affine_input.metrics.at("max_support_mismatch")
            : -1.0;
    s["stages"].push_back(res.cons.s1s4.to_json());
    s["stages"].push_back(res.cons.fixed_point.to_json());
    s["stages"].push_back(res.representability.to_json());
    s["stages"].push_back(res.self_affine_prime.to_json());
    {
        nlohmann::json in = res.self_affine_input.to_json();
        in["stage"] = "self-affine-input";
        in["advisory"] = true;
        s["stages"].push_back(in);
    }
    {
        nlohmann::json f = res.mld_forward.to_json();
        f["stage"] = "mld-forward";
        f["anchor"] = "check:mld";
        s["stages"].push_back(f);
        nlohmann::json b = res.mld_backward.to_json();
        b["stage"] = "mld-backward";
        b["anchor"] = "check:mld";
        s["stages"].push_back(b);
    }
    s["status"] = res.ok ? "pass" : (res.inconclusive ? "inconclusive" : "fail");
    return res;
}

int run_pipeline(const SystemSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    TilingWindow input = build_window(spec);

    PipelineOptions opts;
    opts.force_k = spec.k_force;
    opts.force_L = spec.L_force;
    if (spec.tol > 0) opts.tol = spec.tol;
    if (spec.delta_min > 0) opts.delta_min = spec.delta_min;

    PipelineResult res = run_pipeline_on_window(input, spec.expansion, opts);

    {
        std::ofstream f(out_dir + "/input_window.txt");
        write_window(f, input);
    }
    {
        std::ofstream f(out_dir + "/recoded_window.txt");
        write_window(f, res.cons.window);
    }
    {
        std::ofstream f(out_dir + "/digits.txt");
        write_digit_system(f, res.cons.digits);
    }
    {
        std::ofstream f(out_dir + "/solution.txt");
        write_solution(f, res.sol, res.cons.digits);
    }
    {
        std::ofstream f(out_dir + "/tprime_window.txt");
        write_window(f, res.tprime);
    }
    {
        std::ofstream f(out_dir + "/summary.json");
        f << res.summary.dump(2) << "\n";
    }
    return res.ok ? 0 : (res.inconclusive ? 3 : 1);
}

}  // namespace tilekit
