// tilekit command line: recode/substitute/solve pipelines for finite tiling
// windows, LD/MLD checks, derived Voronoi tools, rendering.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tilekit/pipeline.hpp"
#include "tilekit/render.hpp"
#include "tilekit/voronoi.hpp"

using namespace tilekit;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

SystemSpec load_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open spec file " + path);
    return parse_spec(f);
}

TilingWindow load_window(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open window file " + path);
    return read_window(f);
}

// windows can be given directly or through a spec file
TilingWindow load_window_or_spec(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw ValidationError("cannot open " + path);
    std::string first;
    std::getline(probe, first);
    probe.close();
    if (first.rfind("tiling-window", 0) == 0) return load_window(path);
    return build_window(load_spec(path));
}

int ld_status(const LDReport& rep) {
    if (rep.status == LDReport::Status::Fail) return kExitFail;
    if (rep.status == LDReport::Status::Inconclusive) return kExitInconclusive;
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-affine tiling toolkit"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");

    auto* sa = app.add_subcommand("selfaffinize",
                                  "recode, substitute, solve and verify a tiling spec");
    sa->set_help_flag("--help", "print help");
    std::string sa_spec, sa_out = "out";
    std::string sa_k = "auto", sa_L = "auto";
    double sa_h = 0, sa_tol = 0;
    sa->add_option("spec", sa_spec, "tiling spec file")->required();
    sa->add_option("--out", sa_out, "output directory");
    sa->add_option("--k", sa_k, "substitution power (auto|N)");
    sa->add_option("--L", sa_L, "collar radius (auto|X)");
    sa->add_option("--h", sa_h, "raster resolution override");
    sa->add_option("--tol", sa_tol, "solver tolerance override");

    auto* vl = app.add_subcommand("verify-ld", "local derivability check between two windows");
    vl->set_help_flag("--help", "print help");
    std::string vl_a, vl_b, vl_out;
    double vl_radius = 1.0, vl_spacing = 0.1;
    bool vl_both = false;
    vl->add_option("winA", vl_a, "first window (or spec)")->required();
    vl->add_option("winB", vl_b, "second window (or spec)")->required();
    vl->add_option("--radius", vl_radius, "LD radius")->required();
    vl->add_option("--spacing", vl_spacing, "sample spacing")->required();
    vl->add_flag("--both", vl_both, "check both directions (MLD)");
    vl->add_option("--out", vl_out, "report file (default stdout)");

    auto* vo = app.add_subcommand("voronoi", "derived Voronoi tiling and psi-finiteness probe");
    vo->set_help_flag("--help", "print help");
    std::string vo_in, vo_out = "voronoi-out";
    double vo_r = 1.0;
    bool vo_probe = false;
    double vo_psi = 0;
    int vo_levels = 3, vo_M = 3;
    vo->add_option("input", vo_in, "window or spec file")->required();
    vo->add_option("--r", vo_r, "locator patch radius")->required();
    vo->add_flag("--probe", vo_probe, "run the psi-finiteness probe");
    vo->add_option("--psi", vo_psi, "similitude ratio for the probe");
    vo->add_option("--levels", vo_levels, "probe levels");
    vo->add_option("--M", vo_M, "probe base budget");
    vo->add_option("--out", vo_out, "output directory");

    auto* re = app.add_subcommand("render", "render a window or solution to SVG");
    re->set_help_flag("--help", "print help");
    std::string re_in, re_out = "out.svg";
    re->add_option("artifact", re_in, "window / solution / spec file")->required();
    re->add_option("--out", re_out, "output SVG path");

    auto* sg = app.add_subcommand("solve-gifs", "solve the adjoint set equations of a digit system");
    sg->set_help_flag("--help", "print help");
    std::string sg_in, sg_out = "solution.txt";
    double sg_tol = 0, sg_h = 1e-3;
    sg->add_option("digits", sg_in, "digit system file")->required();
    sg->add_option("--tol", sg_tol, "certified tolerance")->required();
    sg->add_option("--h", sg_h, "raster resolution");
    sg->add_option("--out", sg_out, "solution output path");

    auto* me = app.add_subcommand("make-example", "write a shipped example spec");
    me->set_help_flag("--help", "print help");
    std::string me_name, me_out = "example.spec";
    double me_radius = 200, me_delta = 0.1;
    me->add_option("name", me_name, "base3 | fibonacci | chair | fib-shifted")->required();
    me->add_option("--out", me_out, "spec output path");
    me->add_option("--radius", me_radius, "window radius");
    me->add_option("--delta", me_delta, "boundary shift (fib-shifted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sa) {
            SystemSpec spec = load_spec(sa_spec);
            if (sa_k != "auto") spec.k_force = std::stoi(sa_k);
            if (sa_L != "auto") spec.L_force = std::stod(sa_L);
            if (sa_h > 0) spec.h = sa_h;
            if (sa_tol > 0) spec.tol = sa_tol;
            int code = run_pipeline(spec, sa_out);
            std::ifstream sum(sa_out + "/summary.json");
            std::cout << sum.rdbuf();
            return code;
        }
        if (*vl) {
            TilingWindow a = load_window_or_spec(vl_a);
            TilingWindow b = load_window_or_spec(vl_b);
            nlohmann::json out;
            int code;
            if (vl_both) {
                auto pair = check_mld(a, b, vl_radius, vl_radius, vl_spacing);
                out["forward"] = pair.first.to_json();
                out["backward"] = pair.second.to_json();
                code = std::max(ld_status(pair.first), ld_status(pair.second));
            } else {
                LDReport rep = check_ld(a, b, vl_radius, vl_spacing);
                out = rep.to_json();
                code = ld_status(rep);
            }
            if (vl_out.empty()) {
                std::cout << out.dump(2) << "\n";
            } else {
                std::ofstream f(vl_out);
                f << out.dump(2) << "\n";
            }
            return code;
        }
        if (*vo) {
            TilingWindow win = load_window_or_spec(vo_in);
            std::filesystem::create_directories(vo_out);
            // the locator construction is anchored at the origin; recenter
            // windows that do not contain it (the shift is reported)
            Vec recenter = Vec::zero(win.dim);
            if (!win.ball_inside_valid(Vec::zero(win.dim), vo_r)) {
                recenter = -1.0 * win.center;
                for (PlacedTile& t : win.patch.tiles) t.pos = t.pos + recenter;
                win.center = Vec::zero(win.dim);
                win.finalize();
                std::cerr << "note: window recentered by (";
                for (int a = 0; a < win.dim; ++a)
                    std::cerr << recenter[a] << (a + 1 < win.dim ? "," : ")\n");
            }
            DerivedVoronoiTiling dv = derived_voronoi(win, vo_r);
            // export as a window: group congruent cells per label
            std::vector<RawTile> cells;
            double biggest = 0;
            for (const Region& c : dv.cells)
                if (!c.empty()) biggest = std::max(biggest, c.bbox().diameter());
            for (std::size_t i = 0; i < dv.cells.size(); ++i) {
                if (dv.cells[i].empty() || dv.labels[i] < 0) continue;
                if (norm(dv.locators[i]) > dv.radius - biggest) continue;
                cells.push_back({dv.cells[i], dv.labels[i]});
            }
            Decomposition dec = prototile_decomposition(cells, win.h);
            TilingWindow out;
            out.dim = win.dim;
            out.h = win.h;
            out.prototiles = dec.prototiles;
            out.patch = dec.placements;
            out.center = dv.center;
            out.radius = std::max(0.0, dv.radius - biggest);
            out.finalize();
            {
                std::ofstream f(vo_out + "/derived_voronoi.txt");
                write_window(f, out);
            }
            int code = kExitPass;
            if (vo_probe) {
                if (vo_psi <= 1) throw ValidationError("--probe needs --psi > 1");
                PsiFinitenessResult res =
                    psi_finiteness_probe(win, Mat::scalar(win.dim, vo_psi), vo_r, vo_levels, vo_M);
                std::ofstream f(vo_out + "/probe.json");
                f << res.report.to_json().dump(2) << "\n";
                std::cout << res.report.to_json().dump(2) << "\n";
                code = res.report.passed() ? kExitPass : kExitFail;
            }
            return code;
        }
        if (*re) {
            std::ifstream probe(re_in);
            if (!probe) throw ValidationError("cannot open " + re_in);
            std::string first;
            std::getline(probe, first);
            probe.close();
            std::ofstream out(re_out);
            if (first.rfind("solution", 0) == 0) {
                std::ifstream f(re_in);
                std::string line;
                std::getline(f, line);  // header
                int depth = 0;
                bool started = false;
                while (std::getline(f, line)) {  // skip the JSON manifest block
                    for (char c : line) {
                        if (c == '{') {
                            ++depth;
                            started = true;
                        }
                        if (c == '}') --depth;
                    }
                    if (started && depth == 0) break;
                }
                std::vector<Region> protos;
                while (f.good()) {
                    std::streampos pos = f.tellg();
                    if (!std::getline(f, line)) break;
                    if (line.rfind("region", 0) != 0) continue;
                    f.seekg(pos);
                    protos.push_back(read_region(f));
                }
                if (protos.empty()) throw ValidationError("no regions in solution file");
                render_solution_svg(out, protos);
            } else {
                TilingWindow win = load_window_or_spec(re_in);
                render_window_svg(out, win);
            }
            return kExitPass;
        }
        if (*sg) {
            std::ifstream f(sg_in);
            if (!f) throw ValidationError("cannot open " + sg_in);
            DigitSystem d = read_digit_system(f);
            PrototileSolution sol = solve_adjoint(d, nullptr, sg_tol, 512, sg_h);
            std::ofstream o(sg_out);
            write_solution(o, sol, d);
            std::cout << "certified error " << sol.hausdorff_error << " after " << sol.iterations
                      << " iterations\n";
            return kExitPass;
        }
        if (*me) {
            std::string text = example_spec(me_name, me_radius, me_delta);
            std::ofstream f(me_out);
            f << text;
            std::cout << "wrote " << me_out << "\n";
            return kExitPass;
        }
    } catch (const ParseError& ex) {
        std::cerr << "parse error: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const ValidationError& ex) {
        std::cerr << "invalid input: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitFail;
    }
    return kExitUsage;
}
