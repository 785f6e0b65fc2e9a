#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "tilekit/digits.hpp"
#include "tilekit/generate.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

struct ParseError : std::runtime_error {
    int line = 0;
    ParseError(int ln, const std::string& w)
        : std::runtime_error("line " + std::to_string(ln) + ": " + w), line(ln) {}
};
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& w) : std::runtime_error(w) {}
};

// A system description: expansion, prototiles, exactly one tiling source
// (explicit placements, digit sets, or 1-D word rules) and tool config.
struct SystemSpec {
    int dim = 1;
    double h = 1e-3;
    double window_radius = 100;
    Mat expansion;
    bool has_expansion = false;

    std::vector<std::string> names;
    std::vector<std::vector<Primitive>> shapes;

    bool has_places = false;
    std::vector<PlacedTile> places;

    bool has_digits = false;
    std::vector<std::vector<std::vector<Vec>>> digits;  // [child][parent]
    bool has_seed_cluster = false;
    Multiset seed_cluster;

    bool has_rules = false;
    std::vector<std::vector<int>> rules;
    std::vector<int> seed_left, seed_right;
    int iterations = -1;  // -1: pick from window_radius

    // config / overrides
    double tol = -1;        // <0: default
    int k_force = 0;        // 0: auto
    double L_force = -1;    // <0: auto, 0: never recode
    double delta_min = -1;  // <0: default h

    int label_index(const std::string& name) const;
};

SystemSpec parse_spec(std::istream& is);
void serialize_spec(std::ostream& os, const SystemSpec& spec);

std::vector<Prototile> spec_prototiles(const SystemSpec& spec);
DigitSystem spec_digit_system(const SystemSpec& spec);

// Realize the spec's tiling source as a window of the requested radius.
TilingWindow build_window(const SystemSpec& spec);

// Shipped example specs ("base3", "fibonacci", "chair", "fib-shifted").
// fib-shifted emits explicit placements of the boundary-shift construction.
std::string example_spec(const std::string& name, double radius, double delta);

}  // namespace tilekit
