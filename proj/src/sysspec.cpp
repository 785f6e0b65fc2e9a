#include "tilekit/sysspec.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace tilekit {

int SystemSpec::label_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

Primitive parse_primitive(int dim, const std::string& kind, std::istringstream& ss, int line) {
    std::vector<double> vals;
    double x;
    while (ss >> x) vals.push_back(x);
    if (kind == "interval") {
        if (dim != 1 || vals.size() != 2) throw ParseError(line, "interval needs d=1 and two numbers");
        return Primitive::interval(vals[0], vals[1]);
    }
    if (kind == "box") {
        if (vals.size() != static_cast<std::size_t>(2 * dim))
            throw ParseError(line, "box needs 2*dim numbers");
        Vec lo(dim), hi(dim);
        for (int a = 0; a < dim; ++a) {
            lo.c[a] = vals[static_cast<std::size_t>(a)];
            hi.c[a] = vals[static_cast<std::size_t>(dim + a)];
        }
        return Primitive::box(lo, hi);
    }
    if (kind == "poly") {
        if (dim != 2 || vals.size() < 6 || vals.size() % 2 != 0)
            throw ParseError(line, "poly needs d=2 and at least three vertices");
        std::vector<Vec> verts;
        for (std::size_t v = 0; v + 1 < vals.size(); v += 2)
            verts.push_back(Vec(2, vals[v], vals[v + 1]));
        return Primitive::poly(verts);
    }
    throw ParseError(line, "unknown geometry kind '" + kind + "'");
}

}  // namespace

SystemSpec parse_spec(std::istream& is) {
    SystemSpec spec;
    std::string line;
    int ln = 0;
    bool header = false;
    auto need_label = [&](const std::string& name, int where) {
        int idx = spec.label_index(name);
        if (idx < 0) throw ParseError(where, "unknown prototile '" + name + "'");
        return idx;
    };
    while (std::getline(is, line)) {
        ++ln;
        std::string stripped = line.substr(0, line.find('#'));
        std::istringstream ss(stripped);
        std::string tok;
        if (!(ss >> tok)) continue;
        if (!header) {
            if (tok != "tiling-spec") throw ParseError(ln, "expected 'tiling-spec v1' header");
            header = true;
            continue;
        }
        if (tok == "end") break;
        if (tok == "dim") {
            ss >> spec.dim;
            check_dim(spec.dim);
            spec.expansion = Mat(spec.dim);
        } else if (tok == "h") {
            ss >> spec.h;
            if (!(spec.h > 0)) throw ParseError(ln, "h must be positive");
        } else if (tok == "window-radius") {
            ss >> spec.window_radius;
        } else if (tok == "expansion") {
            spec.expansion = Mat(spec.dim);
            for (int i = 0; i < spec.dim * spec.dim; ++i)
                if (!(ss >> spec.expansion.a[i])) throw ParseError(ln, "expansion needs dim^2 numbers");
            spec.has_expansion = true;
        } else if (tok == "prototile") {
            std::string name, kind;
            ss >> name >> kind;
            if (name.empty() || kind.empty()) throw ParseError(ln, "prototile <name> <geometry>");
            if (spec.label_index(name) >= 0) throw ParseError(ln, "duplicate prototile '" + name + "'");
            spec.names.push_back(name);
            spec.shapes.emplace_back();
            spec.shapes.back().push_back(parse_primitive(spec.dim, kind, ss, ln));
        } else if (tok == "shape") {
            std::string name, kind;
            ss >> name >> kind;
            int idx = need_label(name, ln);
            spec.shapes[static_cast<std::size_t>(idx)].push_back(parse_primitive(spec.dim, kind, ss, ln));
        } else if (tok == "place") {
            std::string name;
            ss >> name;
            PlacedTile t;
            t.label = need_label(name, ln);
            t.pos = Vec::zero(spec.dim);
            for (int a = 0; a < spec.dim; ++a)
                if (!(ss >> t.pos.c[a])) throw ParseError(ln, "place needs dim coordinates");
            spec.places.push_back(t);
            spec.has_places = true;
        } else if (tok == "digits") {
            std::string child, parent, colon;
            ss >> child >> parent >> colon;
            if (colon != ":") throw ParseError(ln, "digits <child> <parent> : v...");
            int ci = need_label(child, ln), pi = need_label(parent, ln);
            if (spec.digits.empty())
                spec.digits.assign(spec.names.size(),
                                   std::vector<std::vector<Vec>>(spec.names.size()));
            if (spec.digits.size() < spec.names.size())
                throw ParseError(ln, "declare all prototiles before digits");
            std::vector<double> vals;
            double x;
            while (ss >> x) vals.push_back(x);
            if (vals.size() % static_cast<std::size_t>(spec.dim) != 0)
                throw ParseError(ln, "digit vectors need dim coordinates each");
            for (std::size_t v = 0; v + spec.dim <= vals.size(); v += static_cast<std::size_t>(spec.dim)) {
                Vec d(spec.dim);
                for (int a = 0; a < spec.dim; ++a) d.c[a] = vals[v + static_cast<std::size_t>(a)];
                spec.digits[static_cast<std::size_t>(ci)][static_cast<std::size_t>(pi)].push_back(d);
            }
            spec.has_digits = true;
        } else if (tok == "seedcluster") {
            std::string name;
            ss >> name;
            int idx = need_label(name, ln);
            if (spec.seed_cluster.empty()) spec.seed_cluster.resize(spec.names.size());
            Vec p = Vec::zero(spec.dim);
            for (int a = 0; a < spec.dim; ++a)
                if (!(ss >> p.c[a])) throw ParseError(ln, "seedcluster needs dim coordinates");
            spec.seed_cluster[static_cast<std::size_t>(idx)].push_back(p);
            spec.has_seed_cluster = true;
        } else if (tok == "rule") {
            std::string name, arrow;
            ss >> name >> arrow;
            if (arrow != "=>") throw ParseError(ln, "rule <name> => <names...>");
            int idx = need_label(name, ln);
            if (spec.rules.empty()) spec.rules.resize(spec.names.size());
            if (spec.rules.size() < spec.names.size())
                throw ParseError(ln, "declare all prototiles before rules");
            std::vector<int>& r = spec.rules[static_cast<std::size_t>(idx)];
            if (!r.empty()) throw ParseError(ln, "duplicate rule for '" + name + "'");
            std::string w;
            while (ss >> w) r.push_back(need_label(w, ln));
            if (r.empty()) throw ParseError(ln, "empty rule");
            spec.has_rules = true;
        } else if (tok == "seedword") {
            std::string w;
            bool right = false;
            while (ss >> w) {
                if (w == "|") {
                    right = true;
                    continue;
                }
                (right ? spec.seed_right : spec.seed_left).push_back(need_label(w, ln));
            }
            if (!right) throw ParseError(ln, "seedword needs a '|' separator");
        } else if (tok == "iterations") {
            ss >> spec.iterations;
        } else if (tok == "tol") {
            ss >> spec.tol;
        } else if (tok == "k") {
            std::string v;
            ss >> v;
            spec.k_force = (v == "auto") ? 0 : std::stoi(v);
        } else if (tok == "L") {
            std::string v;
            ss >> v;
            spec.L_force = (v == "auto") ? -1 : std::stod(v);
        } else if (tok == "delta-min") {
            ss >> spec.delta_min;
        } else {
            throw ParseError(ln, "unknown directive '" + tok + "'");
        }
    }
    if (!header) throw ParseError(ln, "missing header");

    // validation
    if (spec.names.empty()) throw ValidationError("no prototiles declared");
    if (!spec.has_expansion) throw ValidationError("no expansion matrix");
    int sources = (spec.has_places ? 1 : 0) + (spec.has_digits ? 1 : 0) + (spec.has_rules ? 1 : 0);
    if (sources != 1)
        throw ValidationError("exactly one tiling source required (place | digits | rule), got " +
                              std::to_string(sources));
    if (spec.has_rules) {
        if (spec.dim != 1) throw ValidationError("word rules are 1-D only");
        for (std::size_t i = 0; i < spec.names.size(); ++i)
            if (spec.rules.size() <= i || spec.rules[i].empty())
                throw ValidationError("missing rule for '" + spec.names[i] + "'");
        if (spec.seed_left.empty() && spec.seed_right.empty())
            throw ValidationError("word rules need a seedword");
    }
    if (spec.has_seed_cluster && !spec.has_digits)
        throw ValidationError("seedcluster requires a digits source");
    for (const auto& prims : spec.shapes)
        if (prims.empty()) throw ValidationError("prototile without geometry");
    return spec;
}

void serialize_spec(std::ostream& os, const SystemSpec& spec) {
    os.precision(17);
    os << "tiling-spec v1\n";
    os << "dim " << spec.dim << "\n";
    os << "h " << spec.h << "\n";
    os << "window-radius " << spec.window_radius << "\n";
    os << "expansion";
    for (int i = 0; i < spec.dim * spec.dim; ++i) os << " " << spec.expansion.a[i];
    os << "\n";
    for (std::size_t i = 0; i < spec.names.size(); ++i) {
        for (std::size_t p = 0; p < spec.shapes[i].size(); ++p) {
            const Primitive& pr = spec.shapes[i][p];
            os << (p == 0 ? "prototile " : "shape ") << spec.names[i] << " ";
            if (pr.kind == Primitive::Kind::Interval)
                os << "interval";
            else if (pr.kind == Primitive::Kind::AABox)
                os << "box";
            else
                os << "poly";
            for (double x : pr.data) os << " " << x;
            os << "\n";
        }
    }
    if (spec.has_rules) {
        for (std::size_t i = 0; i < spec.names.size(); ++i) {
            os << "rule " << spec.names[i] << " =>";
            for (int c : spec.rules[i]) os << " " << spec.names[static_cast<std::size_t>(c)];
            os << "\n";
        }
        os << "seedword";
        for (int c : spec.seed_left) os << " " << spec.names[static_cast<std::size_t>(c)];
        os << " |";
        for (int c : spec.seed_right) os << " " << spec.names[static_cast<std::size_t>(c)];
        os << "\n";
        if (spec.iterations >= 0) os << "iterations " << spec.iterations << "\n";
    }
    if (spec.has_digits) {
        for (std::size_t i = 0; i < spec.names.size(); ++i)
            for (std::size_t j = 0; j < spec.names.size(); ++j) {
                if (spec.digits[i][j].empty()) continue;
                os << "digits " << spec.names[i] << " " << spec.names[j] << " :";
                for (const Vec& v : spec.digits[i][j])
                    for (int a = 0; a < spec.dim; ++a) os << " " << v[a];
                os << "\n";
            }
        if (spec.has_seed_cluster)
            for (std::size_t i = 0; i < spec.seed_cluster.size(); ++i)
                for (const Vec& p : spec.seed_cluster[i]) {
                    os << "seedcluster " << spec.names[i];
                    for (int a = 0; a < spec.dim; ++a) os << " " << p[a];
                    os << "\n";
                }
    }
    for (const PlacedTile& t : spec.places) {
        os << "place " << spec.names[static_cast<std::size_t>(t.label)];
        for (int a = 0; a < spec.dim; ++a) os << " " << t.pos[a];
        os << "\n";
    }
    if (spec.tol > 0) os << "tol " << spec.tol << "\n";
    if (spec.k_force > 0) os << "k " << spec.k_force << "\n";
    if (spec.L_force >= 0) os << "L " << spec.L_force << "\n";
    if (spec.delta_min > 0) os << "delta-min " << spec.delta_min << "\n";
    os << "end\n";
}

std::vector<Prototile> spec_prototiles(const SystemSpec& spec) {
    std::vector<Prototile> out;
    for (std::size_t i = 0; i < spec.names.size(); ++i) {
        Prototile p;
        p.name = spec.names[i];
        p.shape = Region::from_primitives(spec.dim, spec.shapes[i], spec.h);
        p.key = p.name;
        out.push_back(p);
    }
    return out;
}

DigitSystem spec_digit_system(const SystemSpec& spec) {
    if (!spec.has_digits) throw ValidationError("spec has no digit source");
    DigitSystem d;
    d.phi = adapted_expansion(spec.expansion, 16, 1e-9);
    d.k = 1;
    d.m = static_cast<int>(spec.names.size());
    d.D = spec.digits;
    return d;
}

TilingWindow build_window(const SystemSpec& spec) {
    if (spec.has_rules) {
        WordSystem ws;
        ws.names = spec.names;
        for (const auto& prims : spec.shapes) {
            Box b = prims[0].bbox(1);
            for (const Primitive& p : prims) b = box_union(b, p.bbox(1));
            ws.lengths.push_back(b.hi[0] - b.lo[0]);
        }
        ws.rules = spec.rules;
        if (spec.iterations >= 0)
            return word_window(ws, spec.seed_left, spec.seed_right, spec.iterations, spec.h, 2.0);
        // two-sided seeds advance in steps of 2 so even-iterate fixed seeds
        // stay coordinate-stable
        int step = spec.seed_left.empty() ? 1 : 2;
        return word_window_radius(ws, spec.seed_left, spec.seed_right, spec.window_radius, step,
                                  spec.h, 2.0);
    }
    if (spec.has_digits) {
        DigitSystem d = spec_digit_system(spec);
        std::vector<Prototile> protos = spec_prototiles(spec);
        Multiset seed;
        if (spec.has_seed_cluster) {
            seed = spec.seed_cluster;
        } else {
            auto found = find_self_seed(d, protos, 3);
            if (!found)
                throw ValidationError("no self-reproducing seed cluster found; provide seedcluster");
            seed = *found;
        }
        return window_from_digits(d, protos, seed, spec.window_radius, spec.h);
    }
    // explicit placements: the valid ball is certified by coverage sampling
    TilingWindow win;
    win.dim = spec.dim;
    win.h = spec.h;
    win.prototiles = spec_prototiles(spec);
    win.patch.tiles = spec.places;
    Box bb{Vec(spec.dim), Vec(spec.dim)};
    bool first = true;
    for (const PlacedTile& t : spec.places) {
        Box b = win.prototiles[static_cast<std::size_t>(t.label)].shape.bbox();
        b.lo = b.lo + t.pos;
        b.hi = b.hi + t.pos;
        bb = first ? b : box_union(bb, b);
        first = false;
    }
    win.center = 0.5 * (bb.lo + bb.hi);
    double halfspan = 0.5 * dist(bb.lo, bb.hi);
    win.radius = std::min(spec.window_radius, halfspan);
    win.finalize();
    double dM = win.max_tile_diameter();
    double eta = win.min_tile_inradius();
    double pitch = std::max(win.h, eta / 2);
    double certified = win.radius;
    std::int64_t steps = static_cast<std::int64_t>(std::floor(win.radius / pitch));
    std::int64_t span[3] = {0, 0, 0};
    for (int a = 0; a < win.dim; ++a) span[a] = steps;
    for (std::int64_t z = -span[2]; z <= span[2]; ++z)
        for (std::int64_t y = -span[1]; y <= span[1]; ++y)
            for (std::int64_t x = -span[0]; x <= span[0]; ++x) {
                Vec s = win.center;
                double off[3] = {double(x), double(y), double(z)};
                for (int a = 0; a < win.dim; ++a) s.c[a] += off[a] * pitch;
                double r = dist(s, win.center);
                if (r > win.radius || r >= certified) continue;
                if (win.tiles_at_point(s).empty()) certified = std::min(certified, r - pitch);
            }
    win.radius = std::max(0.0, certified - dM);
    if (win.radius <= 2 * dM) throw ValidationError("placements cover too small a ball");
    return win;
}

// ------------------------------------------------------------------ examples

namespace {

std::string base3_text(double radius) {
    std::ostringstream os;
    os << "tiling-spec v1\n";
    os << "dim 1\nh 0.001\nwindow-radius " << radius << "\n";
    os << "expansion 3\n";
    os << "prototile u interval 0 1\n";
    os << "digits u u : 0 1 2\n";
    os << "seedcluster u -1\nseedcluster u 0\n";
    os << "end\n";
    return os.str();
}

std::string fibonacci_text(double radius) {
    std::ostringstream os;
    os.precision(17);
    double tau = (1.0 + std::sqrt(5.0)) / 2.0;
    os << "tiling-spec v1\n";
    os << "dim 1\nh 0.001\nwindow-radius " << radius << "\n";
    os << "expansion " << tau << "\n";
    os << "prototile a interval 0 " << tau << "\n";
    os << "prototile b interval 0 1\n";
    os << "rule a => a b\n";
    os << "rule b => a\n";
    os << "seedword | a\n";
    os << "end\n";
    return os.str();
}

std::string chair_text(double radius) {
    std::ostringstream os;
    os << "tiling-spec v1\n";
    os << "dim 2\nh 0.03125\nwindow-radius " << radius << "\n";
    os << "expansion 2 0 0 2\n";
    os << "prototile L0 box 0 0 2 1\nshape L0 box 0 1 1 2\n";
    os << "prototile L1 box 0 0 1 2\nshape L1 box 1 1 2 2\n";
    os << "prototile L2 box 0 1 2 2\nshape L2 box 1 0 2 1\n";
    os << "prototile L3 box 0 0 2 1\nshape L3 box 1 1 2 2\n";
    // dissections of the doubled trominoes
    os << "digits L0 L0 : 0 0 1 1\n";
    os << "digits L1 L0 : 0 2\n";
    os << "digits L3 L0 : 2 0\n";
    os << "digits L1 L1 : 0 2 1 1\n";
    os << "digits L0 L1 : 0 0\n";
    os << "digits L2 L1 : 2 2\n";
    os << "digits L2 L2 : 1 1 2 2\n";
    os << "digits L1 L2 : 0 2\n";
    os << "digits L3 L2 : 2 0\n";
    os << "digits L3 L3 : 1 1 2 0\n";
    os << "digits L2 L3 : 2 2\n";
    os << "digits L0 L3 : 0 0\n";
    os << "seedcluster L0 0 0\n";
    os << "seedcluster L1 0 -2\n";
    os << "seedcluster L2 -2 -2\n";
    os << "seedcluster L3 -2 0\n";
    os << "end\n";
    return os.str();
}

std::string fib_shifted_text(double radius, double delta) {
    // exact fibonacci laid on the sigma-fixed half line, boundaries moved by
    // delta when letters n-3, n-2 are both 'a', labels refined accordingly
    double tau = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<int> word = {0};
    double need = 2 * (radius + 16) + 8;
    while (true) {
        double len = 0;
        for (int c : word) len += (c == 0 ? tau : 1.0);
        if (len >= need) break;
        std::vector<int> nxt;
        for (int c : word) {
            if (c == 0) {
                nxt.push_back(0);
                nxt.push_back(1);
            } else {
                nxt.push_back(0);
            }
        }
        word = std::move(nxt);
    }
    std::vector<double> pos(word.size() + 1, 0.0);
    for (std::size_t i = 0; i < word.size(); ++i)
        pos[i + 1] = pos[i] + (word[i] == 0 ? tau : 1.0);
    auto shift_at = [&](std::ptrdiff_t i) {
        if (i < 3 || i >= static_cast<std::ptrdiff_t>(word.size())) return 0.0;
        return (word[static_cast<std::size_t>(i - 3)] == 0 &&
                word[static_cast<std::size_t>(i - 2)] == 0)
                   ? delta
                   : 0.0;
    };
    std::ostringstream os;
    os.precision(17);
    os << "tiling-spec v1\n";
    os << "dim 1\nh 0.001\nwindow-radius " << radius << "\n";
    os << "expansion " << tau << "\n";
    std::map<std::string, double> label_len;
    std::vector<std::pair<std::string, double>> placements;
    for (std::size_t i = 0; i < word.size(); ++i) {
        double sl = shift_at(static_cast<std::ptrdiff_t>(i));
        double sr = shift_at(static_cast<std::ptrdiff_t>(i) + 1);
        double len = (word[i] == 0 ? tau : 1.0) + sr - sl;
        std::string name = std::string(word[i] == 0 ? "a" : "b") + (sl > 0 ? "s" : "0") +
                           (sr > 0 ? "s" : "0");
        label_len[name] = len;
        placements.emplace_back(name, pos[i] + sl);
    }
    for (const auto& kv : label_len)
        os << "prototile " << kv.first << " interval 0 " << kv.second << "\n";
    for (const auto& pl : placements) os << "place " << pl.first << " " << pl.second << "\n";
    os << "end\n";
    return os.str();
}

}  // namespace

std::string example_spec(const std::string& name, double radius, double delta) {
    if (name == "base3") return base3_text(radius);
    if (name == "fibonacci") return fibonacci_text(radius);
    if (name == "chair") return chair_text(radius);
    if (name == "fib-shifted") return fib_shifted_text(radius, delta);
    throw ValidationError("unknown example '" + name +
                          "' (have base3, fibonacci, chair, fib-shifted)");
}

}  // namespace tilekit
