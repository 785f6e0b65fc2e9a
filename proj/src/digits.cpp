#include "tilekit/digits.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace tilekit {

double DigitSystem::lambda_k() const { return sigma_min(effective()); }

std::string DigitSystem::canonical_text() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << "m=" << m << ";k=" << k << ";ell=" << phi.ell << ";A=";
    for (int i = 0; i < phi.dim * phi.dim; ++i) ss << phi.matrix.a[i] << ",";
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            ss << "|D" << i << "," << j << ":";
            std::vector<std::string> items;
            for (const Vec& v : D[i][j]) {
                std::ostringstream vs;
                CellKey ck = quantize(v, 1e-9);
                for (int a = 0; a < phi.dim; ++a) vs << ck.k[a] << ",";
                items.push_back(vs.str());
            }
            std::sort(items.begin(), items.end());
            for (auto& s : items) ss << s << ";";
        }
    return ss.str();
}

std::uint64_t DigitSystem::content_hash() const { return fnv1a(canonical_text()); }

SubstitutionMatrix substitution_matrix(const DigitSystem& d) {
    SubstitutionMatrix s(d.m, std::vector<std::int64_t>(d.m, 0));
    for (int i = 0; i < d.m; ++i)
        for (int j = 0; j < d.m; ++j) s[i][j] = static_cast<std::int64_t>(d.D[i][j].size());
    return s;
}

SubstitutionMatrix matrix_power(const SubstitutionMatrix& s, int p) {
    int m = static_cast<int>(s.size());
    SubstitutionMatrix r(m, std::vector<std::int64_t>(m, 0));
    for (int i = 0; i < m; ++i) r[i][i] = 1;
    SubstitutionMatrix base = s;
    for (int t = 0; t < p; ++t) {
        SubstitutionMatrix nxt(m, std::vector<std::int64_t>(m, 0));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                std::int64_t acc = 0;
                for (int l = 0; l < m; ++l) acc += r[i][l] * base[l][j];
                nxt[i][j] = acc;
            }
        r = nxt;
    }
    return r;
}

std::optional<int> is_primitive(const SubstitutionMatrix& s, int max_power) {
    int m = static_cast<int>(s.size());
    SubstitutionMatrix p = s;
    for (int ell = 1; ell <= max_power; ++ell) {
        bool positive = true;
        for (int i = 0; i < m && positive; ++i)
            for (int j = 0; j < m; ++j)
                if (p[i][j] <= 0) {
                    positive = false;
                    break;
                }
        if (positive) return ell;
        // next power, with saturation so long searches cannot overflow
        SubstitutionMatrix nxt(m, std::vector<std::int64_t>(m, 0));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                std::int64_t acc = 0;
                for (int l = 0; l < m; ++l)
                    acc = std::min<std::int64_t>(acc + p[i][l] * s[l][j], std::int64_t(1) << 40);
                nxt[i][j] = acc;
            }
        p = nxt;
    }
    return std::nullopt;
}

MultisetImage apply_multiset_map(const DigitSystem& d, const Multiset& x) {
    MultisetImage out;
    out.sets.resize(static_cast<std::size_t>(d.m));
    Mat eff = d.effective();
    double q = 1e-9;
    for (int i = 0; i < d.m; ++i) {
        std::unordered_set<CellKey, CellKeyHash> seen;
        for (int j = 0; j < d.m; ++j) {
            if (static_cast<int>(x.size()) <= j) continue;
            for (const Vec& p : x[static_cast<std::size_t>(j)])
                for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                    Vec img = apply(eff, p) + dig;
                    CellKey ck = quantize(img, q);
                    if (seen.insert(ck).second)
                        out.sets[static_cast<std::size_t>(i)].push_back(img);
                    else
                        ++out.collisions;
                }
        }
    }
    return out;
}

Patch expand_patch(const DigitSystem& d, const Patch& p, int n) {
    Mat eff = d.effective();
    Patch cur = p;
    for (int round = 0; round < n; ++round) {
        Patch nxt;
        for (const PlacedTile& t : cur.tiles) {
            if (t.label < 0 || t.label >= d.m)
                throw UnknownLabelError("expand_patch: label " + std::to_string(t.label));
            Vec base = apply(eff, t.pos);
            for (int i = 0; i < d.m; ++i)
                for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(t.label)]) {
                    PlacedTile c;
                    c.label = i;
                    c.pos = base + dig;
                    nxt.tiles.push_back(c);
                }
        }
        // deterministic output order: by (label, lexicographic position)
        std::sort(nxt.tiles.begin(), nxt.tiles.end(), [](const PlacedTile& a, const PlacedTile& b) {
            if (a.label != b.label) return a.label < b.label;
            return lex_less(a.pos, b.pos);
        });
        cur = std::move(nxt);
    }
    return cur;
}

Multiset cluster_of_patch(int m, const Patch& p) {
    Multiset c(static_cast<std::size_t>(m));
    for (const PlacedTile& t : p.tiles) c[static_cast<std::size_t>(t.label)].push_back(t.pos);
    return c;
}

Patch patch_of_cluster(const Multiset& c) {
    Patch p;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (const Vec& v : c[i]) {
            PlacedTile t;
            t.label = static_cast<int>(i);
            t.pos = v;
            p.tiles.push_back(t);
        }
    return p;
}

DigitSystem digit_power(const DigitSystem& d, int times) {
    // composition rule: (D')_{il} = U_j (D_{ij} + phi^k D_{jl})
    DigitSystem cur = d;
    for (int t = 1; t < times; ++t) {
        DigitSystem nxt = d;
        nxt.k = cur.k + d.k;
        Mat effd = d.effective();
        nxt.D.assign(static_cast<std::size_t>(d.m),
                     std::vector<std::vector<Vec>>(static_cast<std::size_t>(d.m)));
        for (int i = 0; i < d.m; ++i)
            for (int l = 0; l < d.m; ++l) {
                std::vector<Vec>& out = nxt.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
                for (int j = 0; j < d.m; ++j)
                    for (const Vec& a : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                        for (const Vec& b : cur.D[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)])
                            out.push_back(a + apply(effd, b));
                std::sort(out.begin(), out.end(),
                          [](const Vec& x, const Vec& y) { return lex_less(x, y); });
            }
        cur = nxt;
    }
    return cur;
}

bool multiset_equal(const Multiset& a, const Multiset& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        std::vector<Vec> x = a[i], y = b[i];
        auto cmp = [](const Vec& p, const Vec& q) { return lex_less(p, q); };
        std::sort(x.begin(), x.end(), cmp);
        std::sort(y.begin(), y.end(), cmp);
        for (std::size_t t = 0; t < x.size(); ++t)
            if (!approx_eq(x[t], y[t], tol)) return false;
    }
    return true;
}

std::optional<LegalityWitness> is_legal(const Multiset& c, const DigitSystem& d, int max_level) {
    // anchor of the candidate cluster
    int anchor_label = -1;
    Vec anchor;
    for (std::size_t i = 0; i < c.size() && anchor_label < 0; ++i)
        if (!c[i].empty()) {
            anchor_label = static_cast<int>(i);
            anchor = c[i][0];
            for (const Vec& v : c[i])
                if (lex_less(v, anchor)) anchor = v;
        }
    if (anchor_label < 0) return std::nullopt;

    double tol = 1e-6;
    for (int level = 0; level <= max_level; ++level) {
        for (int j = 0; j < d.m; ++j) {
            Multiset target(static_cast<std::size_t>(d.m));
            target[static_cast<std::size_t>(j)].push_back(Vec::zero(d.phi.dim));
            for (int l = 0; l < level; ++l) target = apply_multiset_map(d, target).sets;
            const std::vector<Vec>& cands = target[static_cast<std::size_t>(anchor_label)];
            for (const Vec& cand : cands) {
                Vec offset = cand - anchor;
                bool all = true;
                for (std::size_t i = 0; i < c.size() && all; ++i)
                    for (const Vec& v : c[i]) {
                        Vec want = v + offset;
                        bool found = false;
                        for (const Vec& w : target[i])
                            if (approx_eq(w, want, tol)) {
                                found = true;
                                break;
                            }
                        if (!found) {
                            all = false;
                            break;
                        }
                    }
                if (all) {
                    LegalityWitness wit;
                    wit.j = j;
                    wit.level = level;
                    wit.offset = offset;
                    return wit;
                }
            }
        }
    }
    return std::nullopt;
}

VerificationReport verify_fixed_point(const DigitSystem& d, const TilingWindow& win) {
    VerificationReport rep;
    rep.stage = "fixed-point";
    rep.anchor = "check:fixed-point";
    rep.config["k"] = d.k;

    Mat eff = d.effective();
    double dM = win.max_tile_diameter();
    double lam = d.lambda_k();
    double margin = dM / lam + dM + 2 * win.h;
    double Wc = win.radius - margin;
    if (Wc <= 0) {
        rep.status = VerificationReport::Status::Inconclusive;
        rep.metrics["checked_points"] = 0;
        return rep;
    }
    double maxd = 0;
    for (auto& row : d.D)
        for (auto& set : row)
            for (const Vec& v : set) maxd = std::max(maxd, norm(v));

    // hit[i] counts how many (j, q, digit) productions land on each point
    std::vector<std::unordered_map<CellKey, int, CellKeyHash>> hit(
        static_cast<std::size_t>(win.prototiles.size()));
    Multiset lambda(static_cast<std::size_t>(win.prototiles.size()));
    for (const PlacedTile& t : win.patch.tiles) lambda[static_cast<std::size_t>(t.label)].push_back(t.pos);

    Mat inv = inverse(eff);
    // a missing production is conclusive only when every candidate producer
    // position E^{-1}(p - d) is certifiably inside the window (off-center
    // windows lose edge producers otherwise)
    auto producers_visible = [&](const Vec& p, int i) {
        for (int j = 0; j < d.m; ++j)
            for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                Vec q = apply(inv, p - dig);
                if (dist(q, win.center) > win.radius - dM - 4 * win.h) return false;
            }
        return true;
    };

    int violations = 0, checked = 0;
    for (int j = 0; j < d.m; ++j)
        for (const Vec& q : lambda[static_cast<std::size_t>(j)]) {
            Vec base = apply(eff, q);
            if (dist(base, win.center) > Wc + maxd + dM) continue;
            for (int i = 0; i < d.m; ++i)
                for (const Vec& dig : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
                    Vec p = base + dig;
                    if (dist(p, win.center) > Wc) continue;
                    ++hit[static_cast<std::size_t>(i)][quantize(p, win.h)];
                }
        }
    for (int i = 0; i < d.m; ++i)
        for (const Vec& p : lambda[static_cast<std::size_t>(i)]) {
            if (dist(p, win.center) > Wc) continue;
            auto it = hit[static_cast<std::size_t>(i)].find(quantize(p, win.h));
            int n = (it == hit[static_cast<std::size_t>(i)].end()) ? 0 : it->second;
            bool conclusive = n > 0 || producers_visible(p, i);
            if (conclusive) {
                ++checked;
                if (n != 1) {
                    ++violations;
                    if (rep.witnesses.size() < 16) {
                        nlohmann::json w;
                        w["label"] = i;
                        w["point"] = std::vector<double>(p.c, p.c + win.dim);
                        w["productions"] = n;
                        w["kind"] = n == 0 ? "coverage" : "disjointness";
                        rep.fail_with(w);
                    }
                }
            }
            if (it != hit[static_cast<std::size_t>(i)].end()) it->second = -1000000;  // consumed
        }
    // productions that did not consume a Lambda point are spurious
    for (int i = 0; i < d.m; ++i)
        for (auto& kv : hit[static_cast<std::size_t>(i)])
            if (kv.second > 0) {
                ++violations;
                if (rep.witnesses.size() < 16) {
                    nlohmann::json w;
                    w["label"] = i;
                    w["cell"] = std::vector<std::int64_t>(kv.first.k, kv.first.k + win.dim);
                    w["kind"] = "spurious-production";
                    rep.fail_with(w);
                }
            }
    rep.metrics["checked_points"] = checked;
    rep.metrics["violations"] = violations;
    rep.metrics["checked_radius"] = Wc;
    if (violations > 0) rep.status = VerificationReport::Status::Fail;
    if (checked == 0) rep.status = VerificationReport::Status::Inconclusive;
    return rep;
}

void write_digit_system(std::ostream& os, const DigitSystem& d) {
    os.precision(17);
    os << "digit-system v1\n";
    os << "dim " << d.phi.dim << "\n";
    os << "labels " << d.m << "\n";
    os << "k " << d.k << "\n";
    os << "ell " << d.phi.ell << "\n";
    os << "matrix";
    for (int i = 0; i < d.phi.dim * d.phi.dim; ++i) os << " " << d.phi.matrix.a[i];
    os << "\n";
    for (int i = 0; i < d.m; ++i)
        for (int j = 0; j < d.m; ++j) {
            os << "digits " << i << " " << j << " :";
            for (const Vec& v : d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
                for (int a = 0; a < d.phi.dim; ++a) os << " " << v[a];
            os << "\n";
        }
    os << "end\n";
}

DigitSystem read_digit_system(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("digit-system", 0) != 0)
        throw std::runtime_error("digit-system: bad header");
    DigitSystem d;
    int dim = 1;
    while (std::getline(is, line)) {
        if (line == "end") break;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "dim") {
            ss >> dim;
            d.phi.dim = dim;
            d.phi.matrix = Mat(dim);
        } else if (tok == "labels") {
            ss >> d.m;
            d.D.assign(static_cast<std::size_t>(d.m),
                       std::vector<std::vector<Vec>>(static_cast<std::size_t>(d.m)));
        } else if (tok == "k") {
            ss >> d.k;
        } else if (tok == "ell") {
            ss >> d.phi.ell;
        } else if (tok == "matrix") {
            for (int i = 0; i < dim * dim; ++i) ss >> d.phi.matrix.a[i];
            d.phi.lambda = sigma_min(d.phi.powered());
        } else if (tok == "digits") {
            int i, j;
            std::string colon;
            ss >> i >> j >> colon;
            std::vector<double> vals;
            double x;
            while (ss >> x) vals.push_back(x);
            for (std::size_t t = 0; t + dim <= vals.size(); t += dim) {
                Vec v(dim);
                for (int a = 0; a < dim; ++a) v.c[a] = vals[t + a];
                d.D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].push_back(v);
            }
        }
    }
    return d;
}

}  // namespace tilekit
