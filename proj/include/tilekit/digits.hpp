#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tilekit/expansion.hpp"
#include "tilekit/report.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

// Digit system: the expansion phi^k together with the finite translation
// sets D[i][j] placing type-i tiles inside the inflated type-j tile.
struct DigitSystem {
    ExpansionMap phi;  // the tiling's expansion (phi.powered() is one step)
    int k = 1;         // the system's power: effective map is phi.powered()^k
    int m = 1;
    std::vector<std::vector<std::vector<Vec>>> D;  // D[i][j]

    Mat effective() const { return mat_pow(phi.powered(), k); }
    double lambda_k() const;  // certified sigma_min of the effective map
    std::string canonical_text() const;
    std::uint64_t content_hash() const;
};

using SubstitutionMatrix = std::vector<std::vector<std::int64_t>>;

using Multiset = std::vector<std::vector<Vec>>;  // one point set per label

struct UnknownLabelError : std::runtime_error {
    explicit UnknownLabelError(const std::string& w) : std::runtime_error(w) {}
};

SubstitutionMatrix substitution_matrix(const DigitSystem& d);

// Least power ell <= max_power with S^ell entrywise positive.
std::optional<int> is_primitive(const SubstitutionMatrix& s, int max_power);

SubstitutionMatrix matrix_power(const SubstitutionMatrix& s, int p);

// Phi on multisets. Collisions (duplicate image points) are merged and
// counted; disjointness is a property of the true fixed point, not an input
// requirement.
struct MultisetImage {
    Multiset sets;
    int collisions = 0;
};
MultisetImage apply_multiset_map(const DigitSystem& d, const Multiset& x);

// n-fold inflation of a patch through the digit sets.
Patch expand_patch(const DigitSystem& d, const Patch& p, int n);

// Patch -> cluster (per-label translation sets).
Multiset cluster_of_patch(int m, const Patch& p);
Patch patch_of_cluster(const Multiset& c);

// Composition: digits of the system with power k1+k2.
DigitSystem digit_power(const DigitSystem& d, int times);

struct LegalityWitness {
    int j = 0;
    int level = 0;
    Vec offset;
};
// Search for (j, ell <= max_level, offset) with c + offset inside
// Phi^ell(e^(j)). Absence of a witness is inconclusive, not a disproof.
std::optional<LegalityWitness> is_legal(const Multiset& c, const DigitSystem& d, int max_level);

// Eq-(10)-style check on the window: within the eroded valid ball, the sets
// phi^k Lambda_j + D_ij must cover Lambda_i exactly once.
VerificationReport verify_fixed_point(const DigitSystem& d, const TilingWindow& win);

void write_digit_system(std::ostream& os, const DigitSystem& d);
DigitSystem read_digit_system(std::istream& is);

// Multiset equality at tolerance (sorted matching per label).
bool multiset_equal(const Multiset& a, const Multiset& b, double tol);

}  // namespace tilekit
