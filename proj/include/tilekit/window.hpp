#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tilekit/region.hpp"

namespace tilekit {

// A tile placement against a prototile table: support = prototile + pos.
struct PlacedTile {
    int label = 0;
    Vec pos;
};

struct Patch {
    std::vector<PlacedTile> tiles;
    int marked = -1;  // index into tiles, or -1

    bool empty() const { return tiles.empty(); }
    std::size_t size() const { return tiles.size(); }
};

struct Prototile {
    std::string name;
    Region shape;      // anchored at its bounding-box min corner
    int base = -1;     // pre-recode label this one refines, -1 = itself
    std::string key;   // canonical content key (stable across windows)
};

// A tile with its own concrete support, before decomposition.
struct RawTile {
    Region support;
    int label = 0;
};

struct DeloneMultiset {
    std::vector<std::vector<Vec>> points;  // per label
    double r_pack = 0;                     // half the min gap within a colour class
    double r_cov = 0;                      // window-relative covering estimate
};

// A finite patch of a tiling, exact inside the stated ball: the patch holds
// every tile whose support meets N_radius(center).
struct TilingWindow {
    int dim = 1;
    double h = 1e-3;
    std::vector<Prototile> prototiles;
    Patch patch;
    Vec center;
    double radius = 0;

    int label_count() const { return static_cast<int>(prototiles.size()); }
    const PlacedTile& tile(int i) const { return patch.tiles[i]; }
    int tile_count() const { return static_cast<int>(patch.tiles.size()); }
    Box tile_bbox(int i) const;
    Region tile_support(int i) const;

    // Prototile metric cache (max diameter / min inradius over labels).
    double max_tile_diameter() const;
    double min_tile_inradius() const;

    void finalize();  // build spatial + identity indices; call after edits

    // All tiles whose support meets the closed ball / the point x.
    std::vector<int> tiles_meeting_ball(const Vec& c, double R) const;
    std::vector<int> tiles_at_point(const Vec& x) const;
    // Exact-identity lookup of a tile by (label, position), at tolerance h/2.
    std::optional<int> find_tile(int label, const Vec& pos) const;

    bool ball_inside_valid(const Vec& c, double R) const {
        return dist(c, center) + R <= radius + 1e-12;
    }

  private:
    mutable std::unordered_map<CellKey, std::vector<int>, CellKeyHash> grid_;
    mutable std::unordered_map<CellKey, std::vector<int>, CellKeyHash> ident_;
    mutable std::vector<Box> bboxes_;
    mutable double grid_pitch_ = 0;
    mutable double dM_ = -1, eta_ = -1;
    void need_index() const;
    friend struct WindowAccess;
};

struct OutOfWindowError : std::runtime_error {
    explicit OutOfWindowError(const std::string& w) : std::runtime_error(w) {}
};
struct LabelGeometryMismatchError : std::runtime_error {
    explicit LabelGeometryMismatchError(const std::string& w) : std::runtime_error(w) {}
};
struct PatchNotFoundError : std::runtime_error {
    explicit PatchNotFoundError(const std::string& w) : std::runtime_error(w) {}
};
struct WindowTooSmallError : std::runtime_error {
    explicit WindowTooSmallError(const std::string& w) : std::runtime_error(w) {}
};

// [F]^T: tiles whose support meets F. Requires N_{d_M}(F) inside the valid
// ball so the answer is complete; near-tangencies within one raster cell are
// reported through `tolerance_band` when given.
Patch patch_of(const TilingWindow& win, const Region& f, std::vector<int>* tolerance_band = nullptr);

// Decompose raw tiles into canonical prototiles (anchored at bbox min
// corners) and per-label translation sets. Verifies the same-label =>
// translate assumption.
struct Decomposition {
    std::vector<Prototile> prototiles;
    Patch placements;
    DeloneMultiset multiset;
};
Decomposition prototile_decomposition(const std::vector<RawTile>& tiles, double h);

// d_M and eta of the window's prototile set.
struct TileMetrics {
    double d_M = 0;
    double eta = 0;
};
TileMetrics tile_metrics(const TilingWindow& win);

DeloneMultiset delone_multiset(const TilingWindow& win);

// If P2 = P1 + g (labels, supports, markers), returns g; otherwise nullopt.
std::optional<Vec> patch_equivalent(const TilingWindow& win, const Patch& p1, const Patch& p2);

// All g with P + g contained in the window's tile set.
std::vector<Vec> find_occurrences(const TilingWindow& win, const Patch& p);

// Window-relative repetitivity estimates for P. `degenerate` flags the
// whole-window case where no second occurrence can be seen.
struct RepetitivityEstimate {
    double lower = 0;
    double upper = 0;
    bool degenerate = false;
    Vec witness;  // sample center realising `lower`
};
RepetitivityEstimate repetitivity_radius(const TilingWindow& win, const Patch& p,
                                         double sample_spacing = 0);

TilingWindow transform_window(const Mat& map, const TilingWindow& win);

// Canonical anchored form of a patch: the anchor is the lexicographically
// least position among tiles of the least label; the key lists
// (label, quantized(pos - anchor)) sorted. Offsets quantized at resolution q.
struct AnchoredPatch {
    Vec anchor;
    std::string key;
};
AnchoredPatch anchored_patch_key(const Patch& p, double q, const std::vector<std::string>* label_keys = nullptr);

void write_window(std::ostream& os, const TilingWindow& win);
TilingWindow read_window(std::istream& is);

}  // namespace tilekit
