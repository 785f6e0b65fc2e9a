#pragma once

#include "tilekit/digits.hpp"
#include "tilekit/window.hpp"

namespace tilekit {

// 1-D symbolic substitution system: letter i has interval prototile
// [0, lengths[i]] and rewrites to the word rules[i].
struct WordSystem {
    std::vector<std::string> names;
    std::vector<double> lengths;
    std::vector<std::vector<int>> rules;
};

// Lay out `left` ending at 0 and `right` starting at 0 after `iterations`
// rewrites of both sides. Two-sided seeds only give coordinate-stable windows
// when the seed is fixed under the iterated rule (e.g. even counts for the
// golden-mean rule); right-only seeds (empty left) are stable whenever the
// rule fixes the first letter.
TilingWindow word_window(const WordSystem& ws, const std::vector<int>& left,
                         const std::vector<int>& right, int iterations, double h,
                         double margin = 1.0);

// Same, but picks the smallest iteration count (a multiple of `step`) whose
// window radius reaches min_radius.
TilingWindow word_window_radius(const WordSystem& ws, const std::vector<int>& left,
                                const std::vector<int>& right, double min_radius, int step,
                                double h, double margin = 1.0);

// Grow a window of the digit system's fixed tiling from a seed cluster with
// Phi(seed) containing seed and 0 interior to its support. The patch keeps
// every tile within clip radius; the valid ball is certified by sampling.
TilingWindow window_from_digits(const DigitSystem& d, const std::vector<Prototile>& prototiles,
                                const Multiset& seed, double radius, double h);

// Search for a self-reproducing seed cluster (candidates are recentred
// clusters of Phi^level(e^(j)) filtered to a small ball). Returns the first
// hit in deterministic order.
std::optional<Multiset> find_self_seed(const DigitSystem& d,
                                       const std::vector<Prototile>& prototiles, int max_level);

}  // namespace tilekit
