#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "plainlang/text/analysis.hpp"

namespace plainlang::metrics::detail {

// N-grams as fixed-width id tuples (unused slots zero) so set and multiset
// operations run on sorted flat vectors instead of string maps.
using Gram = std::array<std::uint32_t, 4>;

class Vocabulary {
public:
    std::vector<std::uint32_t> encode(const text::TokenSequence& seq) {
        std::vector<std::uint32_t> ids;
        ids.reserve(seq.tokens.size());
        for (const auto& t : seq.tokens) {
            auto [it, inserted] = ids_.try_emplace(t, static_cast<std::uint32_t>(ids_.size() + 1));
            ids.push_back(it->second);
        }
        return ids;
    }

private:
    std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Sorted n-grams of order n, duplicates kept.
inline std::vector<Gram> sorted_grams(const std::vector<std::uint32_t>& ids, std::size_t n) {
    std::vector<Gram> grams;
    if (ids.size() < n) return grams;
    grams.reserve(ids.size() - n + 1);
    for (std::size_t i = 0; i + n <= ids.size(); ++i) {
        Gram g{};
        for (std::size_t k = 0; k < n; ++k) g[k] = ids[i + k];
        grams.push_back(g);
    }
    std::sort(grams.begin(), grams.end());
    return grams;
}

inline std::vector<Gram> unique_grams(const std::vector<std::uint32_t>& ids, std::size_t n) {
    auto grams = sorted_grams(ids, n);
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    return grams;
}

inline std::vector<Gram> set_minus(const std::vector<Gram>& a, const std::vector<Gram>& b) {
    std::vector<Gram> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::vector<Gram> set_and(const std::vector<Gram>& a, const std::vector<Gram>& b) {
    std::vector<Gram> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Sum over distinct grams of min(count in a, count in b); inputs sorted.
inline std::size_t clipped_matches(const std::vector<Gram>& a, const std::vector<Gram>& b) {
    std::size_t matches = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            const Gram g = *ia;
            std::size_t ca = 0;
            std::size_t cb = 0;
            while (ia != a.end() && *ia == g) ++ca, ++ia;
            while (ib != b.end() && *ib == g) ++cb, ++ib;
            matches += std::min(ca, cb);
        }
    }
    return matches;
}

}  // namespace plainlang::metrics::detail
