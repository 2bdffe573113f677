#pragma once

#include <sstream>
#include <string_view>

#include "lingphy/dataio.hpp"
#include "lingphy/newick.hpp"
#include "lingphy/tree.hpp"

namespace lingphy {

// Shared cognates-with-change between six South-Central Dravidian languages.
// Identical to the shipped data/scd.sim file.
inline constexpr std::string_view kScdSimilarityText =
    "# Shared cognates-with-change, South-Central Dravidian\n"
    "6\n"
    "Gondi\n"
    "Konda 16\n"
    "Kui 18 18\n"
    "Kuvi 22 20 88\n"
    "Pengo 11 19 48 49\n"
    "Manda 10 9 40 42 57\n";

// Reference topology from the comparative method, rooted at Gondi.
inline constexpr std::string_view kReferenceTreeNewick =
    "(Gondi,(Konda,((Kui,Kuvi),(Manda,Pengo))));";

inline SimilarityMatrix builtin_scd() {
    std::istringstream in{std::string(kScdSimilarityText)};
    return load_similarity(in);
}

inline PhyloTree builtin_reference_tree() {
    return parse_newick(kReferenceTreeNewick);
}

} // namespace lingphy
