#pragma once

#include <array>
#include <string>

#include "nldt/common.hpp"

namespace nldt {

// Card-domain layout shared by the dataset generator and the test pools:
// glyphs are 8x8 grayscale; suit features carry one extra color channel.
inline constexpr int glyph_pixel_count = 64;
inline constexpr int suit_feature_size = glyph_pixel_count + 1;
inline constexpr int num_suits = 4;

// Closed set of Eleusis hidden concepts over two-card windows.
enum class ConceptId {
    hidden_order_simple,
    hidden_modulo_simple,
    color_parity,
    alternating_faces,
    alternating_parity,
    increase_suits,
    suit_order,
    rank_order,
};

inline constexpr std::array<ConceptId, 8> all_concepts = {
    ConceptId::hidden_order_simple, ConceptId::hidden_modulo_simple,
    ConceptId::color_parity,        ConceptId::alternating_faces,
    ConceptId::alternating_parity,  ConceptId::increase_suits,
    ConceptId::suit_order,          ConceptId::rank_order,
};

inline const char* concept_name(ConceptId c) {
    switch (c) {
        case ConceptId::hidden_order_simple: return "hidden_order_simple";
        case ConceptId::hidden_modulo_simple: return "hidden_modulo_simple";
        case ConceptId::color_parity: return "color_parity";
        case ConceptId::alternating_faces: return "alternating_faces";
        case ConceptId::alternating_parity: return "alternating_parity";
        case ConceptId::increase_suits: return "increase_suits";
        case ConceptId::suit_order: return "suit_order";
        case ConceptId::rank_order: return "rank_order";
    }
    return "?";
}

inline ConceptId parse_concept(const std::string& name) {
    for (ConceptId c : all_concepts) {
        if (name == concept_name(c)) return c;
    }
    fail("unknown-concept", "no concept named '" + name + "'");
}

}  // namespace nldt
