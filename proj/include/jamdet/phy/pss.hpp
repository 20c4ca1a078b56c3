#pragma once

#include <array>

namespace jamdet::phy {

inline constexpr int kPssLength = 127;

// Length-127 BPSK m-sequence, x^7 + x^4 + 1 from state 1110110, cyclically
// shifted by 43 * nid2.
struct PssSequence {
    int nid2 = 0;
    std::array<double, kPssLength> chips{};
};

PssSequence gen_pss(int nid2);

}  // namespace jamdet::phy
