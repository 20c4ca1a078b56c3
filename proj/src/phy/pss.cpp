#include "jamdet/phy/pss.hpp"

#include "jamdet/error.hpp"

#include <string>

namespace jamdet::phy {

PssSequence gen_pss(int nid2) {
    if (nid2 < 0 || nid2 > 2) throw DomainError("nid2 must be 0, 1 or 2, got " + std::to_string(nid2));

    std::array<int, kPssLength> x{};
    const int init[7] = {0, 1, 1, 0, 1, 1, 1};  // x(0)..x(6)
    for (int i = 0; i < 7; ++i) x[i] = init[i];
    for (int i = 0; i + 7 < kPssLength; ++i) x[i + 7] = (x[i + 4] + x[i]) % 2;

    PssSequence pss;
    pss.nid2 = nid2;
    for (int n = 0; n < kPssLength; ++n) pss.chips[n] = 1.0 - 2.0 * x[(n + 43 * nid2) % kPssLength];
    return pss;
}

}  // namespace jamdet::phy
