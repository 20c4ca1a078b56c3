#pragma once

#include "jamdet/phy/sync.hpp"
#include "jamdet/seed.hpp"

#include <cmath>
#include <cstdlib>
#include <random>

namespace trials {

struct SyncOutcome {
    bool timing_ok = false;
    bool cfo_ok = false;
    long timing_error = 0;
    double cfo_error_hz = 0.0;
};

// One seeded burst at unit signal power: lead-in, preamble, frame, a CFO
// impairment, then AWGN at snr_db.
inline SyncOutcome run_sync_trial(std::uint64_t seed, double snr_db, double cfo_hz, double grid_step_hz,
                                  const jamdet::phy::OfdmParams& params = {}) {
    using namespace jamdet::phy;
    std::mt19937_64 rng(jamdet::derive_seed(seed, jamdet::Stage::Synth, 1));
    const std::size_t lead_in = 256 + rng() % 1024;
    const auto pss = gen_pss(static_cast<int>(seed % 3));
    auto burst = synth_burst(params, pss, jamdet::derive_seed(seed, jamdet::Stage::Synth, 2), lead_in);
    IQBuffer rx = apply_cfo(burst.buffer, cfo_hz);
    rx = add_noise(rx, std::pow(10.0, -snr_db / 10.0), jamdet::derive_seed(seed, jamdet::Stage::Synth, 3));

    const auto sync = locate_frame(rx, params, pss, cfo_grid(3000.0, grid_step_hz));
    SyncOutcome out;
    out.timing_error = static_cast<long>(sync.t_off) - static_cast<long>(burst.timing_peak);
    out.cfo_error_hz = sync.cfo_hz - cfo_hz;
    out.timing_ok = std::labs(out.timing_error) <= 1;
    out.cfo_ok = std::abs(out.cfo_error_hz) <= grid_step_hz / 2.0;
    return out;
}

}  // namespace trials
