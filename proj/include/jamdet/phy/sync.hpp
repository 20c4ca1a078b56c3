#pragma once

#include "jamdet/phy/ofdm.hpp"

#include <cstddef>
#include <vector>

namespace jamdet::phy {

struct SyncResult {
    std::size_t t_off = 0;
    // First sample of the OFDM frame. Equals t_off unless a locator maps the
    // timing peak to a frame boundary.
    std::size_t frame_start = 0;
    double cfo_hz = 0.0;
    std::vector<double> metric_curve;
    std::vector<double> cfo_grid;
};

// Symmetric grid -span..+span in steps of `step` (span a multiple of step).
std::vector<double> cfo_grid(double span_hz = 3000.0, double step_hz = 100.0);

// Grid frequency f maximizing max_tau |sum_n y(tau+n) exp(-j*2*pi*f*(tau+n)/fs) conj(x(n))|,
// x the time-domain PSS replica. Ties go to the smallest |f|, then to the
// negative candidate.
double estimate_cfo(const IQBuffer& buf, const std::vector<cplx>& replica, const std::vector<double>& grid);
double estimate_cfo(const IQBuffer& buf, const OfdmParams& params, const PssSequence& pss,
                    const std::vector<double>& grid);

// M(t) = |P(t)|^2 / R(t)^2 with
//   P(t) = sum_{n<L} conj(y(t+n)) y(t+n+L),  R(t) = sum_{n<L} |y(t+n+L)|^2,
// for t = 0 .. size-2L; M(t) = 0 where R(t) = 0. |P|^2 <= R1*R2 (the first
// half energy times R), so M <= 1 whenever the first half carries no more
// energy than the second.
SyncResult schmidl_cox(const IQBuffer& buf, std::size_t half_len);

// Burst receiver for synth_burst layouts: CFO by PSS search, timing by
// Schmidl-Cox with L = fft_size/2, frame start three half-symbols after the
// timing peak.
SyncResult locate_frame(const IQBuffer& buf, const OfdmParams& params, const PssSequence& pss,
                        const std::vector<double>& grid);

// Drops each SSB symbol's cyclic prefix, takes its FFT and gathers the SSB
// subcarriers, symbol-major, starting from sync.frame_start.
std::vector<cplx> extract_ssb(const IQBuffer& buf, const SyncResult& sync, const OfdmParams& params);

}  // namespace jamdet::phy
