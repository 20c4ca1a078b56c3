#pragma once

#include "jamdet/phy/pss.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace jamdet::phy {

using cplx = std::complex<double>;

struct IQBuffer {
    std::vector<cplx> samples;
    double sample_rate_hz = 15.36e6;

    // Throws DomainError unless non-empty, finite and sample_rate_hz > 0.
    void validate() const;
    std::size_t size() const { return samples.size(); }
};

// Numerology defaults: 15 kHz subcarrier spacing at 15.36 MHz, i.e. a
// 1024-point FFT, with the SSB occupying symbols 2..5 of an 8-symbol frame.
struct OfdmParams {
    std::size_t fft_size = 1024;
    std::size_t cp_len = 72;
    std::size_t num_symbols = 8;
    std::size_t ssb_symbol_index = 2;
    std::size_t ssb_num_symbols = 4;
    std::size_t ssb_num_subcarriers = 240;
    double sample_rate_hz = 15.36e6;

    void validate() const;
    std::size_t symbol_length() const { return fft_size + cp_len; }
    std::size_t frame_length() const { return num_symbols * symbol_length(); }
    std::size_t ssb_size() const { return ssb_num_symbols * ssb_num_subcarriers; }
    // Samples from frame start to the end of the last SSB symbol.
    std::size_t ssb_span() const { return (ssb_symbol_index + ssb_num_symbols) * symbol_length(); }
};

// Occupied subcarrier j of a block of `width` maps to signed offset
// j - width/2 from DC and FFT bin (j - width/2) mod fft_size.
std::size_t subcarrier_bin(std::size_t j, std::size_t width, std::size_t fft_size);

// First SSB subcarrier carrying a PSS chip (the PSS is centred in the SSB).
std::size_t pss_first_subcarrier(const OfdmParams& params);

struct SynthesizedFrame {
    IQBuffer buffer;
    // SSB resource grid, symbol-major, at the scale present in `buffer`.
    std::vector<cplx> ssb;
};

// CP-OFDM frame: every symbol carries seeded QPSK on the central
// ssb_num_subcarriers bins; the first SSB symbol carries the PSS on its
// central 127 subcarriers. Mean power is normalized to 1.
SynthesizedFrame synthesize(const OfdmParams& params, const PssSequence& pss, std::uint64_t payload_seed);
IQBuffer synth_frame(const OfdmParams& params, const PssSequence& pss, std::uint64_t payload_seed);

// Time-domain PSS symbol (no cyclic prefix), fft_size samples, at the scale
// of a unit-power frame built from `params`.
std::vector<cplx> pss_replica(const OfdmParams& params, const PssSequence& pss);

// Timing preamble of four half-symbols [B, A, A, B], L = fft_size / 2:
// A(n) = exp(j*pi*n^2/L), B(n) = -A(n) on the outer quarters n < L/4 and
// n >= 3L/4, +A(n) on the middle half. The repeated A pair gives a unit
// Schmidl-Cox peak. sum conj(A)B = 0, so guard/A windows score 0, and the
// sign-inverted guard edges make |P| fall by 2 per sample of misalignment.
std::vector<cplx> timing_preamble(std::size_t half_len);

struct Burst {
    IQBuffer buffer;
    std::vector<cplx> ssb;
    std::size_t preamble_start = 0;
    std::size_t frame_start = 0;
    // Start of the repeated half pair, the ideal Schmidl-Cox argmax.
    std::size_t timing_peak = 0;
};

// lead_in zero samples, the timing preamble, then a synthesized frame.
Burst synth_burst(const OfdmParams& params, const PssSequence& pss, std::uint64_t payload_seed, std::size_t lead_in);

// Sample n multiplied by exp(j*2*pi*cfo_hz*n/fs).
IQBuffer apply_cfo(const IQBuffer& buf, double cfo_hz);

// Adds circular complex Gaussian noise of total variance noise_power.
IQBuffer add_noise(const IQBuffer& buf, double noise_power, std::uint64_t seed);

}  // namespace jamdet::phy
