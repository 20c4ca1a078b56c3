#include "jamdet/phy/ofdm.hpp"

#include "fft.hpp"
#include "jamdet/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace jamdet::phy {

void IQBuffer::validate() const {
    if (samples.empty()) throw DomainError("IQ buffer is empty");
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
        throw DomainError("sample rate must be positive, got " + std::to_string(sample_rate_hz));
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag()))
            throw DomainError("non-finite IQ sample at index " + std::to_string(i));
}

void OfdmParams::validate() const {
    if (fft_size == 0 || cp_len == 0 || num_symbols == 0) throw DomainError("OFDM sizes must be positive");
    if (cp_len >= fft_size) throw DomainError("cp_len must be smaller than fft_size");
    if (ssb_num_symbols == 0 || ssb_symbol_index + ssb_num_symbols > num_symbols)
        throw DomainError("SSB symbols " + std::to_string(ssb_symbol_index) + "+" + std::to_string(ssb_num_symbols) +
                          " exceed a frame of " + std::to_string(num_symbols));
    if (ssb_num_subcarriers < static_cast<std::size_t>(kPssLength) || ssb_num_subcarriers > fft_size)
        throw DomainError("ssb_num_subcarriers must lie in [127, fft_size]");
    if (!(sample_rate_hz > 0.0)) throw DomainError("sample rate must be positive");
}

std::size_t subcarrier_bin(std::size_t j, std::size_t width, std::size_t fft_size) {
    const long offset = static_cast<long>(j) - static_cast<long>(width / 2);
    const long n = static_cast<long>(fft_size);
    return static_cast<std::size_t>(((offset % n) + n) % n);
}

std::size_t pss_first_subcarrier(const OfdmParams& params) {
    return (params.ssb_num_subcarriers - kPssLength) / 2;
}

namespace {

cplx qpsk(std::mt19937_64& rng) {
    const auto bits = rng();
    constexpr double a = std::numbers::sqrt2 / 2.0;
    return {(bits & 1) ? -a : a, (bits & 2) ? -a : a};
}

}  // namespace

SynthesizedFrame synthesize(const OfdmParams& params, const PssSequence& pss, std::uint64_t payload_seed) {
    params.validate();
    const std::size_t n = params.fft_size;
    const std::size_t width = params.ssb_num_subcarriers;
    const std::size_t pss_first = pss_first_subcarrier(params);
    std::mt19937_64 rng(payload_seed);
    detail::UnitaryFft ifft(n, detail::UnitaryFft::Direction::Inverse);

    SynthesizedFrame out;
    out.buffer.sample_rate_hz = params.sample_rate_hz;
    out.buffer.samples.reserve(params.frame_length());
    out.ssb.reserve(params.ssb_size());

    std::vector<cplx> grid(n), symbol(n);
    for (std::size_t s = 0; s < params.num_symbols; ++s) {
        std::fill(grid.begin(), grid.end(), cplx{});
        const bool in_ssb = s >= params.ssb_symbol_index && s < params.ssb_symbol_index + params.ssb_num_symbols;
        const bool pss_symbol = s == params.ssb_symbol_index;
        for (std::size_t j = 0; j < width; ++j) {
            cplx v = qpsk(rng);
            if (pss_symbol && j >= pss_first && j < pss_first + kPssLength) v = pss.chips[j - pss_first];
            grid[subcarrier_bin(j, width, n)] = v;
            if (in_ssb) out.ssb.push_back(v);
        }
        ifft.run(grid.data(), symbol.data());
        out.buffer.samples.insert(out.buffer.samples.end(), symbol.end() - params.cp_len, symbol.end());
        out.buffer.samples.insert(out.buffer.samples.end(), symbol.begin(), symbol.end());
    }

    double power = 0.0;
    for (const auto& x : out.buffer.samples) power += std::norm(x);
    power /= static_cast<double>(out.buffer.samples.size());
    const double g = 1.0 / std::sqrt(power);
    for (auto& x : out.buffer.samples) x *= g;
    for (auto& x : out.ssb) x *= g;
    return out;
}

IQBuffer synth_frame(const OfdmParams& params, const PssSequence& pss, std::uint64_t payload_seed) {
    return synthesize(params, pss, payload_seed).buffer;
}

std::vector<cplx> pss_replica(const OfdmParams& params, const PssSequence& pss) {
    params.validate();
    const std::size_t n = params.fft_size;
    const std::size_t first = pss_first_subcarrier(params);
    std::vector<cplx> grid(n);
    for (int i = 0; i < kPssLength; ++i)
        grid[subcarrier_bin(first + i, params.ssb_num_subcarriers, n)] = pss.chips[i];
    detail::UnitaryFft ifft(n, detail::UnitaryFft::Direction::Inverse);
    auto out = ifft.run(grid);
    // Nominal unit-power frame scale: each occupied bin carries unit energy.
    const double g = std::sqrt(static_cast<double>(n) / static_cast<double>(params.ssb_num_subcarriers));
    for (auto& x : out) x *= g;
    return out;
}

std::vector<cplx> timing_preamble(std::size_t half_len) {
    if (half_len == 0) throw DomainError("preamble half length must be positive");
    const double l = static_cast<double>(half_len);
    std::vector<cplx> a(half_len), b(half_len);
    for (std::size_t i = 0; i < half_len; ++i) {
        const double n = static_cast<double>(i);
        a[i] = std::polar(1.0, std::numbers::pi * n * n / l);
        const bool outer = 4 * i < half_len || 4 * i >= 3 * half_len;
        b[i] = outer ? -a[i] : a[i];
    }
    std::vector<cplx> out;
    out.reserve(4 * half_len);
    out.insert(out.end(), b.begin(), b.end());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Burst synth_burst(const OfdmParams& params, const PssSequence& pss, std::uint64_t payload_seed, std::size_t lead_in) {
    const std::size_t half = params.fft_size / 2;
    auto frame = synthesize(params, pss, payload_seed);
    const auto preamble = timing_preamble(half);

    Burst burst;
    burst.buffer.sample_rate_hz = params.sample_rate_hz;
    burst.buffer.samples.assign(lead_in, cplx{});
    burst.buffer.samples.insert(burst.buffer.samples.end(), preamble.begin(), preamble.end());
    burst.buffer.samples.insert(burst.buffer.samples.end(), frame.buffer.samples.begin(), frame.buffer.samples.end());
    burst.ssb = std::move(frame.ssb);
    burst.preamble_start = lead_in;
    burst.timing_peak = lead_in + half;
    burst.frame_start = lead_in + preamble.size();
    return burst;
}

IQBuffer apply_cfo(const IQBuffer& buf, double cfo_hz) {
    if (!std::isfinite(cfo_hz)) throw DomainError("CFO must be finite");
    IQBuffer out = buf;
    const double w = 2.0 * std::numbers::pi * cfo_hz / buf.sample_rate_hz;
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] *= std::polar(1.0, w * static_cast<double>(i));
    return out;
}

IQBuffer add_noise(const IQBuffer& buf, double noise_power, std::uint64_t seed) {
    if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) throw DomainError("noise power must be finite and >= 0");
    IQBuffer out = buf;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(noise_power / 2.0));
    for (auto& x : out.samples) {
        const double re = normal(rng);
        const double im = normal(rng);
        x += cplx(re, im);
    }
    return out;
}

}  // namespace jamdet::phy
