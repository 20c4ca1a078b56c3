#include "jamdet/phy/sync.hpp"

#include "fft.hpp"
#include "jamdet/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace jamdet::phy {

std::vector<double> cfo_grid(double span_hz, double step_hz) {
    if (!(step_hz > 0.0) || !(span_hz >= 0.0)) throw DomainError("CFO grid needs step > 0 and span >= 0");
    const long k = std::lround(span_hz / step_hz);
    std::vector<double> grid;
    for (long i = -k; i <= k; ++i) grid.push_back(static_cast<double>(i) * step_hz);
    return grid;
}

double estimate_cfo(const IQBuffer& buf, const std::vector<cplx>& replica, const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("CFO grid is empty");
    if (replica.empty() || buf.size() <= replica.size())
        throw DomainError("buffer of " + std::to_string(buf.size()) + " samples is not longer than the PSS replica (" +
                          std::to_string(replica.size()) + ")");

    std::size_t m = 1;
    while (m < buf.size() + replica.size()) m <<= 1;
    detail::UnitaryFft fwd(m, detail::UnitaryFft::Direction::Forward);
    detail::UnitaryFft inv(m, detail::UnitaryFft::Direction::Inverse);

    std::vector<cplx> ref(m);
    std::copy(replica.begin(), replica.end(), ref.begin());
    fwd.run(ref.data(), ref.data());
    for (auto& v : ref) v = std::conj(v);

    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double fa = std::abs(grid[a]), fb = std::abs(grid[b]);
        return fa != fb ? fa < fb : grid[a] < grid[b];
    });

    // Circular correlation of a zero-padded buffer: lags 0..size-1 are the
    // linear ones, the rest wrap into padding and are skipped.
    const std::size_t valid = buf.size() - replica.size() + 1;
    std::vector<cplx> work(m);
    double best_value = -1.0;
    double best_f = grid[order.front()];
    for (std::size_t idx : order) {
        const double f = grid[idx];
        if (!std::isfinite(f)) throw DomainError("non-finite CFO grid value");
        const double w = -2.0 * std::numbers::pi * f / buf.sample_rate_hz;
        std::fill(work.begin(), work.end(), cplx{});
        for (std::size_t n = 0; n < buf.size(); ++n) work[n] = buf.samples[n] * std::polar(1.0, w * static_cast<double>(n));
        fwd.run(work.data(), work.data());
        for (std::size_t k = 0; k < m; ++k) work[k] *= ref[k];
        inv.run(work.data(), work.data());
        double peak = 0.0;
        for (std::size_t t = 0; t < valid; ++t) peak = std::max(peak, std::norm(work[t]));
        if (peak > best_value) {
            best_value = peak;
            best_f = f;
        }
    }
    return best_f;
}

double estimate_cfo(const IQBuffer& buf, const OfdmParams& params, const PssSequence& pss,
                    const std::vector<double>& grid) {
    return estimate_cfo(buf, pss_replica(params, pss), grid);
}

SyncResult schmidl_cox(const IQBuffer& buf, std::size_t half_len) {
    if (half_len == 0) throw DomainError("half_len must be at least 1");
    if (buf.size() < 2 * half_len + 1)
        throw DomainError("buffer of " + std::to_string(buf.size()) + " samples is shorter than 2*half_len+1 = " +
                          std::to_string(2 * half_len + 1));
    const auto& y = buf.samples;
    const std::size_t count = y.size() - 2 * half_len + 1;

    // Running sums drift; re-anchor with an exact sum periodically and
    // whenever R has cancelled down to rounding residue.
    auto exact = [&](std::size_t t, cplx& p, double& r) {
        p = {};
        r = 0.0;
        for (std::size_t n = 0; n < half_len; ++n) {
            p += std::conj(y[t + n]) * y[t + n + half_len];
            r += std::norm(y[t + n + half_len]);
        }
    };
    constexpr std::size_t kReanchor = 4096;

    SyncResult result;
    result.metric_curve.resize(count);
    cplx p;
    double r = 0.0;
    double best = -1.0;
    double r_max = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
        if (t % kReanchor == 0) {
            exact(t, p, r);
        } else {
            const std::size_t out = t - 1, in = t - 1 + half_len;
            p += std::conj(y[in]) * y[in + half_len] - std::conj(y[out]) * y[out + half_len];
            r += std::norm(y[in + half_len]) - std::norm(y[out + half_len]);
            if (r <= 1e-10 * r_max) exact(t, p, r);
        }
        r_max = std::max(r_max, r);
        double m = 0.0;
        if (r > 0.0) m = std::norm(p) / (r * r);
        if (!std::isfinite(m) || m < 0.0) m = 0.0;
        result.metric_curve[t] = m;
        if (m > best) {
            best = m;
            result.t_off = t;
        }
    }
    result.frame_start = result.t_off;
    return result;
}

SyncResult locate_frame(const IQBuffer& buf, const OfdmParams& params, const PssSequence& pss,
                        const std::vector<double>& grid) {
    const std::size_t half = params.fft_size / 2;
    const double cfo = estimate_cfo(buf, params, pss, grid);
    SyncResult result = schmidl_cox(buf, half);
    result.cfo_hz = cfo;
    result.cfo_grid = grid;
    result.frame_start = result.t_off + 3 * half;
    return result;
}

std::vector<cplx> extract_ssb(const IQBuffer& buf, const SyncResult& sync, const OfdmParams& params) {
    params.validate();
    if (sync.frame_start >= buf.size() || buf.size() - sync.frame_start < params.ssb_span())
        throw DomainError("frame from sample " + std::to_string(sync.frame_start) + " is shorter than the SSB span of " +
                          std::to_string(params.ssb_span()) + " samples");
    detail::UnitaryFft fft(params.fft_size, detail::UnitaryFft::Direction::Forward);
    std::vector<cplx> out;
    out.reserve(params.ssb_size());
    std::vector<cplx> freq(params.fft_size);
    for (std::size_t s = 0; s < params.ssb_num_symbols; ++s) {
        const std::size_t start =
            sync.frame_start + (params.ssb_symbol_index + s) * params.symbol_length() + params.cp_len;
        fft.run(buf.samples.data() + start, freq.data());
        for (std::size_t j = 0; j < params.ssb_num_subcarriers; ++j)
            out.push_back(freq[subcarrier_bin(j, params.ssb_num_subcarriers, params.fft_size)]);
    }
    return out;
}

}  // namespace jamdet::phy
