#include "fft.hpp"

#include "jamdet/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace jamdet::phy::detail {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

UnitaryFft::UnitaryFft(std::size_t n, Direction dir) : n_(n) {
    if (n == 0) throw DomainError("FFT size must be positive");
    std::lock_guard lock(planner_mutex());
    in_ = fftw_malloc(sizeof(fftw_complex) * n);
    out_ = fftw_malloc(sizeof(fftw_complex) * n);
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), static_cast<fftw_complex*>(in_), static_cast<fftw_complex*>(out_),
                             dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
}

UnitaryFft::~UnitaryFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    fftw_free(in_);
    fftw_free(out_);
}

void UnitaryFft::run(const std::complex<double>* in, std::complex<double>* out) {
    std::memcpy(in_, in, sizeof(fftw_complex) * n_);
    fftw_execute(static_cast<fftw_plan>(plan_));
    const double s = 1.0 / std::sqrt(static_cast<double>(n_));
    const auto* o = reinterpret_cast<const std::complex<double>*>(out_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = o[i] * s;
}

std::vector<std::complex<double>> UnitaryFft::run(const std::vector<std::complex<double>>& in) {
    if (in.size() != n_) throw ShapeError("FFT input of length " + std::to_string(in.size()) + ", plan size " +
                                          std::to_string(n_));
    std::vector<std::complex<double>> out(n_);
    run(in.data(), out.data());
    return out;
}

}  // namespace jamdet::phy::detail
