#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace jamdet::phy::detail {

// Unitary DFT of one fixed size. Each instance owns its FFTW plan and
// buffers, so instances may be used from different threads; only plan
// creation and destruction are serialized.
class UnitaryFft {
public:
    enum class Direction { Forward, Inverse };

    UnitaryFft(std::size_t n, Direction dir);
    ~UnitaryFft();
    UnitaryFft(const UnitaryFft&) = delete;
    UnitaryFft& operator=(const UnitaryFft&) = delete;

    std::size_t size() const { return n_; }
    // in and out may alias. Both hold size() values.
    void run(const std::complex<double>* in, std::complex<double>* out);
    std::vector<std::complex<double>> run(const std::vector<std::complex<double>>& in);

private:
    std::size_t n_;
    void* in_;
    void* out_;
    void* plan_;
};

}  // namespace jamdet::phy::detail
