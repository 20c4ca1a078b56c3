#pragma once

#include "jamdet/phy/ofdm.hpp"

#include <optional>
#include <string>

namespace jamdet::phy {

// `path` holds "i,q" rows; `path + ".meta"` holds sample_rate_hz and,
// when known, fft_size and cp_len.
struct IqFile {
    IQBuffer buffer;
    std::optional<std::size_t> fft_size;
    std::optional<std::size_t> cp_len;
};

std::string iq_meta_path(const std::string& path);

void write_iq(const std::string& path, const IQBuffer& buf, const OfdmParams* params = nullptr);
IqFile read_iq(const std::string& path);

}  // namespace jamdet::phy
