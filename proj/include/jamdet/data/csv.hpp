#pragma once

#include "jamdet/data/dataset.hpp"
#include "jamdet/kv.hpp"

#include <string>

namespace jamdet::data {

// `path` gets header f0..f{Q-1},label and one row per observation with
// 17-significant-digit values. `path + ".manifest"` records the profile,
// seed, SNR range, Q, normalization state and stats, processing order, and
// real_rows: synthetic rows must form a suffix.
void save_csv(const Dataset& ds, const std::string& path);
// Reads the manifest when present; otherwise an ad-hoc unnormalized dataset.
Dataset load_csv(const std::string& path);

std::string manifest_path(const std::string& csv_path);
KeyValueFile make_manifest(const Dataset& ds);

std::string to_csv(const Dataset& ds);
Dataset parse_csv(const std::string& text, const std::string& source);

}  // namespace jamdet::data
