#pragma once

#include <cstdint>

namespace jamdet {

// Derives independent per-stage seeds from one run seed.
//
//   derive_seed(run_seed, stage, index) = splitmix64(splitmix64(run_seed ^ stage_tag) + index)
//
// `stage` is one of the Stage tags below; `index` distinguishes repeated uses
// inside a stage (profile id, observation number, variant...). Stages can be
// rerun in isolation by recomputing their seed with the same triple.
enum class Stage : std::uint64_t {
    Build = 0x1001,
    Jam = 0x1002,
    Split = 0x1003,
    Gan = 0x2001,
    Augment = 0x2002,
    Autoencoder = 0x3001,
    Classifier = 0x3002,
    Synth = 0x4001,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t run_seed, Stage stage, std::uint64_t index = 0) noexcept {
    return splitmix64(splitmix64(run_seed ^ static_cast<std::uint64_t>(stage)) + index);
}

}  // namespace jamdet
