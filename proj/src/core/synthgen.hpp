#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "core/volume.hpp"

namespace foldgate {

// splitmix64. Keyed draws: at(seed, n) is the n-th value of the stream, so
// any (case, fold, voxel) coordinate maps to one platform-independent draw.
namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t n) {
    return mix(seed + (n + 1) * kGolden);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace rng

struct SynthConfig {
    std::int64_t n_cases = 20;
    std::int32_t k_folds = 5;
    std::array<std::int64_t, 3> dims{32, 32, 20};
    std::array<double, 3> spacing{1.0, 1.0, 3.0};
    double radii_min = 3.0;
    double radii_max = 7.0;
    double disagreement = 0.8;    // per-case maximum d, ramped linearly across cases
    double reference_noise = 0.05;
    std::uint64_t seed = 0;
    std::string case_prefix = "case";
};

void validate_config(const SynthConfig& cfg);

/// Labels every voxel v with sum(((v_i - center_i) / radii_i)^2) <= 1.
/// An ellipsoid entirely outside the grid yields an empty volume (warned).
LabelVolume make_ellipsoid(const VolumeGeometry& geometry, const std::array<double, 3>& center,
                           const std::array<double, 3>& radii, std::int32_t label);

/// Flips each boundary voxel (6-connectivity, in-grid neighbors only)
/// independently with probability d. The boundary set is taken from the
/// input, so flips never cascade. d=0 is the identity.
LabelVolume perturb(const LabelVolume& v, std::int32_t label, double d, std::uint64_t seed);

/// Writes n_cases synthetic cases under out_dir: per case a directory of
/// k fold masks plus a reference mask, and a <case_id>.manifest.json next
/// to it. Case i uses disagreement d_i ramped linearly from 0 to cfg.d.
void generate_cohort(const SynthConfig& cfg, const std::filesystem::path& out_dir);

/// Independent Dice oracle: explicit triple loop, own index arithmetic.
/// Shares nothing with metrics::dice beyond the LabelVolume type.
double brute_dice(const LabelVolume& a, const LabelVolume& b, std::int32_t label);

} // namespace foldgate
