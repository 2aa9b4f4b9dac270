#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "core/volume.hpp"

namespace foldgate {

/// Supported subset of NIfTI-1 datatype codes.
enum class NiftiDataType : std::int16_t {
    u8 = 2,
    i16 = 4,
    i32 = 8,
    f32 = 16,
    f64 = 64,
};

[[nodiscard]] constexpr std::size_t element_size(NiftiDataType dt) {
    switch (dt) {
        case NiftiDataType::u8: return 1;
        case NiftiDataType::i16: return 2;
        case NiftiDataType::i32: return 4;
        case NiftiDataType::f32: return 4;
        case NiftiDataType::f64: return 8;
    }
    return 0;
}

/// A decoded single-file uncompressed NIfTI-1 volume: geometry, raw voxel
/// payload in its on-disk element type, and the stored scaling fields.
/// Scaling is not applied here; see to_label_volume / to_channel.
struct NiftiVolume {
    VolumeGeometry geometry;
    NiftiDataType dtype = NiftiDataType::u8;
    float scl_slope = 1.0f;
    float scl_inter = 0.0f;
    bool byte_swapped = false; // source file used the opposite byte order

    std::variant<std::vector<std::uint8_t>,
                 std::vector<std::int16_t>,
                 std::vector<std::int32_t>,
                 std::vector<float>,
                 std::vector<double>>
        data;

    [[nodiscard]] std::int64_t element_count() const;
};

/// Reads a single-file .nii volume. Byte order is auto-detected: when dim[0]
/// is not in 1..7 under the native order, the header and payload are
/// interpreted byte-swapped. Throws FormatError on bad magic, unsupported
/// datatype, truncated payload, or dim[0] invalid under both orders.
NiftiVolume read_nifti(const std::filesystem::path& path);

/// Writes a single-file uncompressed NIfTI-1 volume in native byte order:
/// 348-byte header, 4 zero extension bytes, payload at offset 352.
void write_nifti(const NiftiVolume& volume, const std::filesystem::path& path);

/// Writes a label volume as uint8 when the maximum id fits, otherwise int16.
/// Throws ValidationError when an id exceeds the int16 range.
void write_nifti(const LabelVolume& volume, const std::filesystem::path& path);

/// Writes one probability channel as float32.
void write_nifti_channel(const VolumeGeometry& geometry, std::span<const float> channel,
                         const std::filesystem::path& path);

/// Converts raw voxel data to integer labels. scl_slope/scl_inter are applied
/// when slope is neither 0 nor 1 or inter is nonzero; values must then land
/// within 1e-6 of a non-negative integer.
LabelVolume to_label_volume(const NiftiVolume& volume);

/// Converts raw voxel data to one float channel with scaling applied.
std::vector<float> to_channel(const NiftiVolume& volume);

} // namespace foldgate
