#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace foldgate {

/// Voxel grid shape plus physical spacing in millimeters per voxel.
/// Orientation is deliberately not modeled: volumes are compared grid
/// to grid, which is valid because all fold predictions of one case
/// share the input grid.
struct VolumeGeometry {
    std::array<std::int64_t, 3> dims{0, 0, 0};   // nx, ny, nz
    std::array<double, 3> spacing{1.0, 1.0, 1.0}; // mm

    [[nodiscard]] std::int64_t voxel_count() const {
        return dims[0] * dims[1] * dims[2];
    }
    [[nodiscard]] double voxel_volume_mm3() const {
        return spacing[0] * spacing[1] * spacing[2];
    }
    [[nodiscard]] bool valid() const {
        return dims[0] >= 1 && dims[1] >= 1 && dims[2] >= 1 &&
               spacing[0] > 0.0 && spacing[1] > 0.0 && spacing[2] > 0.0;
    }
};

constexpr double kSpacingToleranceMm = 1e-4;

[[nodiscard]] inline bool same_dims(const VolumeGeometry& a, const VolumeGeometry& b) {
    return a.dims == b.dims;
}

[[nodiscard]] inline bool spacing_close(const VolumeGeometry& a, const VolumeGeometry& b,
                                        double tol = kSpacingToleranceMm) {
    for (int i = 0; i < 3; ++i) {
        double d = a.spacing[i] - b.spacing[i];
        if (d < -tol || d > tol) return false;
    }
    return true;
}

std::string describe_geometry(const VolumeGeometry& g);

/// Throws ValidationError naming `context` when dims differ or spacing
/// differs by more than the tolerance on any axis.
void require_same_geometry(const VolumeGeometry& a, const VolumeGeometry& b,
                           const std::string& context);

/// Integer label ids over a voxel grid, x-fastest flat order (matches the
/// NIfTI on-disk layout). 0 is background.
struct LabelVolume {
    VolumeGeometry geometry;
    std::vector<std::int32_t> voxels;

    [[nodiscard]] std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return static_cast<std::size_t>(x + geometry.dims[0] * (y + geometry.dims[1] * z));
    }
    [[nodiscard]] std::int32_t at(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return voxels[index(x, y, z)];
    }
    std::int32_t& at(std::int64_t x, std::int64_t y, std::int64_t z) {
        return voxels[index(x, y, z)];
    }
};

/// Per-class softmax probabilities over a voxel grid. Channel c holds the
/// probabilities of label id c; channels are stored in label-id order
/// starting at 0 (background).
struct ProbabilityVolume {
    VolumeGeometry geometry;
    std::int32_t num_classes = 0;
    std::vector<std::vector<float>> channels; // num_classes entries, each voxel_count long
};

constexpr double kProbabilitySumTolerance = 1e-3;

/// Checks the LabelVolume invariants (voxel count, non-negative ids).
void validate_label_volume(const LabelVolume& v, const std::string& context);

/// Checks the ProbabilityVolume invariants: C >= 2, channel lengths, every
/// value in [0,1], per-voxel class sums within 1e-3 of 1.
void validate_probability_volume(const ProbabilityVolume& v, const std::string& context);

} // namespace foldgate
