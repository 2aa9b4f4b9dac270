#include "core/volume.hpp"

#include <cmath>
#include <sstream>

namespace foldgate {

std::string describe_geometry(const VolumeGeometry& g) {
    std::ostringstream os;
    os << g.dims[0] << "x" << g.dims[1] << "x" << g.dims[2]
       << " @ (" << g.spacing[0] << ", " << g.spacing[1] << ", " << g.spacing[2] << ") mm";
    return os.str();
}

void require_same_geometry(const VolumeGeometry& a, const VolumeGeometry& b,
                           const std::string& context) {
    if (!same_dims(a, b))
        throw ValidationError(context + ": dimension mismatch: " + describe_geometry(a) +
                              " vs " + describe_geometry(b));
    if (!spacing_close(a, b))
        throw ValidationError(context + ": spacing mismatch: " + describe_geometry(a) +
                              " vs " + describe_geometry(b));
}

void validate_label_volume(const LabelVolume& v, const std::string& context) {
    if (!v.geometry.valid())
        throw ValidationError(context + ": invalid geometry: " + describe_geometry(v.geometry));
    if (std::ssize(v.voxels) != v.geometry.voxel_count())
        throw ValidationError(context + ": voxel count " + std::to_string(v.voxels.size()) +
                              " does not match geometry " + describe_geometry(v.geometry));
    for (std::int32_t id : v.voxels)
        if (id < 0)
            throw ValidationError(context + ": negative label id " + std::to_string(id));
}

void validate_probability_volume(const ProbabilityVolume& v, const std::string& context) {
    if (!v.geometry.valid())
        throw ValidationError(context + ": invalid geometry: " + describe_geometry(v.geometry));
    if (v.num_classes < 2)
        throw ValidationError(context + ": probability volume needs at least 2 classes, got " +
                              std::to_string(v.num_classes));
    if (std::ssize(v.channels) != v.num_classes)
        throw ValidationError(context + ": expected " + std::to_string(v.num_classes) +
                              " channels, got " + std::to_string(v.channels.size()));
    const std::int64_t n = v.geometry.voxel_count();
    for (std::int32_t c = 0; c < v.num_classes; ++c) {
        const auto& ch = v.channels[static_cast<std::size_t>(c)];
        if (std::ssize(ch) != n)
            throw ValidationError(context + ": channel " + std::to_string(c) +
                                  " has " + std::to_string(ch.size()) + " values, expected " +
                                  std::to_string(n));
        for (float p : ch)
            if (!(p >= 0.0f && p <= 1.0f))
                throw ValidationError(context + ": channel " + std::to_string(c) +
                                      " value " + std::to_string(p) + " outside [0,1]");
    }
    for (std::int64_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::int32_t c = 0; c < v.num_classes; ++c)
            sum += v.channels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
        if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
            throw ValidationError(context + ": class probabilities at voxel " +
                                  std::to_string(i) + " sum to " + std::to_string(sum));
    }
}

} // namespace foldgate
