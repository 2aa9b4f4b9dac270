#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "core/volume.hpp"

namespace foldgate::test {

/// Unique directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("foldgate_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline LabelVolume make_label(std::int64_t nx, std::int64_t ny, std::int64_t nz,
                              double sx = 1.0, double sy = 1.0, double sz = 1.0) {
    LabelVolume v;
    v.geometry.dims = {nx, ny, nz};
    v.geometry.spacing = {sx, sy, sz};
    v.voxels.assign(static_cast<std::size_t>(nx * ny * nz), 0);
    return v;
}

inline LabelVolume random_label(std::mt19937_64& rng, std::int64_t n, std::int32_t max_label = 1) {
    LabelVolume v = make_label(n, n, n);
    std::uniform_int_distribution<std::int32_t> dist(0, max_label);
    for (auto& voxel : v.voxels)
        voxel = dist(rng);
    return v;
}

} // namespace foldgate::test
