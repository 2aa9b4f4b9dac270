#include "core/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

#include "core/atomic_io.hpp"
#include "core/errors.hpp"
#include "core/log.hpp"

namespace foldgate {

namespace fs = std::filesystem;

void validate_config(const SynthConfig& cfg) {
    if (cfg.n_cases < 1)
        throw ValidationError("synth: n_cases must be >= 1, got " + std::to_string(cfg.n_cases));
    if (cfg.k_folds < 2)
        throw ValidationError("synth: k_folds must be >= 2, got " + std::to_string(cfg.k_folds));
    for (int i = 0; i < 3; ++i) {
        if (cfg.dims[i] < 1)
            throw ValidationError("synth: dims must be >= 1, got " + std::to_string(cfg.dims[i]));
        if (!(cfg.spacing[i] > 0.0) || !std::isfinite(cfg.spacing[i]))
            throw ValidationError("synth: spacing must be positive, got " +
                                  std::to_string(cfg.spacing[i]));
    }
    if (!(cfg.radii_min > 0.0) || !(cfg.radii_max >= cfg.radii_min))
        throw ValidationError("synth: need 0 < radii_min <= radii_max, got [" +
                              std::to_string(cfg.radii_min) + ", " +
                              std::to_string(cfg.radii_max) + "]");
    if (cfg.disagreement < 0.0 || cfg.disagreement > 1.0)
        throw ValidationError("synth: disagreement must be in [0,1], got " +
                              std::to_string(cfg.disagreement));
    if (cfg.reference_noise < 0.0 || cfg.reference_noise > 1.0)
        throw ValidationError("synth: reference_noise must be in [0,1], got " +
                              std::to_string(cfg.reference_noise));
    if (cfg.case_prefix.empty() || cfg.case_prefix.find('/') != std::string::npos ||
        cfg.case_prefix.find('\\') != std::string::npos)
        throw ValidationError("synth: case_prefix '" + cfg.case_prefix +
                              "' is not usable as a file name");
}

LabelVolume make_ellipsoid(const VolumeGeometry& geometry, const std::array<double, 3>& center,
                           const std::array<double, 3>& radii, std::int32_t label) {
    if (!geometry.valid())
        throw ValidationError("make_ellipsoid: invalid geometry: " + describe_geometry(geometry));
    for (int i = 0; i < 3; ++i)
        if (!(radii[i] > 0.0))
            throw ValidationError("make_ellipsoid: radii must be positive, got " +
                                  std::to_string(radii[i]));
    if (label <= 0)
        throw ValidationError("make_ellipsoid: label must be positive, got " +
                              std::to_string(label));

    LabelVolume vol;
    vol.geometry = geometry;
    vol.voxels.assign(static_cast<std::size_t>(geometry.voxel_count()), 0);

    std::array<std::int64_t, 3> lo{}, hi{};
    for (int i = 0; i < 3; ++i) {
        lo[i] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(center[i] - radii[i])));
        hi[i] = std::min<std::int64_t>(geometry.dims[i] - 1,
                                       static_cast<std::int64_t>(std::floor(center[i] + radii[i])));
    }

    std::int64_t labeled = 0;
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
        for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
            for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
                const double dx = (static_cast<double>(x) - center[0]) / radii[0];
                const double dy = (static_cast<double>(y) - center[1]) / radii[1];
                const double dz = (static_cast<double>(z) - center[2]) / radii[2];
                if (dx * dx + dy * dy + dz * dz <= 1.0) {
                    vol.voxels[static_cast<std::size_t>(vol.index(x, y, z))] = label;
                    ++labeled;
                }
            }
        }
    }
    if (labeled == 0)
        log::warn("make_ellipsoid: ellipsoid at (" + std::to_string(center[0]) + ", " +
                  std::to_string(center[1]) + ", " + std::to_string(center[2]) +
                  ") labels no voxel of the grid");
    return vol;
}

LabelVolume perturb(const LabelVolume& v, std::int32_t label, double d, std::uint64_t seed) {
    if (d < 0.0 || d > 1.0)
        throw ValidationError("perturb: magnitude must be in [0,1], got " + std::to_string(d));

    const auto& dims = v.geometry.dims;
    const std::int64_t nx = dims[0], ny = dims[1], nz = dims[2];
    LabelVolume out = v;
    if (d == 0.0)
        return out;

    constexpr std::array<std::array<std::int64_t, 3>, 6> kNeighbors{{
        {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1},
    }};

    for (std::int64_t z = 0; z < nz; ++z) {
        for (std::int64_t y = 0; y < ny; ++y) {
            for (std::int64_t x = 0; x < nx; ++x) {
                const std::int64_t idx = v.index(x, y, z);
                const bool member = v.voxels[static_cast<std::size_t>(idx)] == label;
                bool boundary = false;
                for (const auto& n : kNeighbors) {
                    const std::int64_t px = x + n[0], py = y + n[1], pz = z + n[2];
                    if (px < 0 || px >= nx || py < 0 || py >= ny || pz < 0 || pz >= nz)
                        continue;
                    const bool neighbor_member =
                        v.voxels[static_cast<std::size_t>(v.index(px, py, pz))] == label;
                    if (neighbor_member != member) {
                        boundary = true;
                        break;
                    }
                }
                if (!boundary)
                    continue;
                if (rng::unit(rng::at(seed, static_cast<std::uint64_t>(idx))) < d)
                    out.voxels[static_cast<std::size_t>(idx)] = member ? 0 : label;
            }
        }
    }
    return out;
}

namespace {

std::string case_name(const std::string& prefix, std::int64_t index, std::int64_t n_cases) {
    std::string digits = std::to_string(n_cases - 1);
    const std::size_t width = std::max<std::size_t>(4, digits.size());
    std::string num = std::to_string(index);
    return prefix + "_" + std::string(width - std::min(width, num.size()), '0') + num;
}

} // namespace

void generate_cohort(const SynthConfig& cfg, const fs::path& out_dir) {
    validate_config(cfg);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("synth: cannot create " + out_dir.string() + ": " + ec.message());

    VolumeGeometry geometry;
    geometry.dims = cfg.dims;
    geometry.spacing = cfg.spacing;

    constexpr std::int32_t kLabel = 1;
    const std::int32_t k = cfg.k_folds;

    for (std::int64_t i = 0; i < cfg.n_cases; ++i) {
        const std::string case_id = case_name(cfg.case_prefix, i, cfg.n_cases);
        const double d = cfg.n_cases == 1
                             ? 0.0
                             : cfg.disagreement * static_cast<double>(i) /
                                   static_cast<double>(cfg.n_cases - 1);
        const std::uint64_t case_seed = rng::at(cfg.seed, static_cast<std::uint64_t>(i));

        // Draws 0..5 pick the shape; folds use 6..6+k-1, the reference 6+k.
        std::array<double, 3> center{}, radii{};
        for (int axis = 0; axis < 3; ++axis) {
            const double extent = static_cast<double>(cfg.dims[axis] - 1);
            const double margin = std::min(cfg.radii_max, extent / 2.0);
            const double lo = margin;
            const double hi = std::max(lo, extent - margin);
            center[axis] =
                lo + (hi - lo) * rng::unit(rng::at(case_seed, static_cast<std::uint64_t>(axis)));
            radii[axis] = cfg.radii_min +
                          (cfg.radii_max - cfg.radii_min) *
                              rng::unit(rng::at(case_seed, static_cast<std::uint64_t>(3 + axis)));
        }
        const LabelVolume base = make_ellipsoid(geometry, center, radii, kLabel);

        const fs::path case_dir = out_dir / case_id;
        fs::create_directories(case_dir, ec);
        if (ec)
            throw IoError("synth: cannot create " + case_dir.string() + ": " + ec.message());

        nlohmann::ordered_json folds = nlohmann::ordered_json::array();
        for (std::int32_t f = 0; f < k; ++f) {
            const LabelVolume fold =
                perturb(base, kLabel, d, rng::at(case_seed, 6 + static_cast<std::uint64_t>(f)));
            const std::string rel = case_id + "/fold_" + std::to_string(f) + ".nii";
            write_label_volume_atomic(fold, out_dir / case_id / ("fold_" + std::to_string(f) + ".nii"));
            folds.push_back({{"fold_index", f}, {"label_path", rel}});
        }

        const LabelVolume reference = perturb(base, kLabel, cfg.reference_noise,
                                              rng::at(case_seed, 6 + static_cast<std::uint64_t>(k)));
        write_label_volume_atomic(reference, case_dir / "reference.nii");

        nlohmann::ordered_json manifest;
        manifest["case_id"] = case_id;
        manifest["folds"] = std::move(folds);
        manifest["reference_path"] = case_id + "/reference.nii";
        manifest["label_map"] = {{"1", "tumor"}};
        write_text_atomic(out_dir / (case_id + ".manifest.json"), manifest.dump(2) + "\n");
    }
    log::info("synth: wrote " + std::to_string(cfg.n_cases) + " case(s) to " + out_dir.string());
}

double brute_dice(const LabelVolume& a, const LabelVolume& b, std::int32_t label) {
    for (int i = 0; i < 3; ++i) {
        if (a.geometry.dims[i] != b.geometry.dims[i])
            throw ValidationError("brute_dice: dims differ on axis " + std::to_string(i));
        if (std::abs(a.geometry.spacing[i] - b.geometry.spacing[i]) > kSpacingToleranceMm)
            throw ValidationError("brute_dice: spacing differs on axis " + std::to_string(i));
    }
    const std::int64_t nx = a.geometry.dims[0];
    const std::int64_t ny = a.geometry.dims[1];
    const std::int64_t nz = a.geometry.dims[2];

    std::int64_t count_a = 0, count_b = 0, count_both = 0;
    for (std::int64_t z = 0; z < nz; ++z) {
        for (std::int64_t y = 0; y < ny; ++y) {
            for (std::int64_t x = 0; x < nx; ++x) {
                const std::size_t idx = static_cast<std::size_t>((z * ny + y) * nx + x);
                const bool in_a = a.voxels[idx] == label;
                const bool in_b = b.voxels[idx] == label;
                if (in_a)
                    ++count_a;
                if (in_b)
                    ++count_b;
                if (in_a && in_b)
                    ++count_both;
            }
        }
    }
    if (count_a == 0 && count_b == 0)
        return 1.0;
    if (count_a == 0 || count_b == 0)
        return 0.0;
    return 2.0 * static_cast<double>(count_both) / static_cast<double>(count_a + count_b);
}

} // namespace foldgate
