#include "core/nifti.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace foldgate {

namespace {

// On-disk NIfTI-1 header. Field offsets are fixed by the format; the
// static_asserts below pin the ones this reader depends on.
struct Nifti1Header {
    std::int32_t sizeof_hdr;    /*   0 */
    char data_type[10];         /*   4 */
    char db_name[18];           /*  14 */
    std::int32_t extents;       /*  32 */
    std::int16_t session_error; /*  36 */
    char regular;               /*  38 */
    char dim_info;              /*  39 */
    std::int16_t dim[8];        /*  40 */
    float intent_p1;            /*  56 */
    float intent_p2;            /*  60 */
    float intent_p3;            /*  64 */
    std::int16_t intent_code;   /*  68 */
    std::int16_t datatype;      /*  70 */
    std::int16_t bitpix;        /*  72 */
    std::int16_t slice_start;   /*  74 */
    float pixdim[8];            /*  76 */
    float vox_offset;           /* 108 */
    float scl_slope;            /* 112 */
    float scl_inter;            /* 116 */
    std::int16_t slice_end;     /* 120 */
    char slice_code;            /* 122 */
    char xyzt_units;            /* 123 */
    float cal_max;              /* 124 */
    float cal_min;              /* 128 */
    float slice_duration;       /* 132 */
    float toffset;              /* 136 */
    std::int32_t glmax;         /* 140 */
    std::int32_t glmin;         /* 144 */
    char descrip[80];           /* 148 */
    char aux_file[24];          /* 228 */
    std::int16_t qform_code;    /* 252 */
    std::int16_t sform_code;    /* 254 */
    float quatern_b;            /* 256 */
    float quatern_c;            /* 260 */
    float quatern_d;            /* 264 */
    float qoffset_x;            /* 268 */
    float qoffset_y;            /* 272 */
    float qoffset_z;            /* 276 */
    float srow_x[4];            /* 280 */
    float srow_y[4];            /* 296 */
    float srow_z[4];            /* 312 */
    char intent_name[16];       /* 328 */
    char magic[4];              /* 344 */
};

static_assert(sizeof(Nifti1Header) == 348);
static_assert(offsetof(Nifti1Header, dim) == 40);
static_assert(offsetof(Nifti1Header, datatype) == 70);
static_assert(offsetof(Nifti1Header, bitpix) == 72);
static_assert(offsetof(Nifti1Header, pixdim) == 76);
static_assert(offsetof(Nifti1Header, vox_offset) == 108);
static_assert(offsetof(Nifti1Header, scl_slope) == 112);
static_assert(offsetof(Nifti1Header, scl_inter) == 116);
static_assert(offsetof(Nifti1Header, magic) == 344);

constexpr std::size_t kHeaderSize = 348;
constexpr std::int64_t kVoxOffset = 352;
constexpr std::int16_t kMaxDimSize = 32767;

void swap_bytes(std::int16_t& v) {
    auto u = std::bit_cast<std::uint16_t>(v);
    v = std::bit_cast<std::int16_t>(static_cast<std::uint16_t>((u >> 8) | (u << 8)));
}

void swap_bytes(std::int32_t& v) {
    auto u = std::bit_cast<std::uint32_t>(v);
    u = ((u >> 24) & 0x000000FFu) | ((u >> 8) & 0x0000FF00u) |
        ((u << 8) & 0x00FF0000u) | ((u << 24) & 0xFF000000u);
    v = std::bit_cast<std::int32_t>(u);
}

void swap_bytes(float& v) {
    auto u = std::bit_cast<std::uint32_t>(v);
    u = ((u >> 24) & 0x000000FFu) | ((u >> 8) & 0x0000FF00u) |
        ((u << 8) & 0x00FF0000u) | ((u << 24) & 0xFF000000u);
    v = std::bit_cast<float>(u);
}

void swap_bytes(double& v) {
    auto u = std::bit_cast<std::uint64_t>(v);
    u = ((u >> 56) & 0x00000000000000FFull) | ((u >> 40) & 0x000000000000FF00ull) |
        ((u >> 24) & 0x0000000000FF0000ull) | ((u >> 8) & 0x00000000FF000000ull) |
        ((u << 8) & 0x000000FF00000000ull) | ((u << 24) & 0x0000FF0000000000ull) |
        ((u << 40) & 0x00FF000000000000ull) | ((u << 56) & 0xFF00000000000000ull);
    v = std::bit_cast<double>(u);
}

void swap_header(Nifti1Header& h) {
    swap_bytes(h.sizeof_hdr);
    swap_bytes(h.extents);
    swap_bytes(h.session_error);
    for (auto& d : h.dim) swap_bytes(d);
    swap_bytes(h.intent_p1);
    swap_bytes(h.intent_p2);
    swap_bytes(h.intent_p3);
    swap_bytes(h.intent_code);
    swap_bytes(h.datatype);
    swap_bytes(h.bitpix);
    swap_bytes(h.slice_start);
    for (auto& p : h.pixdim) swap_bytes(p);
    swap_bytes(h.vox_offset);
    swap_bytes(h.scl_slope);
    swap_bytes(h.scl_inter);
    swap_bytes(h.slice_end);
    swap_bytes(h.cal_max);
    swap_bytes(h.cal_min);
    swap_bytes(h.slice_duration);
    swap_bytes(h.toffset);
    swap_bytes(h.glmax);
    swap_bytes(h.glmin);
    swap_bytes(h.qform_code);
    swap_bytes(h.sform_code);
    swap_bytes(h.quatern_b);
    swap_bytes(h.quatern_c);
    swap_bytes(h.quatern_d);
    swap_bytes(h.qoffset_x);
    swap_bytes(h.qoffset_y);
    swap_bytes(h.qoffset_z);
    for (auto& v : h.srow_x) swap_bytes(v);
    for (auto& v : h.srow_y) swap_bytes(v);
    for (auto& v : h.srow_z) swap_bytes(v);
}

bool dim0_valid(std::int16_t d) { return d >= 1 && d <= 7; }

template <typename T>
std::vector<T> read_payload(std::ifstream& f, std::int64_t count, bool swapped,
                            const std::string& path) {
    std::vector<T> out(static_cast<std::size_t>(count));
    f.read(reinterpret_cast<char*>(out.data()),
           static_cast<std::streamsize>(count * sizeof(T)));
    if (!f)
        throw IoError("nifti: short read of voxel data: " + path);
    if constexpr (sizeof(T) > 1) {
        if (swapped)
            for (auto& v : out) swap_bytes(v);
    }
    return out;
}

template <typename T>
void write_all(std::ofstream& f, const std::vector<T>& v) {
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

bool scaling_active(float slope, float inter) {
    return (slope != 0.0f && slope != 1.0f) || inter != 0.0f;
}

} // namespace

std::int64_t NiftiVolume::element_count() const {
    return std::visit([](const auto& v) { return static_cast<std::int64_t>(v.size()); }, data);
}

NiftiVolume read_nifti(const std::filesystem::path& path) {
    std::error_code ec;
    const auto file_size = std::filesystem::file_size(path, ec);
    if (ec)
        throw ValidationError("nifti: cannot stat file: " + path.string() + ": " + ec.message());

    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("nifti: cannot open: " + path.string());

    Nifti1Header h{};
    f.read(reinterpret_cast<char*>(&h), kHeaderSize);
    if (!f)
        throw FormatError("nifti: file shorter than the 348-byte header: " + path.string());

    if (!(h.magic[0] == 'n' && h.magic[1] == '+' && h.magic[2] == '1' && h.magic[3] == '\0'))
        throw FormatError("nifti: bad magic string (expected \"n+1\"): " + path.string());

    bool swapped = false;
    if (!dim0_valid(h.dim[0])) {
        std::int16_t d0 = h.dim[0];
        swap_bytes(d0);
        if (!dim0_valid(d0))
            throw FormatError("nifti: dim[0] invalid under both byte orders: " + path.string());
        swapped = true;
        swap_header(h);
    }

    NiftiVolume out;
    out.byte_swapped = swapped;

    switch (h.datatype) {
        case 2: out.dtype = NiftiDataType::u8; break;
        case 4: out.dtype = NiftiDataType::i16; break;
        case 8: out.dtype = NiftiDataType::i32; break;
        case 16: out.dtype = NiftiDataType::f32; break;
        case 64: out.dtype = NiftiDataType::f64; break;
        default:
            throw FormatError("nifti: unsupported datatype code " + std::to_string(h.datatype) +
                              ": " + path.string());
    }

    const int ndim = h.dim[0];
    for (int axis = 1; axis <= 3; ++axis) {
        std::int64_t extent = axis <= ndim ? h.dim[axis] : 1;
        if (extent < 1)
            throw FormatError("nifti: dim[" + std::to_string(axis) + "] = " +
                              std::to_string(extent) + " invalid: " + path.string());
        out.geometry.dims[axis - 1] = extent;
        if (axis <= ndim) {
            float s = h.pixdim[axis];
            if (!std::isfinite(s) || s <= 0.0f)
                throw FormatError("nifti: pixdim[" + std::to_string(axis) + "] = " +
                                  std::to_string(s) + " invalid: " + path.string());
            out.geometry.spacing[axis - 1] = s;
        } else {
            out.geometry.spacing[axis - 1] = 1.0;
        }
    }
    // Trailing dims beyond the third must be absent or degenerate; this
    // subset is strictly 3D (probability channels live in separate files).
    for (int axis = 4; axis <= ndim; ++axis)
        if (h.dim[axis] > 1)
            throw FormatError("nifti: " + std::to_string(ndim) + "-dimensional data not supported: " +
                              path.string());

    if (!std::isfinite(h.vox_offset) || h.vox_offset < static_cast<float>(kHeaderSize))
        throw FormatError("nifti: invalid vox_offset " + std::to_string(h.vox_offset) + ": " +
                          path.string());
    const auto vox_offset = static_cast<std::int64_t>(std::llround(h.vox_offset));

    out.scl_slope = std::isfinite(h.scl_slope) ? h.scl_slope : 1.0f;
    out.scl_inter = std::isfinite(h.scl_inter) ? h.scl_inter : 0.0f;

    const std::int64_t count = out.geometry.voxel_count();
    const std::int64_t bytes = count * static_cast<std::int64_t>(element_size(out.dtype));
    if (vox_offset + bytes > static_cast<std::int64_t>(file_size))
        throw FormatError("nifti: declared data length " + std::to_string(bytes) +
                          " at offset " + std::to_string(vox_offset) + " exceeds file size " +
                          std::to_string(file_size) + ": " + path.string());

    f.seekg(vox_offset);
    if (!f)
        throw IoError("nifti: cannot seek to voxel data: " + path.string());

    const std::string p = path.string();
    switch (out.dtype) {
        case NiftiDataType::u8: out.data = read_payload<std::uint8_t>(f, count, swapped, p); break;
        case NiftiDataType::i16: out.data = read_payload<std::int16_t>(f, count, swapped, p); break;
        case NiftiDataType::i32: out.data = read_payload<std::int32_t>(f, count, swapped, p); break;
        case NiftiDataType::f32: out.data = read_payload<float>(f, count, swapped, p); break;
        case NiftiDataType::f64: out.data = read_payload<double>(f, count, swapped, p); break;
    }
    return out;
}

void write_nifti(const NiftiVolume& volume, const std::filesystem::path& path) {
    const auto& g = volume.geometry;
    if (!g.valid())
        throw ValidationError("nifti: invalid geometry: " + describe_geometry(g));
    for (int i = 0; i < 3; ++i)
        if (g.dims[i] > kMaxDimSize)
            throw ValidationError("nifti: dimension " + std::to_string(g.dims[i]) +
                                  " exceeds the int16 header field");
    if (volume.element_count() != g.voxel_count())
        throw ValidationError("nifti: payload has " + std::to_string(volume.element_count()) +
                              " elements, geometry needs " + std::to_string(g.voxel_count()));

    Nifti1Header h{};
    h.sizeof_hdr = static_cast<std::int32_t>(kHeaderSize);
    h.regular = 'r';
    h.dim[0] = 3;
    for (int i = 0; i < 3; ++i) h.dim[i + 1] = static_cast<std::int16_t>(g.dims[i]);
    for (int i = 4; i < 8; ++i) h.dim[i] = 1;
    h.datatype = static_cast<std::int16_t>(volume.dtype);
    h.bitpix = static_cast<std::int16_t>(element_size(volume.dtype) * 8);
    h.pixdim[0] = 1.0f;
    for (int i = 0; i < 3; ++i) h.pixdim[i + 1] = static_cast<float>(g.spacing[i]);
    h.vox_offset = static_cast<float>(kVoxOffset);
    h.scl_slope = volume.scl_slope;
    h.scl_inter = volume.scl_inter;
    h.xyzt_units = 2; // NIFTI_UNITS_MM
    std::snprintf(h.descrip, sizeof(h.descrip), "foldgate");
    h.magic[0] = 'n';
    h.magic[1] = '+';
    h.magic[2] = '1';
    h.magic[3] = '\0';

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("nifti: cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(&h), kHeaderSize);
    const char pad[4] = {0, 0, 0, 0}; // no extensions
    f.write(pad, 4);
    std::visit([&f](const auto& v) { write_all(f, v); }, volume.data);
    f.flush();
    if (!f)
        throw IoError("nifti: write failed: " + path.string());
}

void write_nifti(const LabelVolume& volume, const std::filesystem::path& path) {
    validate_label_volume(volume, "nifti: " + path.string());
    std::int32_t max_id = 0;
    for (std::int32_t id : volume.voxels) max_id = std::max(max_id, id);
    if (max_id > std::numeric_limits<std::int16_t>::max())
        throw ValidationError("nifti: label id " + std::to_string(max_id) +
                              " exceeds the int16 range: " + path.string());

    NiftiVolume raw;
    raw.geometry = volume.geometry;
    if (max_id <= 255) {
        raw.dtype = NiftiDataType::u8;
        std::vector<std::uint8_t> data(volume.voxels.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] = static_cast<std::uint8_t>(volume.voxels[i]);
        raw.data = std::move(data);
    } else {
        raw.dtype = NiftiDataType::i16;
        std::vector<std::int16_t> data(volume.voxels.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] = static_cast<std::int16_t>(volume.voxels[i]);
        raw.data = std::move(data);
    }
    write_nifti(raw, path);
}

void write_nifti_channel(const VolumeGeometry& geometry, std::span<const float> channel,
                         const std::filesystem::path& path) {
    NiftiVolume raw;
    raw.geometry = geometry;
    raw.dtype = NiftiDataType::f32;
    raw.data = std::vector<float>(channel.begin(), channel.end());
    write_nifti(raw, path);
}

LabelVolume to_label_volume(const NiftiVolume& volume) {
    constexpr double kIntegerTolerance = 1e-6;
    const bool scaled = scaling_active(volume.scl_slope, volume.scl_inter);
    const double slope = scaled ? volume.scl_slope : 1.0;
    const double inter = scaled ? volume.scl_inter : 0.0;

    LabelVolume out;
    out.geometry = volume.geometry;
    out.voxels.resize(static_cast<std::size_t>(volume.element_count()));

    std::visit(
        [&](const auto& data) {
            using T = typename std::decay_t<decltype(data)>::value_type;
            for (std::size_t i = 0; i < data.size(); ++i) {
                double v = slope * static_cast<double>(data[i]) + inter;
                if constexpr (std::is_floating_point_v<T>) {
                    double nearest = std::round(v);
                    if (std::abs(v - nearest) > kIntegerTolerance)
                        throw ValidationError("nifti: voxel " + std::to_string(i) + " value " +
                                              std::to_string(v) + " is not an integer label");
                    v = nearest;
                } else if (scaled) {
                    double nearest = std::round(v);
                    if (std::abs(v - nearest) > kIntegerTolerance)
                        throw ValidationError("nifti: voxel " + std::to_string(i) +
                                              " scaled value " + std::to_string(v) +
                                              " is not an integer label");
                    v = nearest;
                }
                if (v < 0.0 || v > static_cast<double>(std::numeric_limits<std::int32_t>::max()))
                    throw ValidationError("nifti: voxel " + std::to_string(i) + " value " +
                                          std::to_string(v) + " outside the label id range");
                out.voxels[i] = static_cast<std::int32_t>(v);
            }
        },
        volume.data);
    return out;
}

std::vector<float> to_channel(const NiftiVolume& volume) {
    const bool scaled = scaling_active(volume.scl_slope, volume.scl_inter);
    const double slope = scaled ? volume.scl_slope : 1.0;
    const double inter = scaled ? volume.scl_inter : 0.0;

    std::vector<float> out(static_cast<std::size_t>(volume.element_count()));
    std::visit(
        [&](const auto& data) {
            for (std::size_t i = 0; i < data.size(); ++i)
                out[i] = static_cast<float>(slope * static_cast<double>(data[i]) + inter);
        },
        volume.data);
    return out;
}

} // namespace foldgate
