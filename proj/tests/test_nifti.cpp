#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>
#include <vector>

#include "core/errors.hpp"
#include "core/nifti.hpp"
#include "testutil.hpp"

using namespace foldgate;
using foldgate::test::make_label;
using foldgate::test::TempDir;

namespace {

std::vector<char> slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    REQUIRE(f.good());
}

// Test-local swapper, deliberately not sharing code with the reader.
void swap_range(char* data, std::size_t count, std::size_t width) {
    for (std::size_t i = 0; i < count; ++i) {
        char* p = data + i * width;
        for (std::size_t a = 0, b = width - 1; a < b; ++a, --b)
            std::swap(p[a], p[b]);
    }
}

} // namespace

TEST_CASE("single-voxel uint8 volume round-trips") {
    TempDir tmp;
    LabelVolume v = make_label(1, 1, 1, 0.7, 0.8, 0.9);
    v.voxels[0] = 3;
    const auto path = tmp / "one.nii";
    write_nifti(v, path);
    const LabelVolume back = to_label_volume(read_nifti(path));
    CHECK(back.voxels == v.voxels);
    CHECK(back.geometry.dims == v.geometry.dims);
    CHECK(back.geometry.spacing[0] == doctest::Approx(0.7));
    CHECK(back.geometry.spacing[1] == doctest::Approx(0.8));
    CHECK(back.geometry.spacing[2] == doctest::Approx(0.9));
}

TEST_CASE("16x16x8 int16 volume round-trips bit-exactly") {
    TempDir tmp;
    LabelVolume v = make_label(16, 16, 8, 1.0, 1.0, 3.0);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int32_t> dist(0, 4000); // forces int16 payload
    for (auto& voxel : v.voxels)
        voxel = dist(rng);
    const auto path = tmp / "grid.nii";
    write_nifti(v, path);

    const NiftiVolume raw = read_nifti(path);
    CHECK(raw.dtype == NiftiDataType::i16);
    const LabelVolume back = to_label_volume(raw);
    CHECK(back.voxels == v.voxels);

    const auto rewritten = tmp / "grid2.nii";
    write_nifti(back, rewritten);
    CHECK(slurp(path) == slurp(rewritten));
}

TEST_CASE("every supported datatype round-trips through the generic writer") {
    TempDir tmp;
    VolumeGeometry g;
    g.dims = {3, 2, 2};
    g.spacing = {1.5, 1.0, 2.0};

    NiftiVolume v;
    v.geometry = g;

    SUBCASE("uint8") {
        v.dtype = NiftiDataType::u8;
        v.data = std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    }
    SUBCASE("int16") {
        v.dtype = NiftiDataType::i16;
        v.data = std::vector<std::int16_t>{-5, 0, 300, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    }
    SUBCASE("int32") {
        v.dtype = NiftiDataType::i32;
        v.data = std::vector<std::int32_t>{-70000, 0, 70000, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    }
    SUBCASE("float32") {
        v.dtype = NiftiDataType::f32;
        v.data = std::vector<float>{0.0f, 0.25f, -1.5f, 3e7f, 4, 5, 6, 7, 8, 9, 10, 11};
    }
    SUBCASE("float64") {
        v.dtype = NiftiDataType::f64;
        v.data = std::vector<double>{0.0, 0.1, -2.75, 3e300, 4, 5, 6, 7, 8, 9, 10, 11};
    }

    const auto path = tmp / "t.nii";
    write_nifti(v, path);
    const NiftiVolume back = read_nifti(path);
    CHECK(back.dtype == v.dtype);
    CHECK(back.geometry.dims == g.dims);
    CHECK(back.data == v.data);
    CHECK_FALSE(back.byte_swapped);
}

TEST_CASE("byte-swapped file decodes identically to the native file") {
    TempDir tmp;
    LabelVolume v = make_label(6, 5, 4, 0.5, 0.5, 2.5);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::int32_t> dist(0, 999);
    for (auto& voxel : v.voxels)
        voxel = dist(rng);
    const auto native = tmp / "native.nii";
    write_nifti(v, native);

    std::vector<char> bytes = slurp(native);
    // Swap the header fields the reader consumes, then the payload.
    swap_range(bytes.data() + 0, 1, 4);    // sizeof_hdr
    swap_range(bytes.data() + 40, 8, 2);   // dim
    swap_range(bytes.data() + 70, 1, 2);   // datatype
    swap_range(bytes.data() + 72, 1, 2);   // bitpix
    swap_range(bytes.data() + 76, 8, 4);   // pixdim
    swap_range(bytes.data() + 108, 1, 4);  // vox_offset
    swap_range(bytes.data() + 112, 1, 4);  // scl_slope
    swap_range(bytes.data() + 116, 1, 4);  // scl_inter
    swap_range(bytes.data() + 352, static_cast<std::size_t>(6 * 5 * 4), 2);
    const auto swapped = tmp / "swapped.nii";
    spit(swapped, bytes);

    const NiftiVolume raw = read_nifti(swapped);
    CHECK(raw.byte_swapped);
    const LabelVolume back = to_label_volume(raw);
    CHECK(back.voxels == v.voxels);
    CHECK(back.geometry.spacing[2] == doctest::Approx(2.5));
}

TEST_CASE("empty 4x4x4 label volume writes 352 + 64 bytes") {
    TempDir tmp;
    const LabelVolume v = make_label(4, 4, 4);
    const auto path = tmp / "empty.nii";
    write_nifti(v, path);
    CHECK(std::filesystem::file_size(path) == 352 + 64);
}

TEST_CASE("probability channel of 0.5 reads back exactly") {
    TempDir tmp;
    VolumeGeometry g;
    g.dims = {4, 4, 2};
    g.spacing = {1.0, 1.0, 1.0};
    const std::vector<float> channel(32, 0.5f);
    const auto path = tmp / "prob.nii";
    write_nifti_channel(g, channel, path);

    const NiftiVolume raw = read_nifti(path);
    CHECK(raw.dtype == NiftiDataType::f32);
    CHECK(to_channel(raw) == channel);
}

TEST_CASE("label payload type depends on the maximum id") {
    TempDir tmp;
    LabelVolume v = make_label(2, 2, 1);

    v.voxels = {0, 1, 2, 255};
    write_nifti(v, tmp / "u8.nii");
    CHECK(read_nifti(tmp / "u8.nii").dtype == NiftiDataType::u8);

    v.voxels = {0, 1, 2, 256};
    write_nifti(v, tmp / "i16.nii");
    CHECK(read_nifti(tmp / "i16.nii").dtype == NiftiDataType::i16);

    v.voxels = {0, 1, 2, 40000};
    CHECK_THROWS_AS(write_nifti(v, tmp / "over.nii"), ValidationError);
}

TEST_CASE("scl slope and intercept are applied to label volumes") {
    TempDir tmp;
    NiftiVolume v;
    v.geometry.dims = {2, 1, 1};
    v.geometry.spacing = {1.0, 1.0, 1.0};
    v.dtype = NiftiDataType::f32;
    v.scl_slope = 2.0f;
    v.scl_inter = 1.0f;
    v.data = std::vector<float>{0.5f, 1.0f};
    const auto path = tmp / "scaled.nii";
    write_nifti(v, path);

    const LabelVolume back = to_label_volume(read_nifti(path));
    CHECK(back.voxels == std::vector<std::int32_t>{2, 3});
}

TEST_CASE("scaled values off the integer grid are rejected for labels") {
    TempDir tmp;
    NiftiVolume v;
    v.geometry.dims = {1, 1, 1};
    v.geometry.spacing = {1.0, 1.0, 1.0};
    v.dtype = NiftiDataType::f32;
    v.scl_slope = 0.5f;
    v.data = std::vector<float>{1.0f};
    const auto path = tmp / "frac.nii";
    write_nifti(v, path);
    CHECK_THROWS_AS(to_label_volume(read_nifti(path)), ValidationError);
}

TEST_CASE("malformed files are rejected with format errors") {
    TempDir tmp;
    const LabelVolume v = make_label(2, 2, 2);
    const auto good = tmp / "good.nii";
    write_nifti(v, good);
    std::vector<char> bytes = slurp(good);

    SUBCASE("bad magic") {
        bytes[344] = 'x';
        spit(tmp / "bad.nii", bytes);
        CHECK_THROWS_AS(read_nifti(tmp / "bad.nii"), FormatError);
    }
    SUBCASE("file shorter than the header") {
        bytes.resize(100);
        spit(tmp / "bad.nii", bytes);
        CHECK_THROWS_AS(read_nifti(tmp / "bad.nii"), FormatError);
    }
    SUBCASE("declared payload exceeds the file") {
        bytes.resize(352 + 3); // dims say 8 voxels
        spit(tmp / "bad.nii", bytes);
        CHECK_THROWS_AS(read_nifti(tmp / "bad.nii"), FormatError);
    }
    SUBCASE("dim[0] invalid under both byte orders") {
        bytes[40] = 0;
        bytes[41] = 0;
        spit(tmp / "bad.nii", bytes);
        CHECK_THROWS_AS(read_nifti(tmp / "bad.nii"), FormatError);
    }
    SUBCASE("unsupported datatype code") {
        bytes[70] = 32; // complex64
        bytes[71] = 0;
        spit(tmp / "bad.nii", bytes);
        CHECK_THROWS_AS(read_nifti(tmp / "bad.nii"), FormatError);
    }
    SUBCASE("4D data is rejected") {
        bytes[40] = 4; // dim[0] = 4
        bytes[48] = 2; // dim[4] = 2
        spit(tmp / "bad.nii", bytes);
        CHECK_THROWS_AS(read_nifti(tmp / "bad.nii"), FormatError);
    }
}

TEST_CASE("missing file is a validation error") {
    CHECK_THROWS_AS(read_nifti("/nonexistent/volume.nii"), ValidationError);
}

TEST_CASE("negative values cannot become labels") {
    TempDir tmp;
    NiftiVolume v;
    v.geometry.dims = {1, 1, 1};
    v.geometry.spacing = {1.0, 1.0, 1.0};
    v.dtype = NiftiDataType::i16;
    v.data = std::vector<std::int16_t>{-2};
    const auto path = tmp / "neg.nii";
    write_nifti(v, path);
    CHECK_THROWS_AS(to_label_volume(read_nifti(path)), ValidationError);
}
