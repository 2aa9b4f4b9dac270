#include "core/atomic_io.hpp"

#include <fstream>

#include "core/errors.hpp"
#include "core/nifti.hpp"

namespace foldgate {

namespace fs = std::filesystem;

namespace {

void rename_into_place(const fs::path& tmp, const fs::path& path) {
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename " + tmp.string() + " -> " + path.string() + ": " +
                      ec.message());
}

} // namespace

void write_text_atomic(const fs::path& path, std::string_view text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open for writing: " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out)
            throw IoError("write failed: " + tmp.string());
    }
    rename_into_place(tmp, path);
}

void write_label_volume_atomic(const LabelVolume& vol, const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    write_nifti(vol, tmp);
    rename_into_place(tmp, path);
}

} // namespace foldgate
