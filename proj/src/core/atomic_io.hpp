#pragma once

#include <filesystem>
#include <string_view>

#include "core/volume.hpp"

namespace foldgate {

/// write-then-rename; a reader never observes a partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
void write_label_volume_atomic(const LabelVolume& vol, const std::filesystem::path& path);

} // namespace foldgate
