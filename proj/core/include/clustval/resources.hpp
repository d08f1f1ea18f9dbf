#pragma once

#include <filesystem>

namespace clustval {

/// Directory holding the bundled stopword lists and emoji map.
///
/// Resolution order: `CLUSTVAL_DATA_DIR` environment variable, the source
/// tree's `data/` (development builds), then the installed share directory.
std::filesystem::path data_dir();

/// Resolves `name` inside data_dir(); throws Error if it does not exist.
std::filesystem::path data_file(const std::filesystem::path& name);

}  // namespace clustval
