#include "clustval/resources.hpp"

#include <cstdlib>

#include "clustval/error.hpp"

namespace clustval {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("CLUSTVAL_DATA_DIR"); env && *env) return env;
    std::filesystem::path source = CLUSTVAL_SOURCE_DATA_DIR;
    if (std::filesystem::is_directory(source)) return source;
    return CLUSTVAL_INSTALL_DATA_DIR;
}

std::filesystem::path data_file(const std::filesystem::path& name) {
    auto path = data_dir() / name;
    if (!std::filesystem::exists(path)) throw Error("missing data file: " + path.string());
    return path;
}

}  // namespace clustval
