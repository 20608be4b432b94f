#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace citerank {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lower-case hex SHA-256 of a file's contents, read in chunks.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace citerank
