#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace asag {

std::string sha256_hex(std::string_view data);

// Same digest `git hash-object` prints for a file with this content.
std::string git_blob_sha1(std::string_view content);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace asag
