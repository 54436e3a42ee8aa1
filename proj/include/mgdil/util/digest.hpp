#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mgdil::digest {

// Hex SHA-1 of "blob <size>\0<content>", the object id git assigns to a file.
std::string git_blob_id(std::string_view content);
std::string git_blob_id_of_file(const std::filesystem::path& path);

// 64-bit FNV-1a. Stable across platforms; used for hashing features and seeds.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace mgdil::digest
