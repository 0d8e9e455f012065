#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace tabtext {

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string to_hex(const Sha256& digest);

// Digest of a whole file's bytes. Throws tabtext::Error when unreadable.
std::string file_sha256_hex(const std::filesystem::path& path);

}  // namespace tabtext
