#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lait {

std::vector<uint8_t> read_file_bytes(const std::string& path);
std::string read_file_text(const std::string& path);

// Writes via a temp file in the same directory followed by rename, so
// readers never observe partial files.
void atomic_write_bytes(const std::string& path, const std::vector<uint8_t>& bytes);
void atomic_write_text(const std::string& path, const std::string& text);

bool file_exists(const std::string& path);

}  // namespace lait
