#include "lait/fsio.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lait/errors.hpp"

namespace fs = std::filesystem;

namespace lait {

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

std::string read_file_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

namespace {

void atomic_write(const std::string& path, const void* data, size_t size) {
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(static_cast<unsigned long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw FormatError("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace

void atomic_write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    atomic_write(path, bytes.data(), bytes.size());
}

void atomic_write_text(const std::string& path, const std::string& text) {
    atomic_write(path, text.data(), text.size());
}

bool file_exists(const std::string& path) { return fs::exists(path); }

}  // namespace lait
