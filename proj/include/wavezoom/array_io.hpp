#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wz {

/// Container array: magic "WZ01", uint32 rank, rank x uint64 dims, then
/// little-endian float64 payload in row-major order.
struct Array {
    std::vector<std::uint64_t> shape;
    std::vector<double> data;

    std::uint64_t element_count() const;
};

std::vector<std::uint8_t> encode_array(std::span<const std::uint64_t> shape,
                                       std::span<const double> data);
Array decode_array(std::span<const std::uint8_t> bytes, const std::string& what = "array");

/// Writes the array and returns the SHA-256 of the file contents (hex).
std::string write_array(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                        std::span<const double> data);
Array read_array(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace wz
