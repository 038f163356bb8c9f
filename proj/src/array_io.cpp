#include "wavezoom/array_io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "wavezoom/errors.hpp"

static_assert(std::endian::native == std::endian::little, "container format assumes a little-endian host");

namespace wz {

namespace {

constexpr char kMagic[4] = {'W', 'Z', '0', '1'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos, const std::string& what) {
    if (pos + sizeof(T) > bytes.size()) throw ShapeError(what + ": truncated header");
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::uint64_t Array::element_count() const {
    std::uint64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::vector<std::uint8_t> encode_array(std::span<const std::uint64_t> shape,
                                       std::span<const double> data) {
    std::uint64_t n = 1;
    for (auto d : shape) n *= d;
    if (n != data.size()) throw ShapeError("array payload does not match its shape");
    std::vector<std::uint8_t> out;
    out.reserve(8 + 8 * shape.size() + 8 * data.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put<std::uint64_t>(out, d);
    const auto* p = reinterpret_cast<const std::uint8_t*>(data.data());
    out.insert(out.end(), p, p + data.size() * sizeof(double));
    return out;
}

Array decode_array(std::span<const std::uint8_t> bytes, const std::string& what) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ShapeError(what + ": bad magic, not a WZ01 array");
    }
    std::size_t pos = 4;
    const auto rank = get<std::uint32_t>(bytes, pos, what);
    if (rank > 16) throw ShapeError(what + ": implausible rank " + std::to_string(rank));
    Array a;
    for (std::uint32_t k = 0; k < rank; ++k) a.shape.push_back(get<std::uint64_t>(bytes, pos, what));
    const std::uint64_t n = a.element_count();
    const std::size_t payload = bytes.size() - pos;
    if (payload != n * sizeof(double)) {
        throw ShapeError(what + ": shape mismatch, header declares " + std::to_string(n) +
                         " values but payload holds " + std::to_string(payload / sizeof(double)) +
                         (payload % sizeof(double) ? " and a partial value" : ""));
    }
    a.data.resize(n);
    if (n) std::memcpy(a.data.data(), bytes.data() + pos, payload);
    return a;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingPrerequisite("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return {bytes.begin(), bytes.end()};
}

std::string write_array(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                        std::span<const double> data) {
    const auto bytes = encode_array(shape, data);
    write_file(path, bytes);
    return sha256_hex(bytes);
}

Array read_array(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_array(bytes, path.filename().string());
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string s;
    s.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        s.push_back(hex[digest[k] >> 4]);
        s.push_back(hex[digest[k] & 0xF]);
    }
    return s;
}

std::string sha256_hex(const std::string& text) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace wz
