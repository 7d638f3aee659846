#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "vmr/errors.hpp"

namespace vmr {

// Little-endian binary primitives shared by the dataset and checkpoint
// formats. Byte order is written explicitly so files are portable.

inline void write_u32(std::ostream& os, std::uint32_t x) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
    os.write(b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t x) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
    os.write(b, 8);
}

inline void write_i32(std::ostream& os, std::int32_t x) {
    write_u32(os, static_cast<std::uint32_t>(x));
}

inline void write_f64(std::ostream& os, double x) {
    write_u64(os, std::bit_cast<std::uint64_t>(x));
}

inline std::uint32_t read_u32(std::istream& is) {
    char b[4];
    is.read(b, 4);
    if (!is) throw IoError("unexpected end of file reading u32");
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return x;
}

inline std::uint64_t read_u64(std::istream& is) {
    char b[8];
    is.read(b, 8);
    if (!is) throw IoError("unexpected end of file reading u64");
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return x;
}

inline std::int32_t read_i32(std::istream& is) {
    return static_cast<std::int32_t>(read_u32(is));
}

inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline void write_magic(std::ostream& os, std::string_view magic) {
    os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& is, std::string_view magic, std::string_view what) {
    std::string got(magic.size(), '\0');
    is.read(got.data(), static_cast<std::streamsize>(magic.size()));
    if (!is || got != magic)
        throw IoError(std::string(what) + ": bad magic header");
}

inline void write_string(std::ostream& os, std::string_view s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
    const std::uint32_t n = read_u32(is);
    if (n > (1u << 20)) throw IoError("string length out of range");
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw IoError("unexpected end of file reading string");
    return s;
}

}  // namespace vmr
