#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sck/bitstream.hpp"
#include "sck/errors.hpp"

namespace sck {

// On-disk layout: magic "SCS1", u64le stream length, u32le line count, then
// each line bit-packed LSB-first (ceil(L/8) bytes per line).
inline constexpr std::array<char, 4> kStreamFileMagic = {'S', 'C', 'S', '1'};

namespace detail {

inline void put_u64le(std::ostream& os, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u32le(std::ostream& os, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64le(std::istream& is) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        const int c = is.get();
        if (c < 0) throw std::runtime_error("stream file: truncated header");
        v |= static_cast<std::uint64_t>(c) << (8 * i);
    }
    return v;
}

inline std::uint32_t get_u32le(std::istream& is) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        const int c = is.get();
        if (c < 0) throw std::runtime_error("stream file: truncated header");
        v |= static_cast<std::uint32_t>(c) << (8 * i);
    }
    return v;
}

} // namespace detail

inline void write_stream_file(const std::filesystem::path& path,
                              const std::vector<BitStream>& lines) {
    std::size_t length = lines.empty() ? 0 : lines.front().size();
    for (const BitStream& line : lines)
        if (line.size() != length)
            throw structural_error("write_stream_file: line lengths differ");

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_stream_file: cannot open " + path.string());
    os.write(kStreamFileMagic.data(), kStreamFileMagic.size());
    detail::put_u64le(os, length);
    detail::put_u32le(os, static_cast<std::uint32_t>(lines.size()));
    const std::size_t bytes_per_line = (length + 7) / 8;
    std::vector<char> packed(bytes_per_line);
    for (const BitStream& line : lines) {
        std::fill(packed.begin(), packed.end(), 0);
        for (std::size_t l = 0; l < length; ++l)
            if (line[l]) packed[l / 8] |= static_cast<char>(1 << (l % 8));
        os.write(packed.data(), static_cast<std::streamsize>(packed.size()));
    }
    if (!os) throw std::runtime_error("write_stream_file: write failed");
}

inline std::vector<BitStream> read_stream_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_stream_file: cannot open " + path.string());
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kStreamFileMagic)
        throw std::runtime_error("read_stream_file: bad magic");
    const std::uint64_t length = detail::get_u64le(is);
    const std::uint32_t line_count = detail::get_u32le(is);
    const std::size_t bytes_per_line = (static_cast<std::size_t>(length) + 7) / 8;
    std::vector<BitStream> lines;
    lines.reserve(line_count);
    std::vector<char> packed(bytes_per_line);
    for (std::uint32_t k = 0; k < line_count; ++k) {
        is.read(packed.data(), static_cast<std::streamsize>(packed.size()));
        if (!is) throw std::runtime_error("read_stream_file: truncated payload");
        BitStream line(static_cast<std::size_t>(length));
        for (std::size_t l = 0; l < length; ++l)
            line.set(l, static_cast<Bit>((packed[l / 8] >> (l % 8)) & 1));
        lines.push_back(std::move(line));
    }
    return lines;
}

inline void write_stream_file(const std::filesystem::path& path, const TlbStream& t) {
    write_stream_file(path, std::vector<BitStream>{t.p(), t.n()});
}

inline TlbStream read_tlb_stream_file(const std::filesystem::path& path) {
    auto lines = read_stream_file(path);
    if (lines.size() != 2)
        throw std::runtime_error("read_tlb_stream_file: expected 2 lines, got " +
                                 std::to_string(lines.size()));
    return TlbStream(std::move(lines[0]), std::move(lines[1]));
}

} // namespace sck
