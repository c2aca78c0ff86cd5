#include "poolmaps/binio.hpp"

#include <filesystem>
#include <fstream>

#include "poolmaps/common.hpp"

namespace poolmaps {

void BinReader::need(std::size_t bytes) const {
    if (at + bytes > buf.size())
        throw FormatError("truncated input: need " + std::to_string(bytes) + " bytes at offset " +
                          std::to_string(at) + ", have " + std::to_string(buf.size() - at));
}

std::uint32_t BinReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
    at += 4;
    return v;
}

std::uint64_t BinReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[at + i])) << (8 * i);
    at += 8;
    return v;
}

double BinReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> BinReader::f64_array(std::uint64_t max_len) {
    std::uint64_t len = u64();
    if (len > max_len)
        throw FormatError("array length " + std::to_string(len) + " exceeds limit at offset " +
                          std::to_string(at - 8));
    need(len * 8);
    std::vector<double> v(len);
    for (auto& x : v) x = f64();
    return v;
}

std::string BinReader::str(std::uint64_t max_len) {
    std::uint64_t len = u64();
    if (len > max_len)
        throw FormatError("string length " + std::to_string(len) + " exceeds limit at offset " +
                          std::to_string(at - 8));
    need(len);
    std::string s = buf.substr(at, len);
    at += len;
    return s;
}

void BinReader::expect_end() const {
    if (at != buf.size())
        throw FormatError("trailing bytes: " + std::to_string(buf.size() - at) +
                          " unread at offset " + std::to_string(at));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError("read error on '" + path + "'");
    return bytes;
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + tmp + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw DataError("write error on '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
    }
}

}  // namespace poolmaps
