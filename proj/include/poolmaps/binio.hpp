#ifndef POOLMAPS_BINIO_HPP
#define POOLMAPS_BINIO_HPP

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace poolmaps {

// Little-endian binary primitives shared by the bundle and map formats, plus
// whole-file helpers. All writes go through atomic_write_file (temp + rename)
// so readers never observe a partial file.

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_f64_array(std::string& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    for (double x : v) put_f64(out, x);
}

inline void put_string(std::string& out, const std::string& s) {
    put_u64(out, s.size());
    out.append(s);
}

// Bounds-checked readers over an in-memory buffer; `at` advances past what
// was consumed. Truncation throws FormatError naming the offset.
struct BinReader {
    const std::string& buf;
    std::size_t at = 0;

    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::vector<double> f64_array(std::uint64_t max_len);
    std::string str(std::uint64_t max_len);
    void expect_end() const;

private:
    void need(std::size_t bytes) const;
};

std::string read_file(const std::string& path);
void atomic_write_file(const std::string& path, const std::string& bytes);

}  // namespace poolmaps

#endif
