#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>

namespace mia {

// Little-endian binary writer. Writes go to "<path>.tmp"; commit() renames
// into place so a failed stage never leaves a partial artifact behind.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path);
    ~BinaryWriter();

    BinaryWriter(const BinaryWriter&) = delete;
    BinaryWriter& operator=(const BinaryWriter&) = delete;

    void magic(const char tag[4]);
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void f64_array(const double* data, std::size_t count);
    void bytes(const void* data, std::size_t count);

    void commit();

private:
    std::string path_;
    std::string tmp_path_;
    std::ofstream out_;
    bool committed_ = false;
};

// Little-endian binary reader; every decode failure throws FormatError
// naming the byte offset at which the problem was detected.
class BinaryReader {
public:
    BinaryReader(const std::string& path, const char* what);

    void expect_magic(const char tag[4]);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void f64_array(double* data, std::size_t count);
    void bytes(void* data, std::size_t count);
    void expect_eof();

    std::uint64_t offset() const { return offset_; }
    std::uint64_t file_size() const { return file_size_; }
    // Throws FormatError at the current offset.
    [[noreturn]] void fail(const std::string& msg) const;
    [[noreturn]] void fail_at(const std::string& msg, std::uint64_t at) const;

private:
    std::string path_;
    std::string what_;
    std::ifstream in_;
    std::uint64_t offset_ = 0;
    std::uint64_t file_size_ = 0;
};

// FNV-1a 64-bit hashes, used for pipeline artifact manifests.
std::uint64_t fnv1a64(const void* data, std::size_t count,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64_string(const std::string& s,
                             std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64_file(const std::string& path);

}  // namespace mia
