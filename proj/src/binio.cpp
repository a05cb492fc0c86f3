#include "mia/binio.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <vector>

#include "mia/error.hpp"

namespace mia {

namespace {

void encode_u64(std::uint64_t v, unsigned char* b) {
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t decode_u64(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
}

}  // namespace

BinaryWriter::BinaryWriter(const std::string& path)
    : path_(path), tmp_path_(path + ".tmp") {
    out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open for writing: " + tmp_path_);
}

BinaryWriter::~BinaryWriter() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_path_, ec);
    }
}

void BinaryWriter::magic(const char tag[4]) { bytes(tag, 4); }

void BinaryWriter::u8(std::uint8_t v) { bytes(&v, 1); }

void BinaryWriter::u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
    unsigned char b[8];
    encode_u64(v, b);
    bytes(b, 8);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::f64_array(const double* data, std::size_t count) {
    std::vector<unsigned char> buf(count * 8);
    for (std::size_t i = 0; i < count; ++i)
        encode_u64(std::bit_cast<std::uint64_t>(data[i]), buf.data() + 8 * i);
    bytes(buf.data(), buf.size());
}

void BinaryWriter::bytes(const void* data, std::size_t count) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(count));
    if (!out_) throw IoError("write failed: " + tmp_path_);
}

void BinaryWriter::commit() {
    out_.flush();
    if (!out_) throw IoError("flush failed: " + tmp_path_);
    out_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_path_, path_, ec);
    if (ec) throw IoError("rename failed: " + tmp_path_ + " -> " + path_);
    committed_ = true;
}

BinaryReader::BinaryReader(const std::string& path, const char* what)
    : path_(path), what_(what) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot open " + what_ + ": " + path);
    file_size_ = size;
    in_.open(path, std::ios::binary);
    if (!in_) throw IoError("cannot open " + what_ + ": " + path);
}

void BinaryReader::expect_magic(const char tag[4]) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, tag, 4) != 0)
        throw FormatError(what_ + " " + path_ + ": bad magic, expected \"" +
                              std::string(tag, 4) + "\"",
                          0);
}

std::uint8_t BinaryReader::u8() {
    unsigned char b;
    bytes(&b, 1);
    return b;
}

std::uint32_t BinaryReader::u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[i]} << (8 * i);
    return v;
}

std::uint64_t BinaryReader::u64() {
    unsigned char b[8];
    bytes(b, 8);
    return decode_u64(b);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::f64_array(double* data, std::size_t count) {
    std::vector<unsigned char> buf(count * 8);
    bytes(buf.data(), buf.size());
    for (std::size_t i = 0; i < count; ++i)
        data[i] = std::bit_cast<double>(decode_u64(buf.data() + 8 * i));
}

void BinaryReader::bytes(void* data, std::size_t count) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in_.gcount()) != count)
        throw FormatError(what_ + " " + path_ + ": truncated file",
                          offset_ + static_cast<std::uint64_t>(in_.gcount()));
    offset_ += count;
}

void BinaryReader::expect_eof() {
    char c;
    in_.read(&c, 1);
    if (!in_.eof())
        throw FormatError(what_ + " " + path_ + ": trailing bytes", offset_);
}

void BinaryReader::fail(const std::string& msg) const {
    throw FormatError(what_ + " " + path_ + ": " + msg, offset_);
}

void BinaryReader::fail_at(const std::string& msg, std::uint64_t at) const {
    throw FormatError(what_ + " " + path_ + ": " + msg, at);
}

std::uint64_t fnv1a64(const void* data, std::size_t count, std::uint64_t seed) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < count; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_string(const std::string& s, std::uint64_t seed) {
    return fnv1a64(s.data(), s.size(), seed);
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

}  // namespace mia
