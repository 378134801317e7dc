#pragma once

// Little-endian named-tensor container:
//   magic[4] | version u16 | scalar f64 | count u32 |
//   count x ( name_len u16 | name utf-8 | rank u8 | dims u32 x rank | data f32 x prod(dims) )

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace owc::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RawTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

struct TensorFile {
    double scalar = 0.0;
    std::vector<RawTensor> tensors;
};

inline constexpr std::uint16_t kTensorFileVersion = 1;

std::string encode_tensor_file(const char (&magic)[5], const TensorFile& f);
TensorFile decode_tensor_file(const char (&magic)[5], const std::string& bytes,
                              const std::string& what);

void write_tensor_file(const std::filesystem::path& path, const char (&magic)[5], const TensorFile& f);
TensorFile read_tensor_file(const std::filesystem::path& path, const char (&magic)[5]);

/// Write through a temporary sibling and rename into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Minimal little-endian byte writer/reader shared by the binary formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { le(v, 2); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f32(float v);
    void f64(double v);
    void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
    const std::string& str() const { return buf_; }
    void reserve(std::size_t n) { buf_.reserve(n); }

private:
    void le(std::uint64_t v, int n)
    {
        for (int i = 0; i < n; ++i)
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(const std::string& data, std::string what) : data_(data), what_(std::move(what)) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    float f32();
    double f64();
    std::string bytes(std::size_t n);
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const;
    std::uint64_t le(int n);
    const std::string& data_;
    std::string what_;
    std::size_t pos_ = 0;
};

} // namespace owc::io
