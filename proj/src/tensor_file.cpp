#include "owc/tensor_file.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace owc::io {

void ByteWriter::f32(float v) { le(std::bit_cast<std::uint32_t>(v), 4); }
void ByteWriter::f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

float ByteReader::f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(le(4))); }
double ByteReader::f64() { return std::bit_cast<double>(le(8)); }

std::string ByteReader::bytes(std::size_t n)
{
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
}

void ByteReader::need(std::size_t n) const
{
    if (data_.size() - pos_ < n)
        throw FormatError(what_ + " is truncated");
}

std::uint64_t ByteReader::le(int n)
{
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
             << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.flush();
        if (!f)
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string encode_tensor_file(const char (&magic)[5], const TensorFile& file)
{
    ByteWriter w;
    w.bytes(magic, 4);
    w.u16(kTensorFileVersion);
    w.f64(file.scalar);
    w.u32(static_cast<std::uint32_t>(file.tensors.size()));
    for (const auto& t : file.tensors) {
        std::size_t n = 1;
        for (int d : t.shape)
            n *= static_cast<std::size_t>(d);
        if (n != t.data.size())
            throw std::invalid_argument("tensor '" + t.name + "' data does not match its shape");
        if (t.name.size() > 0xffff || t.shape.size() > 0xff)
            throw std::invalid_argument("tensor '" + t.name + "' cannot be encoded");
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.bytes(t.name.data(), t.name.size());
        w.u8(static_cast<std::uint8_t>(t.shape.size()));
        for (int d : t.shape)
            w.u32(static_cast<std::uint32_t>(d));
        for (float v : t.data)
            w.f32(v);
    }
    return w.str();
}

TensorFile decode_tensor_file(const char (&magic)[5], const std::string& bytes, const std::string& what)
{
    ByteReader r(bytes, what);
    if (r.bytes(4) != std::string(magic, 4))
        throw FormatError(what + ": bad magic");
    const std::uint16_t version = r.u16();
    if (version != kTensorFileVersion)
        throw FormatError(what + ": unsupported format version " + std::to_string(version));
    TensorFile f;
    f.scalar = r.f64();
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        RawTensor t;
        t.name = r.bytes(r.u16());
        t.shape.resize(r.u8());
        std::size_t n = 1;
        for (auto& d : t.shape) {
            d = static_cast<int>(r.u32());
            n *= static_cast<std::size_t>(d);
        }
        if (n > r.remaining() / 4)
            throw FormatError(what + " is truncated");
        t.data.resize(n);
        for (auto& v : t.data)
            v = r.f32();
        f.tensors.push_back(std::move(t));
    }
    if (r.remaining() != 0)
        throw FormatError(what + ": trailing bytes after the last tensor");
    return f;
}

void write_tensor_file(const std::filesystem::path& path, const char (&magic)[5], const TensorFile& f)
{
    write_file_atomic(path, encode_tensor_file(magic, f));
}

TensorFile read_tensor_file(const std::filesystem::path& path, const char (&magic)[5])
{
    return decode_tensor_file(magic, read_file(path), "'" + path.string() + "'");
}

} // namespace owc::io
