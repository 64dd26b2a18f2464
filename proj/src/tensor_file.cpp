// SPDX-License-Identifier: Apache-2.0
#include "erddci/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "erddci/errors.hpp"

namespace erddci {
namespace {

constexpr std::uint8_t kMagic[4] = {'E', 'R', 'D', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64(const char* field) {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    std::span<const std::uint8_t> take(std::size_t n, const char* field) {
        need(n, field);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n, const char* field) const {
        if (bytes_.size() - pos_ < n) {
            throw ParseError(ParseError::Kind::truncated,
                             std::string("tensor file truncated while reading ") + field);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype) {
    if (t.empty()) throw ShapeError("cannot serialize an empty tensor");
    std::vector<std::uint8_t> out;
    const std::size_t width = dtype == DType::f64 ? 8 : 4;
    out.reserve(16 + 4 * t.ndim() + width * t.size());
    for (std::uint8_t b : kMagic) out.push_back(b);
    put_u32(out, kTensorFileVersion);
    put_u32(out, static_cast<std::uint32_t>(t.ndim()));
    for (std::size_t extent : t.shape()) {
        if (extent > 0xffffffffu) throw ShapeError("extent does not fit the u32 file field");
        put_u32(out, static_cast<std::uint32_t>(extent));
    }
    put_u32(out, static_cast<std::uint32_t>(dtype));
    switch (dtype) {
        case DType::f64:
            for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
            break;
        case DType::f32:
            for (double v : t.values()) {
                put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
            }
            break;
        default:
            throw ParameterError("unknown dtype");
    }
    return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    auto magic = in.take(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) {
        throw ParseError(ParseError::Kind::bad_magic, "not a tensor file (bad magic)");
    }
    const std::uint32_t version = in.u32("version");
    if (version != kTensorFileVersion) {
        throw ParseError(ParseError::Kind::bad_version,
                         "unsupported tensor file version " + std::to_string(version));
    }
    const std::uint32_t ndim = in.u32("ndim");
    if (ndim == 0) throw ParseError(ParseError::Kind::bad_shape, "tensor file has ndim = 0");
    if (ndim > in.remaining() / 4) {
        throw ParseError(ParseError::Kind::truncated, "tensor file truncated in extents");
    }
    Shape shape(ndim);
    for (auto& extent : shape) extent = in.u32("extent");
    std::size_t count = 0;
    try {
        count = checked_element_count(shape);
    } catch (const ShapeError& e) {
        throw ParseError(ParseError::Kind::bad_shape, e.what());
    }
    const std::uint32_t code = in.u32("dtype");
    if (code != static_cast<std::uint32_t>(DType::f64) && code != static_cast<std::uint32_t>(DType::f32)) {
        throw ParseError(ParseError::Kind::unknown_dtype, "unknown dtype code " + std::to_string(code));
    }
    const std::size_t width = code == 0 ? 8 : 4;
    if (count > in.remaining() / width) {
        throw ParseError(ParseError::Kind::truncated, "tensor file payload truncated");
    }
    std::vector<double> data(count);
    for (auto& v : data) {
        v = width == 8 ? std::bit_cast<double>(in.u64("value"))
                       : static_cast<double>(std::bit_cast<float>(in.u32("value")));
    }
    if (in.remaining() != 0) {
        throw ParseError(ParseError::Kind::truncated, "trailing bytes after tensor payload");
    }
    try {
        return Tensor(std::move(shape), std::move(data));
    } catch (const ParameterError& e) {
        throw ParseError(ParseError::Kind::non_finite, e.what());
    }
}

void write_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype) {
    const auto bytes = encode_tensor(t, dtype);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(ParseError::Kind::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

}  // namespace erddci
