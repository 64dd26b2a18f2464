// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "erddci/errors.hpp"
#include "erddci/rng.hpp"
#include "erddci/tensor_file.hpp"

using namespace erddci;

namespace {

std::uint32_t u32_at(const std::vector<std::uint8_t>& b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
           static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

ParseError::Kind parse_kind(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_tensor(bytes);
    } catch (const ParseError& e) {
        return e.kind();
    }
    FAIL("expected a parse error");
    return ParseError::Kind::io;
}

}  // namespace

TEST_CASE("layout of a [1,2] f64 tensor") {
    const auto b = encode_tensor(Tensor({1, 2}, {0.0, 1.0}));
    CHECK(b.size() == 40);
    CHECK(std::memcmp(b.data(), "ERDT", 4) == 0);
    CHECK(u32_at(b, 4) == 1);   // version
    CHECK(u32_at(b, 8) == 2);   // ndim
    CHECK(u32_at(b, 12) == 1);  // extents
    CHECK(u32_at(b, 16) == 2);
    CHECK(u32_at(b, 20) == 0);  // f64
    double v;
    std::memcpy(&v, b.data() + 32, 8);
    CHECK(v == 1.0);
}

TEST_CASE("round trip is bit-exact for f64") {
    Rng rng(9);
    const Tensor t = sample_standard_normal(rng, {3, 5, 2});
    CHECK(decode_tensor(encode_tensor(t)) == t);
}

TEST_CASE("f32 round trip rounds to float") {
    const Tensor t = Tensor::vector({0.1, -2.5, 1e-3});
    const auto b = encode_tensor(t, DType::f32);
    CHECK(b.size() == 4 + 4 + 4 + 4 + 4 + 3 * 4);
    const Tensor back = decode_tensor(b);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back[i] == static_cast<double>(static_cast<float>(t[i])));
}

TEST_CASE("malformed inputs give distinct parse errors") {
    const auto good = encode_tensor(Tensor::vector({1.0, 2.0}));
    auto bad_magic = good;
    std::memcpy(bad_magic.data(), "XXXX", 4);
    CHECK(parse_kind(bad_magic) == ParseError::Kind::bad_magic);

    auto bad_version = good;
    bad_version[4] = 2;
    CHECK(parse_kind(bad_version) == ParseError::Kind::bad_version);

    auto bad_dtype = good;
    bad_dtype[16] = 7;
    CHECK(parse_kind(bad_dtype) == ParseError::Kind::unknown_dtype);

    auto truncated = good;
    truncated.pop_back();
    CHECK(parse_kind(truncated) == ParseError::Kind::truncated);
    CHECK(parse_kind({'E', 'R'}) == ParseError::Kind::truncated);

    auto trailing = good;
    trailing.push_back(0);
    CHECK(parse_kind(trailing) == ParseError::Kind::truncated);

    auto zero_dims = good;
    zero_dims[8] = 0;
    CHECK(parse_kind(zero_dims) == ParseError::Kind::bad_shape);

    auto nan_payload = good;
    const double nan = std::nan("");
    std::memcpy(nan_payload.data() + 20, &nan, 8);
    CHECK(parse_kind(nan_payload) == ParseError::Kind::non_finite);
}

TEST_CASE("file round trip and missing file") {
    const auto path = std::filesystem::temp_directory_path() / "erddci_tensor_file_test.erdt";
    const Tensor t({2, 2}, {1, 2, 3, 4});
    write_tensor(path, t);
    CHECK(std::filesystem::file_size(path) == 4 + 4 + 4 + 8 + 4 + 32);
    CHECK(read_tensor(path) == t);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_tensor(path), ParseError);
}
