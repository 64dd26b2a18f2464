// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "erddci/tensor.hpp"

namespace erddci {

/// On-disk element type of a tensor file.
enum class DType : std::uint32_t { f64 = 0, f32 = 1 };

/// Tensor file layout, little-endian throughout:
///
///   offset  size        field
///   0       4           magic "ERDT"
///   4       4           version (u32) = 1
///   8       4           ndim (u32)
///   12      4*ndim      extents (u32 each)
///   ..      4           dtype code (u32): 0 = f64, 1 = f32
///   ..      n*(8|4)     values, row-major
inline constexpr std::uint32_t kTensorFileVersion = 1;

std::vector<std::uint8_t> encode_tensor(const Tensor& t, DType dtype = DType::f64);

/// Decodes a complete tensor file image. Throws ParseError on bad magic,
/// unsupported version, unknown dtype, truncation, or trailing bytes.
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype = DType::f64);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace erddci
